#include <cmath>

#include "cvxmdp/objectives.hpp"
#include "doctest.h"

using namespace cvxmdp;

namespace {

// Central finite differences against the analytic gradient, relative to the
// larger of 1 and the analytic entry.
void check_gradient_fd(const ConvexObjective& f, const Vec& d, double h = 1e-6,
                       double rel_tol = 1e-5) {
    Vec grad = f.gradient(d);
    Vec probe = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        probe[i] = d[i] + h;
        double up = f.value(probe);
        probe[i] = d[i] - h;
        double down = f.value(probe);
        probe[i] = d[i];
        double fd = (up - down) / (2.0 * h);
        CHECK(std::abs(fd - grad[i]) <= rel_tol * std::max(1.0, std::abs(grad[i])));
    }
}

Vec interior_point(int n, std::uint64_t seed) {
    auto rng = make_rng(seed, 2);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    Vec d(n);
    double mass = 0.0;
    for (double& v : d) mass += (v = unit(rng));
    for (double& v : d) v /= mass;
    return d;
}

SkillSet random_skill_set(int Z, int S, std::uint64_t seed, bool uniform_prior) {
    auto rng = make_rng(seed, 5);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    SkillSet set;
    set.prior.assign(Z, 1.0 / Z);
    if (!uniform_prior) {
        double mass = 0.0;
        for (double& w : set.prior) mass += (w = unit(rng));
        for (double& w : set.prior) w /= mass;
    }
    for (int z = 0; z < Z; ++z) set.marginals.push_back(interior_point(S, seed + 17 * z + 1));
    set.check();
    return set;
}

}  // namespace

TEST_CASE("linear objective pins its own dual set") {
    Vec cost = {0.5, -1.5, 0.25};
    LinearObjective f(cost);
    Vec d = {0.2, 0.3, 0.5};
    CHECK(f.value(d) == doctest::Approx(0.5 * 0.2 - 1.5 * 0.3 + 0.25 * 0.5));
    CHECK(f.gradient(d) == cost);
    CHECK(f.grad_bound() == doctest::Approx(1.5));
    DualSet set = f.dual_set();
    CHECK(set.kind == DualSet::Kind::singleton);
    CHECK(set.point == cost);
}

TEST_CASE("negative entropy value, gradient, and conjugate close the loop") {
    NegEntropyObjective f(4);
    Vec uniform(4, 0.25);
    CHECK(f.value(uniform) == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
    // Zero entries contribute zero, not NaN.
    Vec corner = {0.5, 0.5, 0.0, 0.0};
    CHECK(f.value(corner) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

    Vec d = interior_point(4, 3);
    check_gradient_fd(f, d);
    // grad f*(grad f(d)) = d for interior d.
    Vec back = f.conjugate_grad(f.gradient(d));
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(back[i] == doctest::Approx(d[i]).epsilon(1e-10));
    // Fenchel-Young holds with equality at the gradient: f(d) + f*(y) = y.d.
    Vec y = f.gradient(d);
    double conj = 0.0;
    for (double v : y) conj += std::exp(v - 1.0);
    CHECK(f.value(d) + conj == doctest::Approx(dot(y, d)).epsilon(1e-10));
}

TEST_CASE("squared-distance objective matches its closed forms") {
    Vec expert = interior_point(6, 4);
    L2AlObjective f(expert);
    Vec d = interior_point(6, 5);
    double direct = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        direct += (d[i] - expert[i]) * (d[i] - expert[i]);
    CHECK(f.value(d) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(f.value(expert) == 0.0);
    check_gradient_fd(f, d);
    Vec back = f.conjugate_grad(f.gradient(d));
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(back[i] == doctest::Approx(d[i]).epsilon(1e-12));
}

TEST_CASE("kl objective needs a supported expert") {
    Vec holes = {0.5, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(KlObjective{holes}, ExpertSupportViolation);

    Vec smoothed = smooth_expert(holes, 1e-6);
    CHECK(vec_sum(smoothed) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : smoothed) CHECK(v > 0.0);

    KlObjective f(smoothed);
    CHECK(f.value(smoothed) == doctest::Approx(0.0).epsilon(1e-12));
    Vec d = interior_point(4, 6);
    CHECK(f.value(d) > 0.0);
    check_gradient_fd(f, d);
    Vec back = f.conjugate_grad(f.gradient(d));
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(back[i] == doctest::Approx(d[i]).epsilon(1e-10));
}

TEST_CASE("sup-norm matching exposes the bilinear game form only") {
    Vec expert = interior_point(5, 7);
    LinfAlObjective f(expert);
    Vec d = interior_point(5, 8);
    double direct = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        direct = std::max(direct, std::abs(d[i] - expert[i]));
    CHECK(f.value(d) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(!f.has_gradient());
    CHECK_THROWS_AS(f.gradient(d), UnsupportedOperation);
    CHECK(f.is_bilinear());
    CHECK(*f.anchor() == expert);
    CHECK(f.dual_set().kind == DualSet::Kind::l1_ball);
}

TEST_CASE("conjugate grid estimate is a monotone lower bound") {
    NegEntropyObjective f(3);
    Vec y = {-0.5, 0.2, -1.0};
    double exact = 0.0;
    for (double v : y) exact += std::exp(v - 1.0);
    std::vector<Vec> grid{interior_point(3, 9)};
    double est1 = fenchel_conjugate_check(f, y, grid);
    grid.push_back(interior_point(3, 10));
    grid.push_back(f.conjugate_grad(y));
    double est2 = fenchel_conjugate_check(f, y, grid);
    CHECK(est1 <= est2 + 1e-15);
    CHECK(est2 <= exact + 1e-12);
    CHECK(est2 == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("skill set concat round trip") {
    SkillSet set = random_skill_set(3, 5, 11, false);
    Vec x = set.concat();
    CHECK(x.size() == 15);
    SkillSet back = SkillSet::from_concat(set.prior, x);
    CHECK(back.marginals[2] == set.marginals[2]);
    // A marginal that loses mass fails the check.
    set.marginals[0][0] += 0.2;
    CHECK_THROWS_AS(set.check(), DimensionMismatch);
}

TEST_CASE("skill diversity value forms agree on random skill sets") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        for (bool uniform : {true, false}) {
            SkillSet set = random_skill_set(4, 6, seed, uniform);
            DiaynObjective f(set.prior, 6, false);
            Vec x = set.concat();
            CHECK(std::abs(f.value(x) - f.value_bayes_form(x)) <= 1e-10);
            CHECK(f.value(x) >= -1e-12);  // mutual information is nonnegative
        }
    }
}

TEST_CASE("skill posterior is a distribution over skills at every state") {
    SkillSet set = random_skill_set(3, 4, 13, false);
    DiaynObjective f(set.prior, 4, false);
    Vec post = f.posterior(set.concat());
    for (int s = 0; s < 4; ++s) {
        double total = 0.0;
        for (int z = 0; z < 3; ++z) total += post[z * 4 + s];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("vanishing mixture at a visited state throws") {
    // State 0 carries mass above the floor for skill 1 but the prior-weighted
    // mixture stays below it.
    Vec prior = {0.5, 0.5};
    DiaynObjective f(prior, 2, false);
    Vec x = {0.0, 1.0,       // skill 0 avoids state 0
             1.5e-12, 1.0};  // skill 1 barely visits it
    CHECK_THROWS_AS(f.posterior(x), ZeroMixtureState);
}

TEST_CASE("skill gradient matches finite differences in both directions") {
    SkillSet set = random_skill_set(3, 5, 17, false);
    Vec x = set.concat();
    DiaynObjective convex(set.prior, 5, false);
    check_gradient_fd(convex, x, 1e-7);
    DiaynObjective maximize(set.prior, 5, true);
    CHECK(maximize.value(x) == doctest::Approx(-convex.value(x)).epsilon(1e-12));
    CHECK(!maximize.is_convex());
    Vec g_max = maximize.gradient(x);
    Vec g_con = convex.gradient(x);
    for (std::size_t i = 0; i < g_max.size(); ++i)
        CHECK(g_max[i] == doctest::Approx(-g_con[i]).epsilon(1e-12));
}

TEST_CASE("reward variants differ by the correction and the constant") {
    SkillSet set = random_skill_set(4, 5, 19, false);
    Vec x = set.concat();
    DiaynObjective mi(set.prior, 5, true, DiaynObjective::RewardVariant::mi);
    DiaynObjective gc(set.prior, 5, true, DiaynObjective::RewardVariant::gradient_corrected);
    DiaynObjective gc_nc(set.prior, 5, true,
                         DiaynObjective::RewardVariant::gradient_corrected_no_const);
    Vec r_mi = mi.skill_rewards(x);
    Vec r_gc = gc.skill_rewards(x);
    Vec r_nc = gc_nc.skill_rewards(x);
    Vec post = mi.posterior(x);
    for (std::size_t i = 0; i < r_mi.size(); ++i) {
        CHECK(r_gc[i] == doctest::Approx(r_mi[i] + 1.0 - post[i]).epsilon(1e-12));
        CHECK(r_nc[i] == doctest::Approx(r_gc[i] - 1.0).epsilon(1e-12));
    }
}

TEST_CASE("uniform prior makes the correction a per-state constant") {
    const int Z = 4, S = 6;
    SkillSet set = random_skill_set(Z, S, 23, true);
    Vec x = set.concat();
    DiaynObjective mi(set.prior, S, true, DiaynObjective::RewardVariant::mi);
    DiaynObjective gc(set.prior, S, true, DiaynObjective::RewardVariant::gradient_corrected);
    Vec r_mi = mi.skill_rewards(x);
    Vec r_gc = gc.skill_rewards(x);
    // Prior-weighted over skills, the corrected reward exceeds the plain
    // mutual-information reward by exactly 1 - 1/Z at every state.
    for (int s = 0; s < S; ++s) {
        double diff = 0.0;
        for (int z = 0; z < Z; ++z) diff += set.prior[z] * (r_gc[z * S + s] - r_mi[z * S + s]);
        CHECK(diff == doctest::Approx(1.0 - 1.0 / Z).epsilon(1e-12));
    }
}

TEST_CASE("identical skills carry zero information") {
    Vec prior = {0.25, 0.25, 0.25, 0.25};
    DiaynObjective f(prior, 3, false);
    Vec shared = interior_point(3, 29);
    Vec x;
    for (int z = 0; z < 4; ++z) x.insert(x.end(), shared.begin(), shared.end());
    CHECK(f.value(x) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("smooth_expert validates eps") {
    CHECK_THROWS_AS(smooth_expert(Vec{0.5, 0.5}, 1.5), DimensionMismatch);
    CHECK_THROWS_AS(smooth_expert(Vec{}, 0.1), DimensionMismatch);
}
