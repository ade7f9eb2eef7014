#include <cmath>

#include "cvxmdp/policy_players.hpp"
#include "doctest.h"

using namespace cvxmdp;

namespace {

Vec seeded_reward(int n, std::uint64_t seed) {
    auto rng = make_rng(seed, 3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vec r(n);
    for (double& v : r) v = unit(rng);
    return r;
}

// Exact maximum of reward.d over deterministic policies, by enumeration.
double brute_force_best(const TabularMdp& mdp, const Vec& reward) {
    const int S = mdp.num_states, A = mdp.num_actions;
    std::vector<int> actions(S, 0);
    double best = -1e300;
    long long total = 1;
    for (int s = 0; s < S; ++s) total *= A;
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        for (int s = 0; s < S; ++s) {
            actions[s] = static_cast<int>(c % A);
            c /= A;
        }
        Policy pi = Policy::deterministic(S, A, actions);
        try {
            best = std::max(best, dot(reward, occupancy_of_policy(mdp, pi).values));
        } catch (const AverageModeNotUnichain&) {
        }
    }
    return best;
}

}  // namespace

TEST_CASE("tolerance schedules decay as configured") {
    PolicyPlayerConfig c;
    c.tol_c = 0.1;
    c.tol_schedule = TolSchedule::constant;
    CHECK(scheduled_tol(c, 100) == doctest::Approx(0.1));
    c.tol_schedule = TolSchedule::inv_k;
    CHECK(scheduled_tol(c, 4) == doctest::Approx(0.025));
    c.tol_schedule = TolSchedule::inv_sqrt_k;
    CHECK(scheduled_tol(c, 4) == doctest::Approx(0.05));
    // Floors at 1e-10 no matter how late the iteration.
    c.tol_schedule = TolSchedule::inv_k;
    CHECK(scheduled_tol(c, 2000000000) == doctest::Approx(1e-10));
}

TEST_CASE("best response matches brute-force enumeration") {
    SUBCASE("discounted random MDPs") {
        for (std::uint64_t seed : {51u, 52u, 53u}) {
            TabularMdp m = make_random_mdp(4, 3, 3, seed, Mode::discounted, 0.9);
            Vec reward = seeded_reward(m.dim(), seed + 1);
            PolicyPlayerConfig c;
            c.tol_c = 1e-10;
            BestResponsePlayer player(m, c);
            PolicyResponse res = player.respond(reward, 1);
            CHECK(res.j_value == doctest::Approx(brute_force_best(m, reward)).epsilon(1e-8));
            CHECK(validate_occupancy(m, res.occupancy.values).empty());
        }
    }
    SUBCASE("average-mode gridworld") {
        TabularMdp m = make_gridworld(3, 2, 0.2, Mode::average);
        Vec reward = seeded_reward(m.dim(), 60);
        PolicyPlayerConfig c;
        c.tol_c = 1e-10;
        BestResponsePlayer player(m, c);
        PolicyResponse res = player.respond(reward, 1);
        CHECK(res.j_value == doctest::Approx(brute_force_best(m, reward)).epsilon(1e-8));
    }
}

TEST_CASE("best response rejects misshapen rewards") {
    TabularMdp m = make_symmetric_two_state();
    BestResponsePlayer player(m, PolicyPlayerConfig{});
    CHECK_THROWS_AS(player.respond(Vec{1.0, 2.0}, 1), DimensionMismatch);
}

TEST_CASE("q-learning solves a bandit and reports its budget") {
    // Single state, two arms, deterministic rewards 0.9 vs 0.1.
    TabularMdp m;
    m.num_states = 1;
    m.num_actions = 2;
    m.mode = Mode::average;
    m.transition = {1.0, 1.0};
    m.initial_dist = {1.0};
    m.check();
    Vec reward = {0.9, 0.1};

    int correct = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PolicyPlayerConfig c;
        c.kind = PolicyPlayerKind::q_learning;
        c.q_budget = 2000;
        c.tol_c = 0.05;
        c.seed = seed;
        QLearningPlayer player(m, c);
        PolicyResponse res = player.respond(reward, 1);
        CHECK(res.samples == 2000);
        correct += res.j_value == doctest::Approx(0.9);
    }
    CHECK(correct >= 18);
}

TEST_CASE("q-learning budget grows with the tolerance schedule") {
    TabularMdp m = make_symmetric_two_state();
    PolicyPlayerConfig c;
    c.kind = PolicyPlayerKind::q_learning;
    c.q_budget = 500;
    c.tol_c = 0.1;
    c.tol_schedule = TolSchedule::inv_k;
    c.seed = 3;
    QLearningPlayer player(m, c);
    CHECK(player.respond(seeded_reward(4, 71), 1).samples == 500);
    CHECK(player.respond(seeded_reward(4, 72), 4).samples == 500 * 16);
}

TEST_CASE("q-learning finds the good two-state policy on most seeds") {
    TabularMdp m = make_symmetric_two_state(0.9, Mode::average);
    Vec reward = {0.0, 0.0, 1.0, 0.0};  // optimal stationary value 0.9
    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        PolicyPlayerConfig c;
        c.kind = PolicyPlayerKind::q_learning;
        c.q_budget = 20000;
        c.tol_c = 0.05;
        c.seed = seed;
        QLearningPlayer player(m, c);
        PolicyResponse res = player.respond(reward, 1);
        good += res.j_value >= 0.9 - 0.05;
    }
    CHECK(good >= 9);
}

TEST_CASE("confidence radii shrink with observations") {
    ConfidenceSet conf(2, 2, 0.05);
    double fresh = conf.beta(0, 0);
    CHECK(fresh == doctest::Approx(2.0));  // capped before any data
    for (int i = 0; i < 500; ++i) conf.observe(0, 0, i % 2);
    CHECK(conf.beta(0, 0) < 1.0);
    CHECK(conf.beta(0, 1) == doctest::Approx(2.0));  // still unvisited
    Vec rows = conf.empirical_rows();
    CHECK(rows[0] == doctest::Approx(0.5));       // visited: empirical
    CHECK(rows[2 * 2 + 0] == doctest::Approx(0.5));  // unvisited: uniform prior shape
    CHECK_THROWS_AS(ConfidenceSet(2, 2, 1.5), DimensionMismatch);
}

TEST_CASE("extended value iteration is optimistic about the gain") {
    TabularMdp m = make_symmetric_two_state(0.9, Mode::average);
    Vec reward = {0.0, 0.0, 1.0, 0.0};
    ConfidenceSet conf(2, 2, 0.05);
    // Feed exact empirical frequencies for every pair.
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) {
            const double* p = m.row(s, a);
            for (int rep = 0; rep < 1000; ++rep) {
                double u = (rep + 0.5) / 1000.0, acc = 0.0;
                for (int t = 0; t < 2; ++t) {
                    acc += p[t];
                    if (u <= acc) {
                        conf.observe(s, a, t);
                        break;
                    }
                }
            }
        }
    EviResult evi = extended_value_iteration(conf, reward, 500);
    // True optimal gain is 0.9; optimism must not undershoot it.
    CHECK(evi.optimistic_gain >= 0.9 - 1e-6);
    CHECK(evi.optimistic_gain <= 1.0 + 1e-9);
    CHECK(evi.iters <= 500);
    CHECK_THROWS_AS(extended_value_iteration(conf, reward, 0), IterationBudgetZero);

    // The reported optimistic rows are valid distributions inside the balls.
    for (int sa = 0; sa < 4; ++sa) {
        double mass = 0.0, l1 = 0.0;
        for (int t = 0; t < 2; ++t) {
            double q = evi.optimistic_rows[sa * 2 + t];
            CHECK(q >= -1e-15);
            mass += q;
            l1 += std::abs(q - conf.empirical_rows()[sa * 2 + t]);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(l1 <= conf.beta(sa / 2, sa % 2) + 1e-12);
    }
}

TEST_CASE("ucrl2 regret decays on a fixed-reward two-state task") {
    TabularMdp m = make_symmetric_two_state(0.9, Mode::average);
    Vec reward = {0.0, 0.0, 1.0, 0.0};
    PolicyPlayerConfig c;
    c.kind = PolicyPlayerKind::ucrl2;
    c.evi_budget = 40;
    c.seed = 5;
    Ucrl2Player player(m, c);

    const double j_star = 0.9;
    double shortfall_early = 0.0, shortfall_late = 0.0;
    const int K = 1200;
    for (int k = 1; k <= K; ++k) {
        PolicyResponse res = player.respond(reward, k);
        CHECK(res.samples == 1);
        double shortfall = j_star - res.j_value;
        if (k <= 100) shortfall_early += shortfall / 100.0;
        if (k > K - 400) shortfall_late += shortfall / 400.0;
    }
    CHECK(shortfall_late <= shortfall_early + 1e-9);
    CHECK(shortfall_late <= 0.05);
}

TEST_CASE("ucrl2 refuses discounted mode") {
    TabularMdp m = make_symmetric_two_state(0.9, Mode::discounted);
    PolicyPlayerConfig c;
    c.kind = PolicyPlayerKind::ucrl2;
    CHECK_THROWS_AS(Ucrl2Player(m, c), UnsupportedOperation);
}

TEST_CASE("player factory and regret helper") {
    TabularMdp m = make_symmetric_two_state();
    PolicyPlayerConfig c;
    c.kind = PolicyPlayerKind::best_response;
    CHECK(make_policy_player(m, c) != nullptr);
    CHECK(policy_player_regret({1.0, 1.0}, {0.5, 1.0}) == doctest::Approx(0.25));
    CHECK_THROWS_AS(policy_player_regret({1.0}, {}), DimensionMismatch);
}
