#include "cvxmdp/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvxmdp {

Vec smooth_expert(const Vec& d_expert, double eps) {
    if (d_expert.empty()) throw DimensionMismatch("smooth_expert: empty expert");
    if (eps < 0.0 || eps >= 1.0) throw DimensionMismatch("smooth_expert: eps outside [0,1)");
    const double mass = vec_sum(d_expert);
    const double unif = mass / static_cast<double>(d_expert.size());
    Vec out(d_expert.size());
    for (std::size_t i = 0; i < d_expert.size(); ++i)
        out[i] = (1.0 - eps) * d_expert[i] + eps * unif;
    return out;
}

LinearObjective::LinearObjective(Vec lambda0) : lambda0_(std::move(lambda0)) {
    if (lambda0_.empty()) throw DimensionMismatch("linear: empty cost vector");
    bound_ = sup_norm(lambda0_);
}

double LinearObjective::value(const Vec& d) const { return dot(lambda0_, d); }

double NegEntropyObjective::value(const Vec& d) const {
    if (d.size() != static_cast<std::size_t>(dim_))
        throw DimensionMismatch("neg_entropy: size mismatch");
    double acc = 0.0;
    for (double v : d)
        if (v > 0.0) acc += v * std::log(v);
    return acc;
}

Vec NegEntropyObjective::gradient(const Vec& d) const {
    if (d.size() != static_cast<std::size_t>(dim_))
        throw DimensionMismatch("neg_entropy: size mismatch");
    Vec g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) g[i] = 1.0 + std::log(std::max(d[i], kFloor));
    return g;
}

Vec NegEntropyObjective::conjugate_grad(const Vec& y) const {
    Vec g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = std::exp(y[i] - 1.0);
    return g;
}

L2AlObjective::L2AlObjective(Vec expert) : expert_(std::move(expert)) {
    if (expert_.empty()) throw DimensionMismatch("l2_al: empty expert");
}

double L2AlObjective::value(const Vec& d) const {
    if (d.size() != expert_.size()) throw DimensionMismatch("l2_al: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double r = d[i] - expert_[i];
        acc += r * r;
    }
    return acc;
}

Vec L2AlObjective::gradient(const Vec& d) const {
    if (d.size() != expert_.size()) throw DimensionMismatch("l2_al: size mismatch");
    Vec g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) g[i] = 2.0 * (d[i] - expert_[i]);
    return g;
}

Vec L2AlObjective::conjugate_grad(const Vec& y) const {
    Vec g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = expert_[i] + 0.5 * y[i];
    return g;
}

KlObjective::KlObjective(Vec expert) : expert_(std::move(expert)) {
    if (expert_.empty()) throw DimensionMismatch("kl: empty expert");
    double lo = expert_[0];
    for (double v : expert_) lo = std::min(lo, v);
    if (lo <= 0.0)
        throw ExpertSupportViolation("kl: expert has zero-mass entries; smooth_expert first");
    bound_ = 0.0;
    for (double v : expert_) {
        double log_e = std::log(v);
        bound_ = std::max(bound_, std::abs(1.0 + std::log(kFloor) - log_e));
        bound_ = std::max(bound_, std::abs(1.0 - log_e));
    }
}

double KlObjective::value(const Vec& d) const {
    if (d.size() != expert_.size()) throw DimensionMismatch("kl: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.0) acc += d[i] * (std::log(d[i]) - std::log(expert_[i]));
    return acc;
}

Vec KlObjective::gradient(const Vec& d) const {
    if (d.size() != expert_.size()) throw DimensionMismatch("kl: size mismatch");
    Vec g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        g[i] = 1.0 + std::log(std::max(d[i], kFloor)) - std::log(expert_[i]);
    return g;
}

Vec KlObjective::conjugate_grad(const Vec& y) const {
    Vec g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = expert_[i] * std::exp(y[i] - 1.0);
    return g;
}

LinfAlObjective::LinfAlObjective(Vec expert) : expert_(std::move(expert)) {
    if (expert_.empty()) throw DimensionMismatch("linf_al: empty expert");
}

double LinfAlObjective::value(const Vec& d) const {
    if (d.size() != expert_.size()) throw DimensionMismatch("linf_al: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) m = std::max(m, std::abs(d[i] - expert_[i]));
    return m;
}

void SkillSet::check(double tol) const {
    if (prior.empty() || marginals.size() != prior.size())
        throw DimensionMismatch("SkillSet: prior/marginal count mismatch");
    double mass = 0.0;
    for (double p : prior) {
        if (p < -tol) throw DimensionMismatch("SkillSet: negative prior entry");
        mass += p;
    }
    if (std::abs(mass - 1.0) > tol) throw DimensionMismatch("SkillSet: prior does not sum to 1");
    const std::size_t S = marginals[0].size();
    for (const Vec& m : marginals) {
        if (m.size() != S) throw DimensionMismatch("SkillSet: ragged marginals");
        double mm = 0.0;
        for (double v : m) {
            if (v < -tol) throw DimensionMismatch("SkillSet: negative marginal entry");
            mm += v;
        }
        if (std::abs(mm - 1.0) > tol)
            throw DimensionMismatch("SkillSet: marginal does not sum to 1");
    }
}

Vec SkillSet::concat() const {
    Vec x;
    x.reserve(static_cast<std::size_t>(num_skills()) * num_states());
    for (const Vec& m : marginals) x.insert(x.end(), m.begin(), m.end());
    return x;
}

SkillSet SkillSet::from_concat(const Vec& prior, const Vec& x) {
    SkillSet set;
    set.prior = prior;
    const int Z = static_cast<int>(prior.size());
    if (Z == 0 || x.size() % Z != 0)
        throw DimensionMismatch("SkillSet::from_concat: size not divisible by skill count");
    const std::size_t S = x.size() / Z;
    set.marginals.resize(Z);
    for (int z = 0; z < Z; ++z)
        set.marginals[z] = Vec(x.begin() + z * S, x.begin() + (z + 1) * S);
    return set;
}

DiaynObjective::DiaynObjective(Vec prior, int num_states, bool maximize, RewardVariant variant)
    : prior_(std::move(prior)), num_states_(num_states), maximize_(maximize), variant_(variant) {
    if (prior_.empty() || num_states_ <= 0) throw DimensionMismatch("diayn: empty prior or states");
    double mass = 0.0, lo = prior_[0];
    for (double p : prior_) {
        if (p <= 0.0) throw DimensionMismatch("diayn: prior entries must be positive");
        mass += p;
        lo = std::min(lo, p);
    }
    if (std::abs(mass - 1.0) > 1e-9) throw DimensionMismatch("diayn: prior does not sum to 1");
    // |log p(z|s) - log p(z)| + |correction|, with posteriors floored.
    bound_ = -std::log(kFloor) - std::log(lo) + 2.0;
}

namespace {

// Mixture marginal m(s) = sum_z p(z) d^z(s).
Vec mixture_marginal(const Vec& prior, const Vec& x, int S) {
    const int Z = static_cast<int>(prior.size());
    Vec m(S, 0.0);
    for (int z = 0; z < Z; ++z)
        for (int s = 0; s < S; ++s) m[s] += prior[z] * x[static_cast<std::size_t>(z) * S + s];
    return m;
}

}  // namespace

Vec DiaynObjective::posterior(const Vec& x) const {
    const int Z = num_skills(), S = num_states_;
    if (x.size() != static_cast<std::size_t>(Z) * S)
        throw DimensionMismatch("diayn: concat size mismatch");
    Vec m = mixture_marginal(prior_, x, S);
    Vec post(static_cast<std::size_t>(Z) * S);
    for (int s = 0; s < S; ++s) {
        if (m[s] <= kFloor) {
            for (int z = 0; z < Z; ++z) {
                if (x[static_cast<std::size_t>(z) * S + s] > kFloor)
                    throw ZeroMixtureState("diayn: mixture marginal vanishes at a visited state");
                post[static_cast<std::size_t>(z) * S + s] = prior_[z];
            }
        } else {
            for (int z = 0; z < Z; ++z)
                post[static_cast<std::size_t>(z) * S + s] =
                    x[static_cast<std::size_t>(z) * S + s] * prior_[z] / m[s];
        }
    }
    return post;
}

double DiaynObjective::value(const Vec& x) const {
    const int Z = num_skills(), S = num_states_;
    if (x.size() != static_cast<std::size_t>(Z) * S)
        throw DimensionMismatch("diayn: concat size mismatch");
    Vec m = mixture_marginal(prior_, x, S);
    double acc = 0.0;
    for (int z = 0; z < Z; ++z)
        for (int s = 0; s < S; ++s) {
            double dz = x[static_cast<std::size_t>(z) * S + s];
            if (dz > 0.0 && m[s] > 0.0) acc += prior_[z] * dz * (std::log(dz) - std::log(m[s]));
        }
    return maximize_ ? -acc : acc;
}

double DiaynObjective::value_bayes_form(const Vec& x) const {
    const int Z = num_skills(), S = num_states_;
    Vec post = posterior(x);
    double acc = 0.0;
    for (int z = 0; z < Z; ++z)
        for (int s = 0; s < S; ++s) {
            double dz = x[static_cast<std::size_t>(z) * S + s];
            if (dz > 0.0)
                acc += prior_[z] * dz *
                       (std::log(std::max(post[static_cast<std::size_t>(z) * S + s], kFloor)) -
                        std::log(prior_[z]));
        }
    return maximize_ ? -acc : acc;
}

Vec DiaynObjective::gradient(const Vec& x) const {
    const int Z = num_skills(), S = num_states_;
    if (x.size() != static_cast<std::size_t>(Z) * S)
        throw DimensionMismatch("diayn: concat size mismatch");
    Vec m = mixture_marginal(prior_, x, S);
    Vec g(static_cast<std::size_t>(Z) * S);
    for (int z = 0; z < Z; ++z)
        for (int s = 0; s < S; ++s) {
            double dz = std::max(x[static_cast<std::size_t>(z) * S + s], kFloor);
            double mm = std::max(m[s], kFloor);
            double v = prior_[z] * (std::log(dz) - std::log(mm));
            g[static_cast<std::size_t>(z) * S + s] = maximize_ ? -v : v;
        }
    return g;
}

Vec DiaynObjective::skill_rewards(const Vec& x) const {
    const int Z = num_skills(), S = num_states_;
    Vec post = posterior(x);
    Vec r(static_cast<std::size_t>(Z) * S);
    for (int z = 0; z < Z; ++z)
        for (int s = 0; s < S; ++s) {
            double pzs = std::max(post[static_cast<std::size_t>(z) * S + s], kFloor);
            double val = std::log(pzs) - std::log(prior_[z]);
            if (variant_ != RewardVariant::mi) {
                val += 1.0 - post[static_cast<std::size_t>(z) * S + s];
                if (variant_ == RewardVariant::gradient_corrected_no_const) val -= 1.0;
            }
            r[static_cast<std::size_t>(z) * S + s] = val;
        }
    return r;
}

double fenchel_conjugate_check(const ConvexObjective& objective, const Vec& y,
                               const std::vector<Vec>& grid) {
    if (grid.empty()) throw DimensionMismatch("fenchel_conjugate_check: empty grid");
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& d : grid) best = std::max(best, dot(y, d) - objective.value(d));
    return best;
}

}  // namespace cvxmdp
