#include "cvxmdp/cost_players.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cvxmdp {

Vec project_box(Vec y, double radius) {
    if (radius < 0.0) throw DimensionMismatch("project_box: negative radius");
    for (double& v : y) v = std::clamp(v, -radius, radius);
    return y;
}

Vec project_simplex(Vec y) {
    const std::size_t n = y.size();
    if (n == 0) throw DimensionMismatch("project_simplex: empty input");
    Vec u = y;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        cum += u[j];
        double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    for (double& v : y) v = std::max(0.0, v - theta);
    return y;
}

Vec mw_update(const Vec& weights, const Vec& payoffs, double alpha) {
    if (weights.size() != payoffs.size()) throw DimensionMismatch("mw_update: size mismatch");
    // Shift payoffs for overflow safety; the shift cancels in normalization.
    double hi = -std::numeric_limits<double>::infinity();
    for (double p : payoffs) hi = std::max(hi, alpha * p);
    Vec w(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        w[i] = weights[i] * std::exp(alpha * payoffs[i] - hi);
        total += w[i];
    }
    if (total <= 0.0) throw BregmanDomainError("mw_update: all weights vanished");
    for (double& v : w) v /= total;
    return w;
}

namespace {

Vec uniform_mass_vector(int n) { return Vec(static_cast<std::size_t>(n), 1.0 / n); }

double step_size(const CostPlayerConfig& config, double default_c, int t) {
    double c = config.lr_c > 0.0 ? config.lr_c : default_c;
    return c / std::pow(static_cast<double>(t), config.lr_exp);
}

}  // namespace

FtlCostPlayer::FtlCostPlayer(const ConvexObjective& objective) : objective_(objective) {
    if (!objective.has_gradient())
        throw UnsupportedOperation("ftl: objective exposes no gradient; use the mw player");
}

CostVector FtlCostPlayer::next(int k, const Vec*, const Vec* dbar_prev) {
    Vec at = (k <= 1 || !dbar_prev) ? uniform_mass_vector(objective_.dim()) : *dbar_prev;
    CostVector out{objective_.gradient(at), objective_.grad_bound()};
    // Guard against floating drift past the certified bound.
    out.values = project_box(std::move(out.values), out.bound);
    return out;
}

OgdCostPlayer::OgdCostPlayer(const ConvexObjective& objective, CostPlayerConfig config)
    : objective_(objective), config_(config), set_(objective.dual_set()) {
    if (set_.kind == DualSet::Kind::l1_ball)
        throw BregmanDomainError("ogd: L1-ball dual set takes the entropy Bregman (mw player)");
    if (set_.kind == DualSet::Kind::box && !objective.is_bilinear() &&
        !objective.has_conjugate_grad())
        throw UnsupportedOperation("ogd: objective has no conjugate gradient");
}

CostVector OgdCostPlayer::next(int k, const Vec* d_prev, const Vec*) {
    if (set_.kind == DualSet::Kind::singleton)
        return CostVector{set_.point, sup_norm(set_.point)};
    if (!initialized_) {
        // Warm start at the gradient of the uniform mass vector keeps the
        // iterate in the region where conjugate gradients are tame; bilinear
        // games start at zero.
        lambda_ = objective_.has_gradient()
                      ? project_box(objective_.gradient(uniform_mass_vector(objective_.dim())),
                                    set_.radius)
                      : Vec(static_cast<std::size_t>(objective_.dim()), 0.0);
        initialized_ = true;
    }
    if (k > 1 && d_prev) {
        Vec grad(objective_.dim());
        if (objective_.is_bilinear()) {
            const Vec& anchor = *objective_.anchor();
            for (int i = 0; i < objective_.dim(); ++i) grad[i] = (*d_prev)[i] - anchor[i];
        } else {
            Vec cg = objective_.conjugate_grad(lambda_);
            for (int i = 0; i < objective_.dim(); ++i) grad[i] = (*d_prev)[i] - cg[i];
        }
        double default_c = set_.radius * std::sqrt(1.0 / objective_.dim());
        double alpha = step_size(config_, default_c, k - 1);
        for (int i = 0; i < objective_.dim(); ++i) lambda_[i] += alpha * grad[i];
        lambda_ = project_box(std::move(lambda_), set_.radius);
    }
    return CostVector{lambda_, set_.radius};
}

MwCostPlayer::MwCostPlayer(const ConvexObjective& objective, CostPlayerConfig config)
    : objective_(objective), config_(config) {
    DualSet set = objective.dual_set();
    if (set.kind != DualSet::Kind::l1_ball)
        throw BregmanDomainError("mw: entropy Bregman needs an L1-ball dual set");
    if (!objective.is_bilinear())
        throw UnsupportedOperation("mw: supported for bilinear game objectives only");
    radius_ = set.radius;
    weights_.assign(static_cast<std::size_t>(2 * objective.dim()), 1.0 / (2.0 * objective.dim()));
}

CostVector MwCostPlayer::next(int k, const Vec* d_prev, const Vec*) {
    const int n = objective_.dim();
    if (k > 1 && d_prev) {
        const Vec& anchor = *objective_.anchor();
        Vec payoffs(static_cast<std::size_t>(2 * n));
        for (int i = 0; i < n; ++i) {
            double g = (*d_prev)[i] - anchor[i];
            payoffs[2 * i] = radius_ * g;
            payoffs[2 * i + 1] = -radius_ * g;
        }
        double default_c = std::sqrt(std::log(2.0 * n));
        double alpha = step_size(config_, default_c, k - 1);
        weights_ = mw_update(weights_, payoffs, alpha);
    }
    Vec lambda(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lambda[i] = radius_ * (weights_[2 * i] - weights_[2 * i + 1]);
    return CostVector{std::move(lambda), radius_};
}

std::unique_ptr<CostPlayer> make_cost_player(const ConvexObjective& objective,
                                             const CostPlayerConfig& config) {
    switch (config.kind) {
        case CostPlayerKind::ftl:
            return std::make_unique<FtlCostPlayer>(objective);
        case CostPlayerKind::ogd:
            return std::make_unique<OgdCostPlayer>(objective, config);
        case CostPlayerKind::mw:
            return std::make_unique<MwCostPlayer>(objective, config);
    }
    throw UnsupportedOperation("make_cost_player: unknown kind");
}

double cost_player_regret(const std::vector<Vec>& lambdas, const std::vector<Vec>& ds,
                          const ConvexObjective& objective, std::vector<Vec> comparators,
                          const std::vector<Vec>& conj_grid) {
    if (lambdas.empty() || lambdas.size() != ds.size())
        throw DimensionMismatch("cost_player_regret: trace size mismatch");
    const std::size_t K = lambdas.size();

    auto conj = [&](const Vec& y) {
        if (objective.is_bilinear()) return dot(y, *objective.anchor());
        return fenchel_conjugate_check(objective, y, conj_grid);
    };

    Vec dbar(ds[0].size(), 0.0);
    for (const Vec& d : ds)
        for (std::size_t i = 0; i < dbar.size(); ++i) dbar[i] += d[i];
    for (double& v : dbar) v /= static_cast<double>(K);
    if (objective.has_gradient())
        comparators.push_back(project_box(objective.gradient(dbar), objective.grad_bound()));
    if (comparators.empty()) throw DimensionMismatch("cost_player_regret: no comparators");

    double played = 0.0;
    for (std::size_t k = 0; k < K; ++k) played += conj(lambdas[k]) - dot(lambdas[k], ds[k]);

    double best = std::numeric_limits<double>::infinity();
    for (const Vec& c : comparators) {
        double acc = static_cast<double>(K) * conj(c);
        for (std::size_t k = 0; k < K; ++k) acc -= dot(c, ds[k]);
        best = std::min(best, acc);
    }
    return (played - best) / static_cast<double>(K);
}

}  // namespace cvxmdp
