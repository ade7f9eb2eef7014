#pragma once

// Internal helpers shared by the game-loop translation units. Frank-Wolfe
// under the average step rule must reproduce the meta-game iterates bit for
// bit, so both sides route through these exact expressions.

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvxmdp/mdp.hpp"
#include "cvxmdp/objectives.hpp"

namespace cvxmdp::detail {

inline double norm_scale(const ConvexObjective& objective) {
    double b = objective.grad_bound();
    return b > 1e-12 ? b : 1.0;
}

// max over candidates of lambda.d - f(d); exact for bilinear objectives and,
// via the stationary point grad f*(lambda), for objectives with a closed-form
// conjugate gradient. The grid keeps the estimate a supremum lower bound for
// everything else.
inline double conjugate_estimate(const ConvexObjective& objective, const Vec& lambda,
                                 const std::vector<Vec>& grid, const Vec* extra) {
    if (objective.is_bilinear()) return dot(lambda, *objective.anchor());
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& d : grid) best = std::max(best, dot(lambda, d) - objective.value(d));
    if (extra != nullptr) best = std::max(best, dot(lambda, *extra) - objective.value(*extra));
    if (objective.has_conjugate_grad()) {
        Vec d_star = objective.conjugate_grad(lambda);
        best = std::max(best, dot(lambda, d_star) - objective.value(d_star));
    }
    return best;
}

inline Vec mean_of(const Vec& sum, int count) {
    Vec out(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) out[i] = sum[i] / count;
    return out;
}

inline void reservoir_push(std::vector<Vec>& grid, const Vec& d, int k, int cap) {
    if (static_cast<int>(grid.size()) < cap) {
        grid.push_back(d);
    } else if (cap > 0) {
        grid[static_cast<std::size_t>((k - 1) % cap)] = d;
    }
}

inline Vec negate_scaled(const Vec& lambda, double scale) {
    Vec r(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) r[i] = -lambda[i] / scale;
    return r;
}

inline double max_violation(const TabularMdp& mdp, const Vec& d) {
    double worst = 0.0;
    for (const OccupancyViolation& v : validate_occupancy(mdp, d))
        worst = std::max(worst, std::abs(v.residual));
    return worst;
}

}  // namespace cvxmdp::detail
