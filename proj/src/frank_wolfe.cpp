#include <algorithm>
#include <cmath>
#include <limits>

#include "cvxmdp/game.hpp"
#include "game_util.hpp"

namespace cvxmdp {

using detail::mean_of;
using detail::negate_scaled;
using detail::norm_scale;

namespace {

Vec hull_point(const std::vector<Vec>& vertices, const Vec& weights) {
    Vec d(vertices[0].size(), 0.0);
    for (std::size_t j = 0; j < vertices.size(); ++j)
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += weights[j] * vertices[j][i];
    return d;
}

// Gradient of w -> f(sum_j w_j v_j) on the simplex.
Vec weight_gradient(const ConvexObjective& objective, const std::vector<Vec>& vertices,
                    const Vec& weights) {
    Vec grad_d = objective.gradient(hull_point(vertices, weights));
    Vec g(vertices.size());
    for (std::size_t j = 0; j < vertices.size(); ++j) g[j] = dot(vertices[j], grad_d);
    return g;
}

double secant_lipschitz(const ConvexObjective& objective, const std::vector<Vec>& vertices,
                        const Vec& w) {
    const std::size_t m = vertices.size();
    std::vector<Vec> probes;
    probes.push_back(Vec(m, 1.0 / static_cast<double>(m)));
    Vec corner(m, 0.0);
    corner[0] = 1.0;
    probes.push_back(corner);
    corner.assign(m, 0.0);
    corner[m - 1] = 1.0;
    probes.push_back(corner);

    Vec gw = weight_gradient(objective, vertices, w);
    double lips = 0.0;
    for (const Vec& p : probes) {
        double dist2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) dist2 += (p[j] - w[j]) * (p[j] - w[j]);
        if (dist2 < 1e-24) continue;
        Vec gp = weight_gradient(objective, vertices, p);
        double diff2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) diff2 += (gp[j] - gw[j]) * (gp[j] - gw[j]);
        lips = std::max(lips, std::sqrt(diff2 / dist2));
    }
    return std::max(2.0 * lips, 1e-6);
}

}  // namespace

FwTrace run_frank_wolfe(const TabularMdp& mdp, const ConvexObjective& objective, int iterations,
                        FwStepRule rule, double br_tol) {
    if (iterations <= 0) throw IterationBudgetZero("frank-wolfe iterations");
    mdp.check();
    const int n = mdp.dim();
    if (objective.dim() != n) throw DimensionMismatch("objective dim vs mdp dim");

    FtlCostPlayer cost(objective);
    PolicyPlayerConfig br_config;
    br_config.kind = PolicyPlayerKind::best_response;
    br_config.tol_c = br_tol;
    BestResponsePlayer br(mdp, br_config);
    const double scale = norm_scale(objective);

    FwTrace trace;
    trace.vertices.reserve(iterations);
    trace.averages.reserve(iterations);
    trace.f_curve.reserve(iterations);

    Vec dsum(n, 0.0);
    Vec dbar;
    for (int k = 1; k <= iterations; ++k) {
        const Vec* dbar_prev = k > 1 ? &dbar : nullptr;
        CostVector lambda = cost.next(k, nullptr, dbar_prev);
        PolicyResponse resp = br.respond(negate_scaled(lambda.values, scale), k);
        const Vec& vertex = resp.occupancy.values;

        if (rule == FwStepRule::average) {
            // Identical arithmetic to the meta-game running mean so the two
            // solvers agree bitwise under matching tolerances.
            for (int i = 0; i < n; ++i) dsum[i] += vertex[i];
            dbar = mean_of(dsum, k);
        } else if (k == 1) {
            dbar = vertex;
        } else {
            double alpha = 2.0 / (k + 1);
            for (int i = 0; i < n; ++i) dbar[i] = (1.0 - alpha) * dbar[i] + alpha * vertex[i];
        }

        trace.vertices.push_back(vertex);
        trace.averages.push_back(dbar);
        trace.f_curve.push_back(objective.value(dbar));
    }
    trace.final_point = dbar;
    return trace;
}

FwTrace run_fully_corrective_fw(const TabularMdp& mdp, const ConvexObjective& objective,
                                int iterations, int inner_iters, double br_tol) {
    if (iterations <= 0) throw IterationBudgetZero("frank-wolfe iterations");
    mdp.check();
    const int n = mdp.dim();
    if (objective.dim() != n) throw DimensionMismatch("objective dim vs mdp dim");

    FtlCostPlayer cost(objective);
    PolicyPlayerConfig br_config;
    br_config.kind = PolicyPlayerKind::best_response;
    br_config.tol_c = br_tol;
    BestResponsePlayer br(mdp, br_config);
    const double scale = norm_scale(objective);

    FwTrace trace;
    std::vector<Vec> vertices;
    Vec weights;
    Vec d_cur;

    for (int k = 1; k <= iterations; ++k) {
        const Vec* at = k > 1 ? &d_cur : nullptr;
        CostVector lambda = cost.next(k, nullptr, at);
        PolicyResponse resp = br.respond(negate_scaled(lambda.values, scale), k);
        vertices.push_back(resp.occupancy.values);
        weights.push_back(0.0);

        if (k == 1) {
            weights[0] = 1.0;
            d_cur = vertices[0];
        } else {
            // Correction step: projected gradient descent over the simplex
            // weights, then keep the best of the descent iterates, the plain
            // conditional-gradient step, and standing still.
            Vec best_w = weights;
            best_w[best_w.size() - 1] = 2.0 / (k + 1);
            double shrink = 1.0 - 2.0 / (k + 1);
            for (std::size_t j = 0; j + 1 < best_w.size(); ++j) best_w[j] = shrink * weights[j];
            double best_f = objective.value(hull_point(vertices, best_w));
            if (double standing = objective.value(hull_point(vertices, weights));
                standing < best_f) {
                best_f = standing;
                best_w = weights;
            }

            double lips = secant_lipschitz(objective, vertices, best_w);
            Vec w = best_w;
            for (int it = 0; it < inner_iters; ++it) {
                Vec g = weight_gradient(objective, vertices, w);
                for (std::size_t j = 0; j < w.size(); ++j) w[j] -= g[j] / lips;
                w = project_simplex(std::move(w));
                double f = objective.value(hull_point(vertices, w));
                if (f < best_f) {
                    best_f = f;
                    best_w = w;
                }
            }
            weights = best_w;
            d_cur = hull_point(vertices, weights);
        }

        trace.vertices.push_back(vertices.back());
        trace.averages.push_back(d_cur);
        trace.f_curve.push_back(objective.value(d_cur));
    }
    trace.final_point = d_cur;
    return trace;
}

}  // namespace cvxmdp
