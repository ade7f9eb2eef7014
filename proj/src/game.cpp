#include "cvxmdp/game.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "game_util.hpp"

namespace cvxmdp {

using detail::conjugate_estimate;
using detail::max_violation;
using detail::mean_of;
using detail::negate_scaled;
using detail::norm_scale;
using detail::reservoir_push;

double lagrangian_value(const Vec& d, const Vec& lambda, const ConvexObjective& objective,
                        const std::vector<Vec>& conj_grid) {
    return dot(lambda, d) - conjugate_estimate(objective, lambda, conj_grid, nullptr);
}

std::pair<double, double> duality_gap(const TabularMdp& mdp, const ConvexObjective& objective,
                                      const Vec& dbar, const Vec& lambdabar,
                                      std::vector<Vec> conj_grid, double oracle_tol) {
    PolicyPlayerConfig oracle;
    oracle.kind = PolicyPlayerKind::best_response;
    oracle.tol_c = oracle_tol;
    BestResponsePlayer player(mdp, oracle);
    double scale = norm_scale(objective);
    PolicyResponse br = player.respond(negate_scaled(lambdabar, scale), 1);
    double conj = conjugate_estimate(objective, lambdabar, conj_grid, &dbar);
    double lower = dot(lambdabar, br.occupancy.values) - conj;
    return {lower, objective.value(dbar)};
}

GameTrace run_game(const TabularMdp& mdp, const ConvexObjective& objective,
                   const CostPlayerConfig& cost_config, const PolicyPlayerConfig& policy_config,
                   const GameConfig& game_config) {
    if (game_config.iterations <= 0) throw IterationBudgetZero("game iterations");
    mdp.check();
    const int n = mdp.dim();
    if (objective.dim() != n) throw DimensionMismatch("objective dim vs mdp dim");

    auto cost = make_cost_player(objective, cost_config);
    auto policy = make_policy_player(mdp, policy_config);
    const bool self_oracle = policy_config.kind == PolicyPlayerKind::best_response;
    PolicyPlayerConfig oracle_config;
    oracle_config.kind = PolicyPlayerKind::best_response;
    oracle_config.tol_c = game_config.oracle_tol;
    BestResponsePlayer oracle(mdp, oracle_config);

    const double scale = norm_scale(objective);
    GameTrace trace;
    trace.lambdas.reserve(game_config.iterations);
    trace.ds.reserve(game_config.iterations);
    trace.rows.reserve(game_config.iterations);

    Vec dsum(n, 0.0);
    Vec lsum(n, 0.0);
    std::vector<Vec> conj_grid;
    std::vector<Vec> comparators;
    double played_loss = 0.0;  // running sum of f*(lambda^k) - lambda^k . d^k estimates
    double oracle_gap_sum = 0.0;
    long long samples = 0;
    double elapsed_ms = 0.0;
    Vec dbar;

    for (int k = 1; k <= game_config.iterations; ++k) {
        auto tick = std::chrono::steady_clock::now();

        const Vec* d_prev = k > 1 ? &trace.ds.back() : nullptr;
        const Vec* dbar_prev = k > 1 ? &dbar : nullptr;
        CostVector lambda = cost->next(k, d_prev, dbar_prev);
        lambda.check();

        PolicyResponse resp = policy->respond(negate_scaled(lambda.values, scale), k);
        trace.budget_warning = trace.budget_warning || resp.budget_warning;
        trace.max_occupancy_violation =
            std::max(trace.max_occupancy_violation, max_violation(mdp, resp.occupancy.values));
        samples += resp.samples;

        for (int i = 0; i < n; ++i) {
            dsum[i] += resp.occupancy.values[i];
            lsum[i] += lambda.values[i];
        }
        dbar = mean_of(dsum, k);

        double j_oracle = resp.j_value;
        if (game_config.compute_oracle_regret && !self_oracle)
            j_oracle = oracle.respond(negate_scaled(lambda.values, scale), 1).j_value;
        oracle_gap_sum += j_oracle - resp.j_value;

        reservoir_push(conj_grid, resp.occupancy.values, k, game_config.conj_grid_cap);
        reservoir_push(comparators, lambda.values, k, game_config.comparator_cap);
        played_loss += conjugate_estimate(objective, lambda.values, conj_grid, &dbar) -
                       dot(lambda.values, resp.occupancy.values);

        if (game_config.record_timings) {
            auto tock = std::chrono::steady_clock::now();
            elapsed_ms += std::chrono::duration<double, std::milli>(tock - tick).count();
        }

        GameIterationRow row;
        row.k = k;
        row.f_bar = objective.value(dbar);
        row.samples = samples;
        row.ms = elapsed_ms;
        row.regret_pi = game_config.compute_oracle_regret ? oracle_gap_sum / k : 0.0;

        if (game_config.compute_gap_columns) {
            Vec lbar = mean_of(lsum, k);
            PolicyResponse br = oracle.respond(negate_scaled(lbar, scale), 1);
            double conj = conjugate_estimate(objective, lbar, conj_grid, &dbar);
            row.gap_lower = dot(lbar, br.occupancy.values) - conj;
            row.gap_upper = row.f_bar;

            auto comparator_loss = [&](const Vec& c) {
                return k * conjugate_estimate(objective, c, conj_grid, &dbar) - dot(c, dsum);
            };
            double best_comp = comparator_loss(lbar);
            for (const Vec& c : comparators) best_comp = std::min(best_comp, comparator_loss(c));
            if (objective.has_gradient()) {
                Vec g = objective.gradient(dbar);
                DualSet dual = objective.dual_set();
                if (dual.kind == DualSet::Kind::box) g = project_box(std::move(g), dual.radius);
                best_comp = std::min(best_comp, comparator_loss(g));
            }
            row.regret_lambda = (played_loss - best_comp) / k;
        }

        trace.lambdas.push_back(std::move(lambda.values));
        trace.ds.push_back(std::move(resp.occupancy.values));
        trace.j_played.push_back(resp.j_value);
        trace.j_oracle.push_back(j_oracle);
        trace.rows.push_back(std::move(row));
    }

    trace.dbar = dbar;
    trace.lambdabar = mean_of(lsum, game_config.iterations);
    trace.f_bar = objective.value(trace.dbar);
    trace.total_samples = samples;
    auto [lower, upper] =
        duality_gap(mdp, objective, trace.dbar, trace.lambdabar, conj_grid, game_config.oracle_tol);
    trace.gap_lower = lower;
    trace.gap_upper = upper;
    if (!trace.rows.empty()) {
        trace.rows.back().gap_lower = lower;
        trace.rows.back().gap_upper = upper;
    }
    return trace;
}

}  // namespace cvxmdp
