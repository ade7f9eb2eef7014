#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cvxmdp/game.hpp"
#include "game_util.hpp"

namespace cvxmdp {

using detail::conjugate_estimate;
using detail::max_violation;
using detail::mean_of;
using detail::negate_scaled;
using detail::reservoir_push;

namespace {

constexpr double kEntropyFloor = 1e-12;
constexpr double kMuFloor = 1e-12;

double entropy_sum(const Vec& d) {
    double s = 0.0;
    for (double v : d)
        if (v > 0.0) s += v * std::log(v);
    return s;
}

// g*(v) for the entropy constraint g(d) = floor + sum d log d.
double entropy_conjugate(const Vec& v, double floor) {
    double s = 0.0;
    for (double x : v) s += std::exp(x - 1.0);
    return s - floor;
}

Vec entropy_conjugate_grad(const Vec& v) {
    Vec g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = std::exp(v[i] - 1.0);
    return g;
}

}  // namespace

double ConstraintSpec::value(const Vec& d) const {
    if (kind == Kind::linear) return dot(lambda2, d) - c;
    return entropy_floor + entropy_sum(d);
}

double ConstraintSpec::grad_bound() const {
    if (kind == Kind::linear) return sup_norm(lambda2);
    return std::abs(1.0 + std::log(kEntropyFloor));
}

GameTrace run_constrained_game(const TabularMdp& mdp, const ConvexObjective& objective,
                               const std::vector<ConstraintSpec>& constraints,
                               const ConstrainedConfig& con_config,
                               const CostPlayerConfig& cost_config,
                               const PolicyPlayerConfig& policy_config,
                               const GameConfig& game_config) {
    if (constraints.empty()) return run_game(mdp, objective, cost_config, policy_config, game_config);
    if (game_config.iterations <= 0) throw IterationBudgetZero("game iterations");
    mdp.check();
    const int n = mdp.dim();
    if (objective.dim() != n) throw DimensionMismatch("objective dim vs mdp dim");
    const int m = static_cast<int>(constraints.size());
    for (const ConstraintSpec& g : constraints)
        if (g.kind == ConstraintSpec::Kind::linear && static_cast<int>(g.lambda2.size()) != n)
            throw DimensionMismatch("constraint dim vs mdp dim");

    auto cost = make_cost_player(objective, cost_config);
    auto policy = make_policy_player(mdp, policy_config);
    const bool self_oracle = policy_config.kind == PolicyPlayerKind::best_response;
    PolicyPlayerConfig oracle_config;
    oracle_config.kind = PolicyPlayerKind::best_response;
    oracle_config.tol_c = game_config.oracle_tol;
    BestResponsePlayer oracle(mdp, oracle_config);

    double scale = objective.grad_bound();
    for (const ConstraintSpec& g : constraints) scale += con_config.mu_max * g.grad_bound();
    if (scale < 1e-12) scale = 1.0;

    GameTrace trace;
    trace.num_constraints = m;
    trace.lambdas.reserve(game_config.iterations);
    trace.ds.reserve(game_config.iterations);
    trace.rows.reserve(game_config.iterations);
    trace.mus.reserve(game_config.iterations);

    Vec mu(m, 0.0);
    Vec musum(m, 0.0);
    std::vector<Vec> zeta(m);        // entropy constraints only
    std::vector<Vec> zeta_sum(m);
    for (int i = 0; i < m; ++i)
        if (constraints[i].kind == ConstraintSpec::Kind::min_entropy) {
            zeta[i].assign(n, 0.0);
            zeta_sum[i].assign(n, 0.0);
        }

    Vec dsum(n, 0.0);
    Vec nusum(n, 0.0);
    std::vector<Vec> conj_grid;
    double oracle_gap_sum = 0.0;
    long long samples = 0;
    double elapsed_ms = 0.0;
    Vec dbar;
    int saturated_rows = 0;
    const int quarter_start = game_config.iterations - game_config.iterations / 4 + 1;

    for (int k = 1; k <= game_config.iterations; ++k) {
        auto tick = std::chrono::steady_clock::now();
        const Vec* d_prev = k > 1 ? &trace.ds.back() : nullptr;
        const Vec* dbar_prev = k > 1 ? &dbar : nullptr;

        // Multiplier ascent from the previous response.
        if (k > 1) {
            double alpha_mu =
                con_config.lr_mu_c / std::pow(static_cast<double>(k - 1), con_config.lr_exp);
            for (int i = 0; i < m; ++i) {
                const ConstraintSpec& g = constraints[i];
                double ascent;
                if (g.kind == ConstraintSpec::Kind::linear) {
                    ascent = g.value(*d_prev);
                } else if (mu[i] > kMuFloor) {
                    // d/dmu of mu g*(zeta/mu) gives g evaluated at the
                    // conjugate gradient; closure at mu = 0 uses g(d_prev).
                    Vec v(n);
                    for (int j = 0; j < n; ++j) v[j] = zeta[i][j] / mu[i];
                    ascent = g.entropy_floor + entropy_sum(entropy_conjugate_grad(v));
                } else {
                    ascent = g.value(*d_prev);
                }
                mu[i] = std::clamp(mu[i] + alpha_mu * ascent, 0.0, con_config.mu_max);

                if (g.kind == ConstraintSpec::Kind::min_entropy) {
                    if (mu[i] <= kMuFloor) {
                        mu[i] = 0.0;
                        std::fill(zeta[i].begin(), zeta[i].end(), 0.0);
                        continue;
                    }
                    double radius = mu[i] * g.grad_bound();
                    double zeta_c = con_config.lr_zeta_c > 0.0
                                        ? con_config.lr_zeta_c
                                        : radius * std::sqrt(1.0 / n);
                    double alpha_z =
                        zeta_c / std::pow(static_cast<double>(k - 1), con_config.lr_exp);
                    Vec v(n);
                    for (int j = 0; j < n; ++j) v[j] = zeta[i][j] / mu[i];
                    Vec cg = entropy_conjugate_grad(v);
                    for (int j = 0; j < n; ++j) zeta[i][j] += alpha_z * ((*d_prev)[j] - cg[j]);
                    zeta[i] = project_box(std::move(zeta[i]), radius);
                }
            }
        }

        CostVector nu = cost->next(k, d_prev, dbar_prev);
        nu.check();
        Vec lambda_tot = nu.values;
        for (int i = 0; i < m; ++i) {
            if (constraints[i].kind == ConstraintSpec::Kind::linear) {
                for (int j = 0; j < n; ++j) lambda_tot[j] += mu[i] * constraints[i].lambda2[j];
            } else {
                for (int j = 0; j < n; ++j) lambda_tot[j] += zeta[i][j];
            }
        }

        PolicyResponse resp = policy->respond(negate_scaled(lambda_tot, scale), k);
        trace.budget_warning = trace.budget_warning || resp.budget_warning;
        trace.max_occupancy_violation =
            std::max(trace.max_occupancy_violation, max_violation(mdp, resp.occupancy.values));
        samples += resp.samples;

        for (int j = 0; j < n; ++j) {
            dsum[j] += resp.occupancy.values[j];
            nusum[j] += nu.values[j];
        }
        for (int i = 0; i < m; ++i) {
            musum[i] += mu[i];
            if (constraints[i].kind == ConstraintSpec::Kind::min_entropy)
                for (int j = 0; j < n; ++j) zeta_sum[i][j] += zeta[i][j];
        }
        dbar = mean_of(dsum, k);

        double j_oracle = resp.j_value;
        if (game_config.compute_oracle_regret && !self_oracle)
            j_oracle = oracle.respond(negate_scaled(lambda_tot, scale), 1).j_value;
        oracle_gap_sum += j_oracle - resp.j_value;

        reservoir_push(conj_grid, resp.occupancy.values, k, game_config.conj_grid_cap);

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
        row.residuals.resize(m);
        bool all_saturated = true;
        for (int i = 0; i < m; ++i) {
            row.residuals[i] = constraints[i].value(dbar);
            all_saturated = all_saturated && mu[i] >= 0.98 * con_config.mu_max &&
                            row.residuals[i] > 0.0;
        }
        if (k >= quarter_start && all_saturated) ++saturated_rows;

        if (game_config.compute_gap_columns) {
            // Lower: the Lagrangian dual value at the averaged multipliers.
            // Upper: the exact-penalty value at the averaged response.
            Vec nubar = mean_of(nusum, k);
            Vec mubar = mean_of(musum, k);
            Vec combined = nubar;
            double conj_terms = conjugate_estimate(objective, nubar, conj_grid, &dbar);
            for (int i = 0; i < m; ++i) {
                if (constraints[i].kind == ConstraintSpec::Kind::linear) {
                    for (int j = 0; j < n; ++j) combined[j] += mubar[i] * constraints[i].lambda2[j];
                    conj_terms += mubar[i] * constraints[i].c;
                } else {
                    Vec zbar = mean_of(zeta_sum[i], k);
                    for (int j = 0; j < n; ++j) combined[j] += zbar[j];
                    if (mubar[i] > kMuFloor) {
                        Vec v(n);
                        for (int j = 0; j < n; ++j) v[j] = zbar[j] / mubar[i];
                        conj_terms +=
                            mubar[i] * entropy_conjugate(v, constraints[i].entropy_floor);
                    }
                }
            }
            PolicyResponse br = oracle.respond(negate_scaled(combined, scale), 1);
            row.gap_lower = dot(combined, br.occupancy.values) - conj_terms;
            row.gap_upper = row.f_bar;
            for (int i = 0; i < m; ++i)
                row.gap_upper += con_config.mu_max * std::max(0.0, row.residuals[i]);
        }

        trace.lambdas.push_back(std::move(lambda_tot));
        trace.ds.push_back(std::move(resp.occupancy.values));
        trace.j_played.push_back(resp.j_value);
        trace.j_oracle.push_back(j_oracle);
        trace.mus.push_back(mu);
        trace.rows.push_back(std::move(row));
    }

    trace.dbar = dbar;
    trace.lambdabar = mean_of(nusum, game_config.iterations);
    trace.f_bar = objective.value(trace.dbar);
    trace.total_samples = samples;
    if (!trace.rows.empty()) {
        trace.gap_lower = trace.rows.back().gap_lower;
        trace.gap_upper = trace.rows.back().gap_upper;
    }
    const int quarter_len = game_config.iterations - quarter_start + 1;
    trace.infeasible_suspected = quarter_len > 0 && saturated_rows == quarter_len;
    return trace;
}

}  // namespace cvxmdp
