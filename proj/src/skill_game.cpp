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
using detail::reservoir_push;

namespace {

// Stacked per-state rewards expand to state-action space; the reward depends
// only on the visited state.
Vec expand_to_state_action(const Vec& per_state, int num_actions, double scale) {
    Vec r(per_state.size() * static_cast<std::size_t>(num_actions));
    for (std::size_t s = 0; s < per_state.size(); ++s)
        for (int a = 0; a < num_actions; ++a)
            r[s * static_cast<std::size_t>(num_actions) + a] = per_state[s] / scale;
    return r;
}

Vec state_marginal(const Vec& occupancy, int num_states, int num_actions) {
    Vec m(static_cast<std::size_t>(num_states), 0.0);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a)
            m[s] += occupancy[static_cast<std::size_t>(s) * num_actions + a];
    return m;
}

}  // namespace

SkillGameResult run_skill_game(const TabularMdp& mdp, const DiaynObjective& objective,
                               const PolicyPlayerConfig& policy_config,
                               const SkillGameConfig& config) {
    if (config.iterations <= 0) throw IterationBudgetZero("skill game iterations");
    mdp.check();
    if (objective.num_states() != mdp.num_states)
        throw DimensionMismatch("objective states vs mdp states");
    const int Z = objective.num_skills();
    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    const int dim = Z * S;
    const double scale = objective.grad_bound();

    std::vector<std::unique_ptr<PolicyPlayer>> players;
    players.reserve(Z);
    for (int z = 0; z < Z; ++z) {
        PolicyPlayerConfig pc = policy_config;
        pc.seed = policy_config.seed + static_cast<std::uint64_t>(z) * 1000003ull;
        players.push_back(make_policy_player(mdp, pc));
    }
    PolicyPlayerConfig oracle_config;
    oracle_config.kind = PolicyPlayerKind::best_response;
    oracle_config.tol_c = config.oracle_tol;
    BestResponsePlayer oracle(mdp, oracle_config);

    SkillGameResult result;
    result.objective_curve.reserve(config.iterations);
    result.skill_occupancies.reserve(config.iterations);
    GameTrace& trace = result.trace;
    trace.rows.reserve(config.iterations);

    Vec xsum(static_cast<std::size_t>(dim), 0.0);
    Vec lsum(static_cast<std::size_t>(dim), 0.0);
    Vec xbar(static_cast<std::size_t>(dim), 1.0 / S);  // uniform marginals to start
    std::vector<Vec> conj_grid;
    double oracle_gap_sum = 0.0;
    long long samples = 0;
    double elapsed_ms = 0.0;

    for (int k = 1; k <= config.iterations; ++k) {
        auto tick = std::chrono::steady_clock::now();

        Vec rewards = objective.skill_rewards(xbar);
        Vec lambda(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) lambda[i] = -rewards[i];

        Vec x_k(static_cast<std::size_t>(dim));
        std::vector<Vec> occs(static_cast<std::size_t>(Z));
        double j_played = 0.0;
        double j_oracle = 0.0;
        for (int z = 0; z < Z; ++z) {
            Vec r_z(rewards.begin() + static_cast<std::ptrdiff_t>(z) * S,
                    rewards.begin() + static_cast<std::ptrdiff_t>(z + 1) * S);
            Vec r_sa = expand_to_state_action(r_z, A, scale);
            PolicyResponse resp = players[static_cast<std::size_t>(z)]->respond(r_sa, k);
            trace.budget_warning = trace.budget_warning || resp.budget_warning;
            trace.max_occupancy_violation = std::max(
                trace.max_occupancy_violation, max_violation(mdp, resp.occupancy.values));
            samples += resp.samples;
            j_played += resp.j_value;
            if (config.compute_oracle_regret &&
                policy_config.kind != PolicyPlayerKind::best_response)
                j_oracle += oracle.respond(r_sa, 1).j_value;
            else
                j_oracle += resp.j_value;
            Vec m = state_marginal(resp.occupancy.values, S, A);
            for (int s = 0; s < S; ++s) x_k[static_cast<std::size_t>(z) * S + s] = m[s];
            occs[static_cast<std::size_t>(z)] = std::move(resp.occupancy.values);
        }
        j_played /= Z;
        j_oracle /= Z;
        oracle_gap_sum += j_oracle - j_played;

        for (int i = 0; i < dim; ++i) {
            xsum[i] += x_k[i];
            lsum[i] += lambda[i];
        }
        xbar = mean_of(xsum, k);
        reservoir_push(conj_grid, x_k, k, config.conj_grid_cap);

        if (config.record_timings) {
            auto tock = std::chrono::steady_clock::now();
            elapsed_ms += std::chrono::duration<double, std::milli>(tock - tick).count();
        }

        double f_bar = objective.value(xbar);
        GameIterationRow row;
        row.k = k;
        row.f_bar = f_bar;
        row.samples = samples;
        row.ms = elapsed_ms;
        row.regret_pi = config.compute_oracle_regret ? oracle_gap_sum / k : 0.0;

        result.objective_curve.push_back(objective.is_convex() ? f_bar : -f_bar);
        result.skill_occupancies.push_back(std::move(occs));
        trace.lambdas.push_back(std::move(lambda));
        trace.ds.push_back(std::move(x_k));
        trace.j_played.push_back(j_played);
        trace.j_oracle.push_back(j_oracle);
        trace.rows.push_back(std::move(row));
    }

    trace.dbar = xbar;
    trace.lambdabar = mean_of(lsum, config.iterations);
    trace.f_bar = objective.value(xbar);
    trace.total_samples = samples;

    // Final weak-duality estimate: per-skill best responses at the averaged
    // cost against the grid conjugate. For the maximize direction this is a
    // heuristic bracket, not a certificate.
    {
        double br_value = 0.0;
        for (int z = 0; z < Z; ++z) {
            Vec l_z(trace.lambdabar.begin() + static_cast<std::ptrdiff_t>(z) * S,
                    trace.lambdabar.begin() + static_cast<std::ptrdiff_t>(z + 1) * S);
            Vec neg(l_z.size());
            for (std::size_t i = 0; i < l_z.size(); ++i) neg[i] = -l_z[i] / scale;
            PolicyResponse br = oracle.respond(expand_to_state_action(neg, A, 1.0), 1);
            Vec m = state_marginal(br.occupancy.values, S, A);
            br_value += dot(l_z, m);
        }
        double conj = conjugate_estimate(objective, trace.lambdabar, conj_grid, &xbar);
        trace.gap_lower = br_value - conj;
        trace.gap_upper = trace.f_bar;
        if (!trace.rows.empty()) {
            trace.rows.back().gap_lower = trace.gap_lower;
            trace.rows.back().gap_upper = trace.gap_upper;
        }
    }

    result.skills = SkillSet::from_concat(objective.prior(), xbar);
    return result;
}

}  // namespace cvxmdp
