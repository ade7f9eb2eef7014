#include "cvxmdp/policy_players.hpp"

#include <algorithm>
#include <cmath>

namespace cvxmdp {

double scheduled_tol(const PolicyPlayerConfig& config, int k) {
    double tol = config.tol_c;
    switch (config.tol_schedule) {
        case TolSchedule::constant: break;
        case TolSchedule::inv_k: tol /= static_cast<double>(k); break;
        case TolSchedule::inv_sqrt_k: tol /= std::sqrt(static_cast<double>(k)); break;
    }
    return std::max(tol, 1e-10);
}

BestResponsePlayer::BestResponsePlayer(const TabularMdp& mdp, PolicyPlayerConfig config)
    : mdp_(mdp), config_(config) {
    mdp.check();
}

PolicyResponse BestResponsePlayer::respond(const Vec& reward, int k) {
    if (reward.size() != static_cast<std::size_t>(mdp_.dim()))
        throw DimensionMismatch("best_response: reward size mismatch");
    double tol = scheduled_tol(config_, k);
    PolicyResponse res;
    if (mdp_.mode == Mode::discounted) {
        double inner = tol * (1.0 - mdp_.gamma) / (2.0 * mdp_.gamma);
        ViResult vi = value_iteration(mdp_, reward, inner);
        if (vi.residual > inner)
            throw UnsupportedOperation("best_response: value iteration did not converge");
        res.policy = Policy::deterministic(mdp_.num_states, mdp_.num_actions, vi.greedy);
    } else {
        RviResult rvi = relative_value_iteration(mdp_, reward, tol);
        res.policy = Policy::deterministic(mdp_.num_states, mdp_.num_actions, rvi.greedy);
    }
    res.occupancy = occupancy_of_policy(mdp_, res.policy);
    res.j_value = dot(reward, res.occupancy.values);
    return res;
}

QLearningPlayer::QLearningPlayer(const TabularMdp& mdp, PolicyPlayerConfig config)
    : mdp_(mdp), config_(config), rng_(make_rng(config.seed, 1)) {
    mdp.check();
}

PolicyResponse QLearningPlayer::respond(const Vec& reward, int k) {
    const int S = mdp_.num_states, A = mdp_.num_actions;
    if (reward.size() != static_cast<std::size_t>(S) * A)
        throw DimensionMismatch("q_learning: reward size mismatch");

    // Budget calibrated to the tolerance schedule: tol ~ 1/sqrt(budget), so
    // budget grows as (tol_c / tol_k)^2.
    double ratio = config_.tol_c / scheduled_tol(config_, k);
    long long budget =
        static_cast<long long>(std::ceil(config_.q_budget * std::max(1.0, ratio * ratio)));
    const double gamma = (mdp_.mode == Mode::discounted) ? mdp_.gamma : config_.q_gamma;

    Vec q(static_cast<std::size_t>(S) * A, 0.0);
    std::vector<long long> visits(static_cast<std::size_t>(S) * A, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> any_action(0, A - 1);

    auto greedy_action = [&](int s) {
        int best = 0;
        double best_q = q[s * A];
        for (int a = 1; a < A; ++a)
            if (q[s * A + a] > best_q) {
                best_q = q[s * A + a];
                best = a;
            }
        return best;
    };
    auto sample_next = [&](int s, int a) {
        const double* p = mdp_.row(s, a);
        double u = unit(rng_), acc = 0.0;
        for (int t = 0; t < S; ++t) {
            acc += p[t];
            if (u <= acc) return t;
        }
        return S - 1;
    };
    auto sample_initial = [&]() {
        if (mdp_.mode == Mode::discounted) {
            double u = unit(rng_), acc = 0.0;
            for (int t = 0; t < S; ++t) {
                acc += mdp_.initial_dist[t];
                if (u <= acc) return t;
            }
            return S - 1;
        }
        std::uniform_int_distribution<int> any_state(0, S - 1);
        return any_state(rng_);
    };

    int s = sample_initial();
    std::vector<int> snapshot(S, 0);
    const long long cutoff = budget - budget / 10;
    for (long long t = 1; t <= budget; ++t) {
        double eps = 1.0 / std::sqrt(static_cast<double>(t));
        int a = (unit(rng_) < eps) ? any_action(rng_) : greedy_action(s);
        int next = sample_next(s, a);
        double lr = 1.0 / std::pow(static_cast<double>(++visits[s * A + a]), config_.q_lr_exp);
        double target = reward[s * A + a] + gamma * q[next * A + greedy_action(next)];
        q[s * A + a] += lr * (target - q[s * A + a]);
        // Discounted occupancies correspond to the restart chain.
        s = (mdp_.mode == Mode::discounted && unit(rng_) < 1.0 - gamma) ? sample_initial() : next;
        if (t == cutoff)
            for (int i = 0; i < S; ++i) snapshot[i] = greedy_action(i);
    }

    PolicyResponse res;
    std::vector<int> final_greedy(S);
    for (int i = 0; i < S; ++i) final_greedy[i] = greedy_action(i);
    res.budget_warning = final_greedy != snapshot;
    res.policy = Policy::deterministic(S, A, final_greedy);
    res.occupancy = occupancy_of_policy(mdp_, res.policy);
    res.j_value = dot(reward, res.occupancy.values);
    res.samples = budget;
    return res;
}

ConfidenceSet::ConfidenceSet(int S, int A, double delta_in)
    : num_states(S), num_actions(A), delta(delta_in),
      counts(static_cast<std::size_t>(S) * A, 0),
      successor(static_cast<std::size_t>(S) * A, std::vector<long long>(S, 0)) {
    if (delta <= 0.0 || delta >= 1.0) throw DimensionMismatch("ConfidenceSet: delta outside (0,1)");
}

void ConfidenceSet::observe(int s, int a, int next) {
    ++counts[s * num_actions + a];
    ++successor[s * num_actions + a][next];
    ++total;
}

double ConfidenceSet::beta(int s, int a) const {
    double t = static_cast<double>(std::max<long long>(total, 2));
    double n = static_cast<double>(std::max<long long>(counts[s * num_actions + a], 1));
    return std::min(2.0, std::sqrt(c_p * num_states * std::log(t / delta) / n));
}

Vec ConfidenceSet::empirical_rows() const {
    const int S = num_states, A = num_actions;
    Vec rows(static_cast<std::size_t>(S) * A * S, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double* r = rows.data() + static_cast<std::size_t>(s * A + a) * S;
            long long n = counts[s * A + a];
            if (n == 0) {
                for (int t = 0; t < S; ++t) r[t] = 1.0 / S;
            } else {
                for (int t = 0; t < S; ++t)
                    r[t] = static_cast<double>(successor[s * A + a][t]) / static_cast<double>(n);
            }
        }
    return rows;
}

Vec ConfidenceSet::radii() const {
    Vec b(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) b[s * num_actions + a] = beta(s, a);
    return b;
}

EviResult extended_value_iteration(const ConfidenceSet& conf, const Vec& reward, int iters,
                                   Exec exec) {
    const int S = conf.num_states, A = conf.num_actions;
    if (iters <= 0) throw IterationBudgetZero("extended_value_iteration: nonpositive budget");
    if (reward.size() != static_cast<std::size_t>(S) * A)
        throw DimensionMismatch("extended_value_iteration: reward size mismatch");
    const double tau = kAperiodicityTau;
    const double stop = 1.0 / std::sqrt(static_cast<double>(iters));
    Vec p_hat = conf.empirical_rows();
    Vec beta = conf.radii();

    EviResult res;
    res.value.assign(S, 0.0);
    res.greedy.assign(S, 0);
    Vec next(S, 0.0);
    for (int i = 1; i <= iters; ++i) {
        optimistic_backup(S, A, p_hat, beta, reward, res.value, tau, 1.0 - tau, next, &res.greedy,
                          exec);
        double lo = next[0] - res.value[0], hi = lo;
        for (int s = 0; s < S; ++s) {
            double d = next[s] - res.value[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        res.optimistic_gain = 0.5 * (lo + hi);
        res.iters = i;
        res.span_residual = hi - lo;
        double anchor = next[0];
        for (int s = 0; s < S; ++s) res.value[s] = next[s] - anchor;
        if (res.span_residual <= stop) break;
    }

    // Optimistic model at the final iterate, for inspection and tests.
    std::vector<int> order(S);
    for (int s = 0; s < S; ++s) order[s] = s;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return res.value[a] > res.value[b]; });
    res.optimistic_rows.assign(static_cast<std::size_t>(S) * A * S, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            Vec row = optimistic_row(p_hat.data() + static_cast<std::size_t>(s * A + a) * S, S,
                                     beta[s * A + a], order);
            std::copy(row.begin(), row.end(),
                      res.optimistic_rows.begin() + static_cast<std::size_t>(s * A + a) * S);
        }
    return res;
}

Ucrl2Player::Ucrl2Player(const TabularMdp& mdp, PolicyPlayerConfig config)
    : mdp_(mdp), config_(config),
      conf_(mdp.num_states, mdp.num_actions, config.delta),
      rng_(make_rng(config.seed, 2)) {
    mdp.check();
    if (mdp.mode != Mode::average)
        throw UnsupportedOperation("ucrl2: average-mode MDPs only");
    std::uniform_int_distribution<int> any_state(0, mdp.num_states - 1);
    state_ = any_state(rng_);
}

PolicyResponse Ucrl2Player::respond(const Vec& reward, int k) {
    const int S = mdp_.num_states, A = mdp_.num_actions;
    if (reward.size() != static_cast<std::size_t>(S) * A)
        throw DimensionMismatch("ucrl2: reward size mismatch");
    int budget = config_.evi_budget > 0 ? config_.evi_budget : std::max(1, k);
    EviResult evi = extended_value_iteration(conf_, reward, budget);

    PolicyResponse res;
    res.policy = Policy::deterministic(S, A, evi.greedy);

    // One environment step with the optimistic policy (episodes of length 1).
    int a = evi.greedy[state_];
    const double* p = mdp_.row(state_, a);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng_), acc = 0.0;
    int next = S - 1;
    for (int t = 0; t < S; ++t) {
        acc += p[t];
        if (u <= acc) {
            next = t;
            break;
        }
    }
    conf_.observe(state_, a, next);
    state_ = next;

    res.occupancy = occupancy_of_policy(mdp_, res.policy);
    res.j_value = dot(reward, res.occupancy.values);
    res.samples = 1;
    return res;
}

std::unique_ptr<PolicyPlayer> make_policy_player(const TabularMdp& mdp,
                                                 const PolicyPlayerConfig& config) {
    switch (config.kind) {
        case PolicyPlayerKind::best_response:
            return std::make_unique<BestResponsePlayer>(mdp, config);
        case PolicyPlayerKind::q_learning:
            return std::make_unique<QLearningPlayer>(mdp, config);
        case PolicyPlayerKind::ucrl2:
            return std::make_unique<Ucrl2Player>(mdp, config);
    }
    throw UnsupportedOperation("make_policy_player: unknown kind");
}

double policy_player_regret(const std::vector<double>& j_oracle,
                            const std::vector<double>& j_played) {
    if (j_oracle.size() != j_played.size() || j_oracle.empty())
        throw DimensionMismatch("policy_player_regret: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < j_oracle.size(); ++i) acc += j_oracle[i] - j_played[i];
    return acc / static_cast<double>(j_oracle.size());
}

}  // namespace cvxmdp
