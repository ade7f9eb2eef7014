#pragma once

#include <cstdint>
#include <memory>

#include "cvxmdp/backup.hpp"
#include "cvxmdp/mdp.hpp"

namespace cvxmdp {

struct PolicyResponse {
    Policy policy;
    OccupancyMeasure occupancy;
    double j_value = 0.0;        // reward . occupancy for the handed reward
    long long samples = 0;       // environment samples consumed by this call
    bool budget_warning = false; // greedy policy still moving near budget end
};

enum class TolSchedule { constant, inv_k, inv_sqrt_k };

enum class PolicyPlayerKind { best_response, q_learning, ucrl2 };

struct PolicyPlayerConfig {
    PolicyPlayerKind kind = PolicyPlayerKind::best_response;
    TolSchedule tol_schedule = TolSchedule::constant;
    double tol_c = 1e-9;  // best-response accuracy scale (normalized reward units)
    // q_learning
    long long q_budget = 20000;  // simulator steps at k=1; grows as 1/tol_k^2
    double q_gamma = 0.99;       // proxy discount when the MDP is average-mode
    double q_lr_exp = 0.7;       // learning rate 1 / N(s,a)^q_lr_exp
    // ucrl2
    double delta = 0.05;  // confidence parameter for the L1 radii
    int evi_budget = 0;   // sweeps per call; 0 means iteration index k
    std::uint64_t seed = 0;
};

// Per-iteration tolerance under the configured schedule (floored at 1e-10).
double scheduled_tol(const PolicyPlayerConfig& config, int k);

// A policy player answers a cost vector with a policy and its exact occupancy.
// Rewards are expected in normalized units (sup-norm <= 1).
class PolicyPlayer {
  public:
    virtual ~PolicyPlayer() = default;
    virtual PolicyResponse respond(const Vec& reward, int k) = 0;
};

// Exact best response: discounted value iteration run to Bellman residual
// tol*(1-gamma)/(2*gamma), or average-mode relative value iteration run to
// span residual tol. Guarantees a reward gap of at most tol_k versus the best
// occupancy. Ties break to the lowest action index.
class BestResponsePlayer : public PolicyPlayer {
  public:
    BestResponsePlayer(const TabularMdp& mdp, PolicyPlayerConfig config);
    PolicyResponse respond(const Vec& reward, int k) override;

  private:
    const TabularMdp& mdp_;
    PolicyPlayerConfig config_;
};

// Tabular Q-learning against the simulator only (transition probabilities are
// never read, only sampled). Epsilon-greedy exploration with epsilon = 1/sqrt(t),
// per-pair learning rates 1/N(s,a)^q_lr_exp, budget growing as 1/tol_k^2.
// Sets budget_warning when the greedy policy changed in the last 10% of the
// budget.
class QLearningPlayer : public PolicyPlayer {
  public:
    QLearningPlayer(const TabularMdp& mdp, PolicyPlayerConfig config);
    PolicyResponse respond(const Vec& reward, int k) override;

  private:
    const TabularMdp& mdp_;
    PolicyPlayerConfig config_;
    std::mt19937_64 rng_;
};

// Empirical transition model with per-pair L1 confidence radii
// beta(s,a) = min(2, sqrt(c_p * S * log(T/delta) / max(1, N(s,a)))).
struct ConfidenceSet {
    int num_states = 0;
    int num_actions = 0;
    double delta = 0.05;
    double c_p = 14.0;
    std::vector<long long> counts;                 // S*A
    std::vector<std::vector<long long>> successor; // S*A x S visit counts
    long long total = 0;

    ConfidenceSet(int S, int A, double delta);
    void observe(int s, int a, int next);
    double beta(int s, int a) const;
    Vec empirical_rows() const;  // S*A x S, uniform where unvisited
    Vec radii() const;           // S*A
};

struct EviResult {
    Vec value;
    std::vector<int> greedy;
    double optimistic_gain = 0.0;
    Vec optimistic_rows;  // S*A x S model attaining the backup at the final sweep
    int iters = 0;
    double span_residual = 0.0;
};

// Optimistic average-reward value iteration over the confidence set: up to
// `iters` sweeps, stopping early when span(u' - u) <= 1/sqrt(iters).
EviResult extended_value_iteration(const ConfidenceSet& conf, const Vec& reward, int iters,
                                   Exec exec = Exec::automatic);

// Optimism-under-uncertainty player: each call runs extended value iteration
// on the current confidence set (budget k sweeps by default), acts one step
// in the simulator with the optimistic policy (episodes of length 1), updates
// the model, and reports the optimistic policy with its exact occupancy.
// Average-mode MDPs only.
class Ucrl2Player : public PolicyPlayer {
  public:
    Ucrl2Player(const TabularMdp& mdp, PolicyPlayerConfig config);
    PolicyResponse respond(const Vec& reward, int k) override;
    const ConfidenceSet& confidence() const { return conf_; }

  private:
    const TabularMdp& mdp_;
    PolicyPlayerConfig config_;
    ConfidenceSet conf_;
    std::mt19937_64 rng_;
    int state_ = 0;
};

std::unique_ptr<PolicyPlayer> make_policy_player(const TabularMdp& mdp,
                                                 const PolicyPlayerConfig& config);

// Mean shortfall of realized values against per-iteration oracle values.
double policy_player_regret(const std::vector<double>& j_oracle,
                            const std::vector<double>& j_played);

}  // namespace cvxmdp
