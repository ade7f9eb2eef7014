#pragma once

#include "cvxmdp/cost_players.hpp"
#include "cvxmdp/mdp.hpp"
#include "cvxmdp/objectives.hpp"
#include "cvxmdp/policy_players.hpp"

namespace cvxmdp {

struct GameConfig {
    int iterations = 100;
    // Per-iteration oracle values J*_k for the policy-regret column (exact
    // best responses; best-response players serve as their own oracle).
    bool compute_oracle_regret = true;
    // Per-iteration duality bounds at the running averages (one exact best
    // response per iteration).
    bool compute_gap_columns = true;
    bool record_timings = false;
    double oracle_tol = 1e-9;
    int conj_grid_cap = 64;   // reservoir of iterates for conjugate estimates
    int comparator_cap = 16;  // reservoir of played costs for the regret column
};

struct GameIterationRow {
    int k = 0;
    double f_bar = 0.0;      // f at the running average (raw units)
    double gap_lower = 0.0;  // estimated lower bound on the optimum
    double gap_upper = 0.0;  // f(dbar), or the exact-penalty value when constrained
    double regret_pi = 0.0;      // running mean oracle shortfall (normalized units)
    double regret_lambda = 0.0;  // running cost-player regret estimate (raw units)
    Vec residuals;               // g_i(dbar), constrained games only
    long long samples = 0;       // cumulative environment samples
    double ms = 0.0;             // cumulative wall time (0 unless timings enabled)
};

struct GameTrace {
    std::vector<Vec> lambdas;  // played costs, raw units
    std::vector<Vec> ds;       // played occupancies
    std::vector<double> j_played;  // normalized units
    std::vector<double> j_oracle;  // normalized units (when enabled)
    std::vector<GameIterationRow> rows;
    Vec dbar;
    Vec lambdabar;
    double f_bar = 0.0;
    double gap_lower = 0.0;
    double gap_upper = 0.0;
    long long total_samples = 0;
    double max_occupancy_violation = 0.0;
    bool budget_warning = false;
    bool infeasible_suspected = false;
    int num_constraints = 0;
    std::vector<Vec> mus;  // per-iteration multipliers, constrained games only
};

// The meta-game: alternate cost-player updates and policy-player responses
// for K iterations and average both sides.
GameTrace run_game(const TabularMdp& mdp, const ConvexObjective& objective,
                   const CostPlayerConfig& cost_config, const PolicyPlayerConfig& policy_config,
                   const GameConfig& game_config);

// (lower, upper) bounds around the optimum from a finished run: upper = f(dbar),
// lower = exact best response at lambdabar minus the conjugate estimate over
// `conj_grid` (always including dbar, which makes lower <= upper structural).
std::pair<double, double> duality_gap(const TabularMdp& mdp, const ConvexObjective& objective,
                                      const Vec& dbar, const Vec& lambdabar,
                                      std::vector<Vec> conj_grid, double oracle_tol = 1e-9);

// lambda.d - f*(lambda), with f* estimated over `conj_grid` (exact for
// bilinear objectives).
double lagrangian_value(const Vec& d, const Vec& lambda, const ConvexObjective& objective,
                        const std::vector<Vec>& conj_grid);

enum class FwStepRule { classic, average };  // 2/(k+1) vs running mean

struct FwTrace {
    std::vector<Vec> vertices;   // best-response vertices d^k
    std::vector<Vec> averages;   // iterates dbar^k
    std::vector<double> f_curve; // f(dbar^k)
    Vec final_point;
};

// Conditional-gradient loop: vertices from exact best responses to -grad f.
// With FwStepRule::average the iterates coincide with run_game under the
// follow-the-leader cost player and an exact best-response policy player.
FwTrace run_frank_wolfe(const TabularMdp& mdp, const ConvexObjective& objective, int iterations,
                        FwStepRule rule = FwStepRule::classic, double br_tol = 1e-10);

// Fully corrective variant: after each new vertex, re-optimize f over the
// convex hull of all vertices by projected gradient descent on the simplex
// weights (step 1/L with L estimated from gradient differences, plus a
// fallback to the plain conditional-gradient step so progress never regresses).
FwTrace run_fully_corrective_fw(const TabularMdp& mdp, const ConvexObjective& objective,
                                int iterations, int inner_iters = 200, double br_tol = 1e-10);

// Inequality constraint g(d) <= 0 on the occupancy.
struct ConstraintSpec {
    enum class Kind { linear, min_entropy };
    Kind kind = Kind::linear;
    Vec lambda2;  // linear: g(d) = lambda2.d - c
    double c = 0.0;
    double entropy_floor = 0.0;  // min_entropy: g(d) = floor + sum d log d

    double value(const Vec& d) const;
    double grad_bound() const;
};

struct ConstrainedConfig {
    double mu_max = 100.0;
    double lr_mu_c = 1.0;     // mu step c/sqrt(t)
    double lr_zeta_c = 0.0;   // 0 picks radius*sqrt(1/n)
    double lr_exp = 0.5;
};

// Three-player constrained game: the policy player best-responds to the
// combined cost, one ascent player moves the objective's dual variable, and
// one moves (mu, zeta) for the constraints. Gap columns hold the Lagrangian
// lower bound and the exact-penalty upper value. Sets infeasible_suspected
// when every multiplier sits at mu_max with positive residuals over the last
// quarter of the run.
GameTrace run_constrained_game(const TabularMdp& mdp, const ConvexObjective& objective,
                               const std::vector<ConstraintSpec>& constraints,
                               const ConstrainedConfig& con_config,
                               const CostPlayerConfig& cost_config,
                               const PolicyPlayerConfig& policy_config,
                               const GameConfig& game_config);

struct SkillGameConfig {
    int iterations = 40;
    bool compute_oracle_regret = false;
    bool record_timings = false;
    double oracle_tol = 1e-9;
    int conj_grid_cap = 64;
};

struct SkillGameResult {
    std::vector<double> objective_curve;  // mutual-information value per iteration (nats)
    SkillSet skills;                      // averaged per-skill state marginals
    std::vector<std::vector<Vec>> skill_occupancies;  // [k][z], state-action
    GameTrace trace;                      // stacked-marginal bookkeeping
};

// Per-skill diversity game: each skill's policy player answers the
// discriminator-style reward of the configured variant; marginals average
// across iterations.
SkillGameResult run_skill_game(const TabularMdp& mdp, const DiaynObjective& objective,
                               const PolicyPlayerConfig& policy_config,
                               const SkillGameConfig& config);

}  // namespace cvxmdp
