#pragma once

#include <cstdint>

#include "cvxmdp/common.hpp"

namespace cvxmdp {

enum class Mode { discounted, average };

// Dense tabular MDP. Transition kernel is stored row-major with one row per
// (state, action) pair: transition[(s*num_actions + a)*num_states + s'].
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    Mode mode = Mode::discounted;
    double gamma = 0.95;  // discounted mode only
    Vec transition;       // (S*A) x S
    Vec initial_dist;     // size S, discounted mode only

    int dim() const { return num_states * num_actions; }
    int row_index(int s, int a) const { return s * num_actions + a; }
    const double* row(int s, int a) const {
        return transition.data() + static_cast<std::size_t>(row_index(s, a)) * num_states;
    }
    // Shape and stochasticity checks; throws DimensionMismatch on violation.
    void check(double tol = 1e-9) const;
};

// Row-stochastic policy, probs[s*num_actions + a].
struct Policy {
    int num_states = 0;
    int num_actions = 0;
    Vec probs;

    static Policy uniform(int num_states, int num_actions);
    static Policy deterministic(int num_states, int num_actions, const std::vector<int>& actions);
    double prob(int s, int a) const { return probs[s * num_actions + a]; }
    void check(double tol = 1e-9) const;
};

// Occupancy over (state, action) pairs; mass 1 in both modes.
struct OccupancyMeasure {
    int num_states = 0;
    int num_actions = 0;
    Mode mode = Mode::discounted;
    double gamma = 0.0;
    Vec values;  // S*A
};

struct OccupancyViolation {
    enum class Kind { negative_entry, total_mass, flow } kind;
    int index;        // (s,a) index for negativity, state for flow, -1 for mass
    double residual;  // magnitude of the violation
};

// Exact occupancy of a policy. Discounted: solves the flow system for the
// discounted state distribution. Average: stationary distribution of the
// induced chain; throws AverageModeNotUnichain when the chain has more than
// one closed recurrent class.
OccupancyMeasure occupancy_of_policy(const TabularMdp& mdp, const Policy& policy);

// Conditional policy d(s,a)/sum_a d(s,a); rows with marginal below 1e-12
// become uniform.
Policy policy_of_occupancy(const TabularMdp& mdp, const Vec& d);

// Checks nonnegativity, unit mass, and the per-state flow constraints of the
// occupancy polytope. Throws DimensionMismatch for wrongly sized input.
std::vector<OccupancyViolation> validate_occupancy(const TabularMdp& mdp, const Vec& d,
                                                   double tol = 1e-8);

// Induced state-to-state kernel P_pi(s'|s), row-major S x S.
Vec induced_chain(const TabularMdp& mdp, const Policy& policy);

// Number of closed recurrent classes of a row-stochastic S x S chain.
int count_closed_classes(const Vec& chain, int num_states);

// Stationary distribution of a unichain kernel (direct eigenvector solve,
// residual checked at 1e-12). Throws AverageModeNotUnichain otherwise.
Vec stationary_distribution(const Vec& chain, int num_states);

// --- Environment generators ---

// width x height grid, 4 cardinal actions; intended move with prob
// 1 - slip_prob, each other direction with slip_prob/3; off-grid moves stay
// in place. State index = y*width + x. Uniform initial distribution.
TabularMdp make_gridworld(int width, int height, double slip_prob, Mode mode, double gamma = 0.95);

// Chain variant of the deep-sea exploration task: states 0..depth-1, action 1
// advances (and restarts from the last state), action 0 restarts to state 0.
// The extrinsic reward charges 0.01/depth per advance and pays +1 for leaving
// the last state via action 1, so exactly one deterministic policy (always
// advance) attains positive reward.
struct DeepSea {
    TabularMdp mdp;
    Vec extrinsic_reward;  // size S*A
};
DeepSea make_deep_sea(int depth, Mode mode = Mode::average, double gamma = 0.95);

// Random MDP: each (s,a) row picks `branching` distinct successors uniformly
// and weights them by normalized unit exponentials. Deterministic in seed.
TabularMdp make_random_mdp(int num_states, int num_actions, int branching, std::uint64_t seed,
                           Mode mode = Mode::discounted, double gamma = 0.95);

// Two-state, two-action symmetric MDP: action 0 stays with prob move_prob,
// action 1 switches with prob move_prob. Every policy induces a unichain; the
// uniform policy's occupancy is uniform over all four pairs.
TabularMdp make_symmetric_two_state(double move_prob = 0.9, Mode mode = Mode::average,
                                    double gamma = 0.95);

}  // namespace cvxmdp
