#pragma once

#include "cvxmdp/mdp.hpp"

namespace cvxmdp {

// Execution policy for the sweep kernels. Parallel and serial variants are
// Jacobi-style (each output state reads only the previous iterate), so they
// produce bitwise-identical results; `automatic` picks by problem size.
enum class Exec { automatic, serial, parallel };

// One Bellman sweep:
//   out(s) = max_a [ reward(s,a) + self_w * u(s) + p_w * sum_t P(t|s,a) u(t) ]
// with (self_w, p_w) = (0, gamma) for discounted backups and (tau, 1-tau) for
// average-mode backups on the aperiodicity-transformed kernel. `greedy`, when
// non-null, receives the lowest maximizing action per state.
void bellman_backup_serial(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                           double p_w, Vec& out, std::vector<int>* greedy);
void bellman_backup_parallel(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                             double p_w, Vec& out, std::vector<int>* greedy);
void bellman_backup(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                    double p_w, Vec& out, std::vector<int>* greedy, Exec exec = Exec::automatic);

// Row of the optimistic transition polytope: the distribution within L1
// distance `beta` of `p_hat` (intersected with the simplex) maximizing the
// expectation of u. `order_desc` lists states by descending u.
Vec optimistic_row(const double* p_hat, int num_states, double beta,
                   const std::vector<int>& order_desc);

// One optimistic sweep over per-(s,a) confidence balls:
//   out(s) = max_a [ reward(s,a) + self_w * u(s) + p_w * max_{q in ball(s,a)} q.u ]
void optimistic_backup_serial(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                              const Vec& u, double self_w, double p_w, Vec& out,
                              std::vector<int>* greedy);
void optimistic_backup_parallel(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                                const Vec& u, double self_w, double p_w, Vec& out,
                                std::vector<int>* greedy);
void optimistic_backup(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                       const Vec& u, double self_w, double p_w, Vec& out, std::vector<int>* greedy,
                       Exec exec = Exec::automatic);

// Aperiodicity blend used by all average-mode sweeps (gains and greedy sets
// are invariant to it; span stopping is not safe without it).
constexpr double kAperiodicityTau = 0.5;

struct ViResult {
    Vec value;
    std::vector<int> greedy;
    int iters = 0;
    double residual = 0.0;  // final sup-norm change
};

// Discounted value iteration, stops when the sup-norm change is <= tol.
ViResult value_iteration(const TabularMdp& mdp, const Vec& reward, double tol,
                         int max_iters = 200000, Exec exec = Exec::automatic);

struct RviResult {
    Vec bias;
    std::vector<int> greedy;
    double gain = 0.0;
    int iters = 0;
    double span_residual = 0.0;  // final span of the change
};

// Average-reward relative value iteration on the transformed kernel, stops
// when span(u' - u) <= tol. Throws when the span fails to converge within
// max_iters (multichain inputs, typically).
RviResult relative_value_iteration(const TabularMdp& mdp, const Vec& reward, double tol,
                                   int max_iters = 400000, Exec exec = Exec::automatic);

}  // namespace cvxmdp
