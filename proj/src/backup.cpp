#include "cvxmdp/backup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cvxmdp {

namespace {

constexpr int kParallelThreshold = 8192;  // S*A below this runs serially

inline void backup_state(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                         double p_w, int s, Vec& out, std::vector<int>* greedy) {
    const int A = mdp.num_actions, S = mdp.num_states;
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
        const double* p = mdp.row(s, a);
        double exp_u = 0.0;
        for (int t = 0; t < S; ++t) exp_u += p[t] * u[t];
        double q = reward[s * A + a] + self_w * u[s] + p_w * exp_u;
        if (q > best) {
            best = q;
            best_a = a;
        }
    }
    out[s] = best;
    if (greedy) (*greedy)[s] = best_a;
}

inline void optimistic_state(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                             const Vec& u, double self_w, double p_w,
                             const std::vector<int>& order_desc, int s, Vec& out,
                             std::vector<int>* greedy) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
        const double* p = p_hat.data() + static_cast<std::size_t>(s * A + a) * S;
        Vec q = optimistic_row(p, S, beta[s * A + a], order_desc);
        double exp_u = 0.0;
        for (int t = 0; t < S; ++t) exp_u += q[t] * u[t];
        double val = reward[s * A + a] + self_w * u[s] + p_w * exp_u;
        if (val > best) {
            best = val;
            best_a = a;
        }
    }
    out[s] = best;
    if (greedy) (*greedy)[s] = best_a;
}

std::vector<int> descending_order(const Vec& u) {
    std::vector<int> order(u.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return u[a] > u[b]; });
    return order;
}

}  // namespace

void bellman_backup_serial(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                           double p_w, Vec& out, std::vector<int>* greedy) {
    for (int s = 0; s < mdp.num_states; ++s)
        backup_state(mdp, reward, u, self_w, p_w, s, out, greedy);
}

void bellman_backup_parallel(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                             double p_w, Vec& out, std::vector<int>* greedy) {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < mdp.num_states; ++s)
        backup_state(mdp, reward, u, self_w, p_w, s, out, greedy);
}

void bellman_backup(const TabularMdp& mdp, const Vec& reward, const Vec& u, double self_w,
                    double p_w, Vec& out, std::vector<int>* greedy, Exec exec) {
    bool parallel = exec == Exec::parallel ||
                    (exec == Exec::automatic && mdp.dim() >= kParallelThreshold);
    if (parallel)
        bellman_backup_parallel(mdp, reward, u, self_w, p_w, out, greedy);
    else
        bellman_backup_serial(mdp, reward, u, self_w, p_w, out, greedy);
}

Vec optimistic_row(const double* p_hat, int num_states, double beta,
                   const std::vector<int>& order_desc) {
    Vec q(p_hat, p_hat + num_states);
    if (num_states == 0) return q;
    // Move up to beta/2 probability mass onto the best state, taking it back
    // from the worst states; total L1 movement is at most beta.
    int top = order_desc.front();
    double add = std::min(beta / 2.0, 1.0 - q[top]);
    q[top] += add;
    double excess = add;
    for (auto it = order_desc.rbegin(); it != order_desc.rend() && excess > 0.0; ++it) {
        if (*it == top) continue;
        double take = std::min(excess, q[*it]);
        q[*it] -= take;
        excess -= take;
    }
    return q;
}

void optimistic_backup_serial(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                              const Vec& u, double self_w, double p_w, Vec& out,
                              std::vector<int>* greedy) {
    std::vector<int> order = descending_order(u);
    for (int s = 0; s < S; ++s)
        optimistic_state(S, A, p_hat, beta, reward, u, self_w, p_w, order, s, out, greedy);
}

void optimistic_backup_parallel(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                                const Vec& u, double self_w, double p_w, Vec& out,
                                std::vector<int>* greedy) {
    std::vector<int> order = descending_order(u);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < S; ++s)
        optimistic_state(S, A, p_hat, beta, reward, u, self_w, p_w, order, s, out, greedy);
}

void optimistic_backup(int S, int A, const Vec& p_hat, const Vec& beta, const Vec& reward,
                       const Vec& u, double self_w, double p_w, Vec& out, std::vector<int>* greedy,
                       Exec exec) {
    bool parallel =
        exec == Exec::parallel || (exec == Exec::automatic && S * A >= kParallelThreshold);
    if (parallel)
        optimistic_backup_parallel(S, A, p_hat, beta, reward, u, self_w, p_w, out, greedy);
    else
        optimistic_backup_serial(S, A, p_hat, beta, reward, u, self_w, p_w, out, greedy);
}

ViResult value_iteration(const TabularMdp& mdp, const Vec& reward, double tol, int max_iters,
                         Exec exec) {
    if (mdp.mode != Mode::discounted)
        throw UnsupportedOperation("value_iteration: discounted mode only");
    const int S = mdp.num_states;
    ViResult res;
    res.value.assign(S, 0.0);
    res.greedy.assign(S, 0);
    Vec next(S, 0.0);
    for (int i = 1; i <= max_iters; ++i) {
        bellman_backup(mdp, reward, res.value, 0.0, mdp.gamma, next, &res.greedy, exec);
        double diff = 0.0;
        for (int s = 0; s < S; ++s) diff = std::max(diff, std::abs(next[s] - res.value[s]));
        res.value.swap(next);
        res.iters = i;
        res.residual = diff;
        if (diff <= tol) return res;
    }
    return res;
}

RviResult relative_value_iteration(const TabularMdp& mdp, const Vec& reward, double tol,
                                   int max_iters, Exec exec) {
    const int S = mdp.num_states;
    const double tau = kAperiodicityTau;
    RviResult res;
    res.bias.assign(S, 0.0);
    res.greedy.assign(S, 0);
    Vec next(S, 0.0), diff(S, 0.0);
    for (int i = 1; i <= max_iters; ++i) {
        bellman_backup(mdp, reward, res.bias, tau, 1.0 - tau, next, &res.greedy, exec);
        double lo = next[0] - res.bias[0], hi = lo;
        for (int s = 0; s < S; ++s) {
            diff[s] = next[s] - res.bias[s];
            lo = std::min(lo, diff[s]);
            hi = std::max(hi, diff[s]);
        }
        res.gain = 0.5 * (lo + hi);
        res.iters = i;
        res.span_residual = hi - lo;
        // Re-anchor to keep the bias bounded.
        double anchor = next[0];
        for (int s = 0; s < S; ++s) res.bias[s] = next[s] - anchor;
        if (res.span_residual <= tol) return res;
    }
    throw AverageModeNotUnichain(
        "relative_value_iteration: span did not converge (multichain input?)");
}

}  // namespace cvxmdp
