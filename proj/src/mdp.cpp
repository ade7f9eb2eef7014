#include "cvxmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cvxmdp {

void TabularMdp::check(double tol) const {
    if (num_states <= 0 || num_actions <= 0)
        throw DimensionMismatch("TabularMdp: nonpositive dimensions");
    const std::size_t want = static_cast<std::size_t>(num_states) * num_actions * num_states;
    if (transition.size() != want)
        throw DimensionMismatch("TabularMdp: transition size mismatch");
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            const double* p = row(s, a);
            double mass = 0.0;
            for (int t = 0; t < num_states; ++t) {
                if (p[t] < -tol) throw DimensionMismatch("TabularMdp: negative transition entry");
                mass += p[t];
            }
            if (std::abs(mass - 1.0) > tol)
                throw DimensionMismatch("TabularMdp: transition row does not sum to 1");
        }
    }
    if (mode == Mode::discounted) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw DimensionMismatch("TabularMdp: gamma outside (0,1)");
        if (initial_dist.size() != static_cast<std::size_t>(num_states))
            throw DimensionMismatch("TabularMdp: initial_dist size mismatch");
        double mass = 0.0;
        for (double v : initial_dist) {
            if (v < -tol) throw DimensionMismatch("TabularMdp: negative initial_dist entry");
            mass += v;
        }
        if (std::abs(mass - 1.0) > tol)
            throw DimensionMismatch("TabularMdp: initial_dist does not sum to 1");
    }
}

Policy Policy::uniform(int num_states, int num_actions) {
    Policy pi;
    pi.num_states = num_states;
    pi.num_actions = num_actions;
    pi.probs.assign(static_cast<std::size_t>(num_states) * num_actions, 1.0 / num_actions);
    return pi;
}

Policy Policy::deterministic(int num_states, int num_actions, const std::vector<int>& actions) {
    if (actions.size() != static_cast<std::size_t>(num_states))
        throw DimensionMismatch("Policy::deterministic: one action per state required");
    Policy pi;
    pi.num_states = num_states;
    pi.num_actions = num_actions;
    pi.probs.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
    for (int s = 0; s < num_states; ++s) {
        if (actions[s] < 0 || actions[s] >= num_actions)
            throw DimensionMismatch("Policy::deterministic: action index out of range");
        pi.probs[s * num_actions + actions[s]] = 1.0;
    }
    return pi;
}

void Policy::check(double tol) const {
    if (probs.size() != static_cast<std::size_t>(num_states) * num_actions)
        throw DimensionMismatch("Policy: probs size mismatch");
    for (int s = 0; s < num_states; ++s) {
        double mass = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            double v = prob(s, a);
            if (v < -tol) throw DimensionMismatch("Policy: negative probability");
            mass += v;
        }
        if (std::abs(mass - 1.0) > tol) throw DimensionMismatch("Policy: row does not sum to 1");
    }
}

Vec induced_chain(const TabularMdp& mdp, const Policy& policy) {
    if (policy.num_states != mdp.num_states || policy.num_actions != mdp.num_actions)
        throw DimensionMismatch("induced_chain: policy/mdp shape mismatch");
    const int S = mdp.num_states, A = mdp.num_actions;
    Vec chain(static_cast<std::size_t>(S) * S, 0.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double w = policy.prob(s, a);
            if (w == 0.0) continue;
            const double* p = mdp.row(s, a);
            for (int t = 0; t < S; ++t) chain[s * S + t] += w * p[t];
        }
    }
    return chain;
}

namespace {

constexpr double kEdgeEps = 1e-15;

// Strongly connected components by iterative Kosaraju; returns component id
// per state.
std::vector<int> scc_ids(const Vec& chain, int n) {
    std::vector<std::vector<int>> fwd(n), rev(n);
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (chain[s * n + t] > kEdgeEps) {
                fwd[s].push_back(t);
                rev[t].push_back(s);
            }

    std::vector<int> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    for (int s0 = 0; s0 < n; ++s0) {
        if (seen[s0]) continue;
        // Iterative DFS recording finish order.
        std::vector<std::pair<int, std::size_t>> stack{{s0, 0}};
        seen[s0] = 1;
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next < fwd[u].size()) {
                int v = fwd[u][next++];
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.emplace_back(v, 0);
                }
            } else {
                order.push_back(u);
                stack.pop_back();
            }
        }
    }

    std::vector<int> comp(n, -1);
    int num_comp = 0;
    for (int i = n - 1; i >= 0; --i) {
        int s0 = order[i];
        if (comp[s0] != -1) continue;
        std::vector<int> stack{s0};
        comp[s0] = num_comp;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : rev[u])
                if (comp[v] == -1) {
                    comp[v] = num_comp;
                    stack.push_back(v);
                }
        }
        ++num_comp;
    }
    return comp;
}

}  // namespace

int count_closed_classes(const Vec& chain, int num_states) {
    const int n = num_states;
    std::vector<int> comp = scc_ids(chain, n);
    int num_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<char> leaks(num_comp, 0);
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (chain[s * n + t] > kEdgeEps && comp[s] != comp[t]) leaks[comp[s]] = 1;
    int closed = 0;
    for (int c = 0; c < num_comp; ++c)
        if (!leaks[c]) ++closed;
    return closed;
}

TabularMdp make_gridworld(int width, int height, double slip_prob, Mode mode, double gamma) {
    if (width <= 0 || height <= 0) throw DimensionMismatch("make_gridworld: nonpositive size");
    if (slip_prob < 0.0 || slip_prob > 1.0)
        throw DimensionMismatch("make_gridworld: slip_prob outside [0,1]");
    const int S = width * height, A = 4;
    TabularMdp mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.mode = mode;
    mdp.gamma = gamma;
    mdp.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);
    mdp.initial_dist.assign(S, 1.0 / S);

    const int dx[4] = {0, 1, 0, -1};  // north, east, south, west
    const int dy[4] = {-1, 0, 1, 0};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int s = y * width + x;
            for (int a = 0; a < A; ++a) {
                double* p =
                    mdp.transition.data() + static_cast<std::size_t>(s * A + a) * S;
                for (int dir = 0; dir < 4; ++dir) {
                    double w = (dir == a) ? 1.0 - slip_prob : slip_prob / 3.0;
                    int nx = x + dx[dir], ny = y + dy[dir];
                    int t = (nx < 0 || nx >= width || ny < 0 || ny >= height) ? s
                                                                              : ny * width + nx;
                    p[t] += w;
                }
            }
        }
    }
    mdp.check();
    return mdp;
}

DeepSea make_deep_sea(int depth, Mode mode, double gamma) {
    if (depth < 2) throw DimensionMismatch("make_deep_sea: depth must be at least 2");
    const int S = depth, A = 2;
    DeepSea env;
    TabularMdp& mdp = env.mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.mode = mode;
    mdp.gamma = gamma;
    mdp.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);
    mdp.initial_dist.assign(S, 0.0);
    mdp.initial_dist[0] = 1.0;
    env.extrinsic_reward.assign(static_cast<std::size_t>(S) * A, 0.0);

    const double move_cost = 0.01 / depth;
    for (int s = 0; s < S; ++s) {
        // action 0: restart
        mdp.transition[static_cast<std::size_t>(s * A + 0) * S + 0] = 1.0;
        // action 1: advance (wraps to the start from the last state)
        int t = (s + 1 < S) ? s + 1 : 0;
        mdp.transition[static_cast<std::size_t>(s * A + 1) * S + t] = 1.0;
        env.extrinsic_reward[s * A + 1] = (s + 1 < S) ? -move_cost : 1.0 - move_cost;
    }
    mdp.check();
    return env;
}

TabularMdp make_random_mdp(int num_states, int num_actions, int branching, std::uint64_t seed,
                           Mode mode, double gamma) {
    if (num_states <= 0 || num_actions <= 0)
        throw DimensionMismatch("make_random_mdp: nonpositive dimensions");
    branching = std::clamp(branching, 1, num_states);
    const int S = num_states, A = num_actions;
    TabularMdp mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.mode = mode;
    mdp.gamma = gamma;
    mdp.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);
    mdp.initial_dist.assign(S, 1.0 / S);

    std::mt19937_64 rng = make_rng(seed, 0);
    std::vector<int> pool(S);
    std::exponential_distribution<double> expo(1.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            std::iota(pool.begin(), pool.end(), 0);
            // Partial Fisher-Yates draw of `branching` distinct successors.
            for (int i = 0; i < branching; ++i) {
                std::uniform_int_distribution<int> pick(i, S - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            double* p = mdp.transition.data() + static_cast<std::size_t>(s * A + a) * S;
            double total = 0.0;
            Vec w(branching);
            for (int i = 0; i < branching; ++i) {
                w[i] = expo(rng);
                total += w[i];
            }
            for (int i = 0; i < branching; ++i) p[pool[i]] = w[i] / total;
        }
    }
    mdp.check();
    return mdp;
}

TabularMdp make_symmetric_two_state(double move_prob, Mode mode, double gamma) {
    if (move_prob <= 0.0 || move_prob >= 1.0)
        throw DimensionMismatch("make_symmetric_two_state: move_prob outside (0,1)");
    TabularMdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 2;
    mdp.mode = mode;
    mdp.gamma = gamma;
    mdp.transition.assign(2 * 2 * 2, 0.0);
    mdp.initial_dist = {0.5, 0.5};
    const double p = move_prob;
    for (int s = 0; s < 2; ++s) {
        int o = 1 - s;
        mdp.transition[static_cast<std::size_t>(s * 2 + 0) * 2 + s] = p;        // stay
        mdp.transition[static_cast<std::size_t>(s * 2 + 0) * 2 + o] = 1.0 - p;
        mdp.transition[static_cast<std::size_t>(s * 2 + 1) * 2 + o] = p;        // switch
        mdp.transition[static_cast<std::size_t>(s * 2 + 1) * 2 + s] = 1.0 - p;
    }
    mdp.check();
    return mdp;
}

}  // namespace cvxmdp
