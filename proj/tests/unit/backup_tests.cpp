#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvxmdp/backup.hpp"
#include "doctest.h"

using namespace cvxmdp;

namespace {

Vec seeded_reward(int n, std::uint64_t seed) {
    auto rng = make_rng(seed, 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vec r(n);
    for (double& v : r) v = unit(rng);
    return r;
}

std::vector<int> order_by_desc(const Vec& u) {
    std::vector<int> order(u.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return u[a] > u[b]; });
    return order;
}

}  // namespace

TEST_CASE("serial and parallel sweeps agree bitwise") {
    TabularMdp m = make_random_mdp(40, 4, 5, 9, Mode::discounted, 0.9);
    Vec reward = seeded_reward(m.dim(), 10);
    Vec u = seeded_reward(m.num_states, 11);
    Vec a(m.num_states), b(m.num_states);
    std::vector<int> ga(m.num_states), gb(m.num_states);
    bellman_backup_serial(m, reward, u, 0.0, m.gamma, a, &ga);
    bellman_backup_parallel(m, reward, u, 0.0, m.gamma, b, &gb);
    CHECK(a == b);
    CHECK(ga == gb);

    // Average-mode weights exercise the self-loop blend path.
    bellman_backup_serial(m, reward, u, kAperiodicityTau, 1.0 - kAperiodicityTau, a, &ga);
    bellman_backup_parallel(m, reward, u, kAperiodicityTau, 1.0 - kAperiodicityTau, b, &gb);
    CHECK(a == b);
    CHECK(ga == gb);
}

TEST_CASE("value iteration solves a two-state chain exactly") {
    // s0: action 0 stays (reward 0), action 1 moves to s1 (reward 0);
    // s1 absorbs with reward 1. gamma = 0.5 gives V(s1) = 2, V(s0) = 1.
    TabularMdp m;
    m.num_states = 2;
    m.num_actions = 2;
    m.mode = Mode::discounted;
    m.gamma = 0.5;
    m.transition = {1.0, 0.0, 0.0, 1.0,  // s0
                    0.0, 1.0, 0.0, 1.0}; // s1 absorbs under both actions
    m.initial_dist = {1.0, 0.0};
    m.check();
    Vec reward = {0.0, 0.0, 1.0, 1.0};
    ViResult res = value_iteration(m, reward, 1e-12);
    CHECK(res.value[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(res.value[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.greedy[0] == 1);
    CHECK(res.residual <= 1e-12);
    CHECK(res.iters > 0);
}

TEST_CASE("relative value iteration finds the gain of a periodic cycle") {
    // Deterministic 2-cycle with rewards (1, 0): gain 1/2. The span residual
    // of plain sweeps would oscillate forever; the lazy blend converges.
    TabularMdp m;
    m.num_states = 2;
    m.num_actions = 1;
    m.mode = Mode::average;
    m.transition = {0.0, 1.0, 1.0, 0.0};
    m.initial_dist = {1.0, 0.0};
    m.check();
    Vec reward = {1.0, 0.0};
    RviResult res = relative_value_iteration(m, reward, 1e-10);
    CHECK(res.gain == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(res.span_residual <= 1e-10);
}

TEST_CASE("rvi greedy maximizes average reward on the two-state switch") {
    TabularMdp m = make_symmetric_two_state(0.9, Mode::average);
    // Reward favors living in state 1 under its stay action.
    Vec reward = {0.0, 0.0, 1.0, 0.0};
    RviResult res = relative_value_iteration(m, reward, 1e-10);
    // Stationary of (switch, stay) is (0.1, 0.9), so the gain is 0.9.
    CHECK(res.greedy[1] == 0);  // stay once there
    CHECK(res.greedy[0] == 1);  // switch toward it
    CHECK(res.gain == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("optimistic row tilts mass toward high values") {
    Vec p_hat = {0.5, 0.5};
    Vec u = {0.0, 1.0};
    auto order = order_by_desc(u);
    Vec q = optimistic_row(p_hat.data(), 2, 0.4, order);
    CHECK(q[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.7).epsilon(1e-12));

    // Radius 0 returns the empirical row; radius 2 moves everything to the top.
    Vec q0 = optimistic_row(p_hat.data(), 2, 0.0, order);
    CHECK(q0[0] == doctest::Approx(0.5));
    Vec q2 = optimistic_row(p_hat.data(), 2, 2.0, order);
    CHECK(q2[1] == doctest::Approx(1.0));
    CHECK(q2[0] == doctest::Approx(0.0));
}

TEST_CASE("optimistic row value is monotone in the radius") {
    auto rng = make_rng(21, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 5;
        Vec p(n), u(n);
        double mass = 0.0;
        for (int i = 0; i < n; ++i) mass += (p[i] = unit(rng) + 1e-3);
        for (int i = 0; i < n; ++i) p[i] /= mass;
        for (int i = 0; i < n; ++i) u[i] = unit(rng);
        auto order = order_by_desc(u);
        double prev = -1e300;
        for (double beta : {0.0, 0.1, 0.3, 0.7, 1.3, 2.0}) {
            Vec q = optimistic_row(p.data(), n, beta, order);
            double total = 0.0, val = 0.0;
            for (int i = 0; i < n; ++i) {
                CHECK(q[i] >= -1e-15);
                total += q[i];
                val += q[i] * u[i];
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(val >= prev - 1e-12);
            // Stays within the prescribed L1 ball.
            double l1 = 0.0;
            for (int i = 0; i < n; ++i) l1 += std::abs(q[i] - p[i]);
            CHECK(l1 <= beta + 1e-12);
            prev = val;
        }
    }
}

TEST_CASE("optimistic backup kernels agree and reduce to plain backup") {
    const int S = 12, A = 3;
    TabularMdp m = make_random_mdp(S, A, 4, 33, Mode::average);
    Vec reward = seeded_reward(S * A, 34);
    Vec u = seeded_reward(S, 35);
    Vec beta(static_cast<std::size_t>(S) * A, 0.35);

    Vec a(S), b(S);
    std::vector<int> ga(S), gb(S);
    optimistic_backup_serial(S, A, m.transition, beta, reward, u, kAperiodicityTau,
                             1.0 - kAperiodicityTau, a, &ga);
    optimistic_backup_parallel(S, A, m.transition, beta, reward, u, kAperiodicityTau,
                               1.0 - kAperiodicityTau, b, &gb);
    CHECK(a == b);
    CHECK(ga == gb);

    // Zero radii collapse to the standard sweep.
    Vec zero(static_cast<std::size_t>(S) * A, 0.0);
    Vec plain(S), opt(S);
    bellman_backup_serial(m, reward, u, kAperiodicityTau, 1.0 - kAperiodicityTau, plain, nullptr);
    optimistic_backup_serial(S, A, m.transition, zero, reward, u, kAperiodicityTau,
                             1.0 - kAperiodicityTau, opt, nullptr);
    for (int s = 0; s < S; ++s) CHECK(opt[s] == doctest::Approx(plain[s]).epsilon(1e-12));

    // Wider radii never lower the backup.
    for (int s = 0; s < S; ++s) CHECK(a[s] >= opt[s] - 1e-12);
}
