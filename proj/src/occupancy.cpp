#include <Eigen/Dense>
#include <cmath>

#include "cvxmdp/mdp.hpp"

namespace cvxmdp {

Vec stationary_distribution(const Vec& chain, int num_states) {
    const int n = num_states;
    if (chain.size() != static_cast<std::size_t>(n) * n)
        throw DimensionMismatch("stationary_distribution: chain size mismatch");
    if (count_closed_classes(chain, n) != 1)
        throw AverageModeNotUnichain("stationary_distribution: chain has multiple closed classes");

    // Unit-eigenvalue system (I - P^T) mu = 0 stacked with the normalization
    // row; unichain makes the solution unique, so least squares is exact.
    Eigen::MatrixXd A(n + 1, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A(i, j) = (i == j ? 1.0 : 0.0) - chain[j * static_cast<std::size_t>(n) + i];
    for (int j = 0; j < n; ++j) A(n, j) = 1.0;
    b(n) = 1.0;

    Eigen::VectorXd mu = A.colPivHouseholderQr().solve(b);

    Vec out(n);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::max(0.0, mu(i));
        mass += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= mass;

    double resid = 0.0;
    for (int t = 0; t < n; ++t) {
        double acc = -out[t];
        for (int s = 0; s < n; ++s) acc += out[s] * chain[s * static_cast<std::size_t>(n) + t];
        resid = std::max(resid, std::abs(acc));
    }
    if (resid > 1e-12)
        throw AverageModeNotUnichain("stationary_distribution: residual above 1e-12");
    return out;
}

OccupancyMeasure occupancy_of_policy(const TabularMdp& mdp, const Policy& policy) {
    mdp.check();
    policy.check();
    if (policy.num_states != mdp.num_states || policy.num_actions != mdp.num_actions)
        throw DimensionMismatch("occupancy_of_policy: policy/mdp shape mismatch");
    const int S = mdp.num_states, A = mdp.num_actions;
    Vec chain = induced_chain(mdp, policy);

    Vec mu(S);
    if (mdp.mode == Mode::discounted) {
        // (I - gamma * P_pi^T) mu = (1 - gamma) * d0
        Eigen::MatrixXd M(S, S);
        Eigen::VectorXd rhs(S);
        for (int i = 0; i < S; ++i) {
            rhs(i) = (1.0 - mdp.gamma) * mdp.initial_dist[i];
            for (int j = 0; j < S; ++j)
                M(i, j) =
                    (i == j ? 1.0 : 0.0) - mdp.gamma * chain[j * static_cast<std::size_t>(S) + i];
        }
        Eigen::VectorXd x = M.partialPivLu().solve(rhs);
        for (int i = 0; i < S; ++i) mu[i] = std::max(0.0, x(i));
    } else {
        mu = stationary_distribution(chain, S);
    }

    OccupancyMeasure d;
    d.num_states = S;
    d.num_actions = A;
    d.mode = mdp.mode;
    d.gamma = mdp.gamma;
    d.values.resize(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) d.values[s * A + a] = mu[s] * policy.prob(s, a);
    return d;
}

Policy policy_of_occupancy(const TabularMdp& mdp, const Vec& d) {
    const int S = mdp.num_states, A = mdp.num_actions;
    if (d.size() != static_cast<std::size_t>(S) * A)
        throw DimensionMismatch("policy_of_occupancy: occupancy size mismatch");
    Policy pi;
    pi.num_states = S;
    pi.num_actions = A;
    pi.probs.assign(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
        double marginal = 0.0;
        for (int a = 0; a < A; ++a) marginal += d[s * A + a];
        if (marginal > 1e-12) {
            for (int a = 0; a < A; ++a) pi.probs[s * A + a] = std::max(0.0, d[s * A + a]) / marginal;
            // Renormalize after clipping negatives.
            double mass = 0.0;
            for (int a = 0; a < A; ++a) mass += pi.probs[s * A + a];
            for (int a = 0; a < A; ++a) pi.probs[s * A + a] /= mass;
        } else {
            for (int a = 0; a < A; ++a) pi.probs[s * A + a] = 1.0 / A;
        }
    }
    return pi;
}

std::vector<OccupancyViolation> validate_occupancy(const TabularMdp& mdp, const Vec& d,
                                                   double tol) {
    const int S = mdp.num_states, A = mdp.num_actions;
    if (d.size() != static_cast<std::size_t>(S) * A)
        throw DimensionMismatch("validate_occupancy: occupancy size mismatch");
    std::vector<OccupancyViolation> out;

    double mass = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        mass += d[i];
        if (d[i] < -tol)
            out.push_back({OccupancyViolation::Kind::negative_entry, static_cast<int>(i), -d[i]});
    }
    if (std::abs(mass - 1.0) > tol)
        out.push_back({OccupancyViolation::Kind::total_mass, -1, std::abs(mass - 1.0)});

    // Flow constraints: per state, out-mass equals (discount-weighted) in-mass.
    for (int t = 0; t < S; ++t) {
        double lhs = 0.0;
        for (int a = 0; a < A; ++a) lhs += d[t * A + a];
        double in = 0.0;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) in += mdp.row(s, a)[t] * d[s * A + a];
        double rhs = (mdp.mode == Mode::discounted)
                         ? (1.0 - mdp.gamma) * mdp.initial_dist[t] + mdp.gamma * in
                         : in;
        if (std::abs(lhs - rhs) > tol)
            out.push_back({OccupancyViolation::Kind::flow, t, std::abs(lhs - rhs)});
    }
    return out;
}

}  // namespace cvxmdp
