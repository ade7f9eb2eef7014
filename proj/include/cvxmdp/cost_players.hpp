#pragma once

#include <memory>

#include "cvxmdp/objectives.hpp"

namespace cvxmdp {

// Cost vector with the sup-norm bound its producer certifies.
struct CostVector {
    Vec values;
    double bound = 0.0;
    void check() const {
        if (sup_norm(values) > bound + 1e-12)
            throw DimensionMismatch("CostVector: entry exceeds certified bound");
    }
};

// Euclidean projection onto the sup-norm box of the given radius.
Vec project_box(Vec y, double radius);

// Euclidean projection onto the probability simplex.
Vec project_simplex(Vec y);

// One multiplicative-weights step on a weight simplex: w_i' proportional to
// w_i * exp(alpha * payoff_i).
Vec mw_update(const Vec& weights, const Vec& payoffs, double alpha);

enum class CostPlayerKind { ftl, ogd, mw };

struct CostPlayerConfig {
    CostPlayerKind kind = CostPlayerKind::ftl;
    // Step size alpha_t = lr_c / t^lr_exp; lr_c = 0 picks the default
    // (radius * sqrt(1/dim) for ogd, sqrt(log(2*dim)) for mw).
    double lr_c = 0.0;
    double lr_exp = 0.5;
};

// Produces the iteration-k cost from the occupancy history. d_prev is the
// occupancy of iteration k-1 and dbar_prev the running average of
// d^1..d^{k-1}; both are null at k=1.
class CostPlayer {
  public:
    virtual ~CostPlayer() = default;
    virtual CostVector next(int k, const Vec* d_prev, const Vec* dbar_prev) = 0;
};

// Follow-the-leader: the gradient of f at the running average (cold start:
// gradient at the uniform mass-1 vector).
class FtlCostPlayer : public CostPlayer {
  public:
    explicit FtlCostPlayer(const ConvexObjective& objective);
    CostVector next(int k, const Vec* d_prev, const Vec* dbar_prev) override;

  private:
    const ConvexObjective& objective_;
};

// Online gradient ascent with the squared-Euclidean Bregman on a box (or
// singleton) dual set. Ascends d - grad(f*)(lambda), or d - anchor for
// bilinear games.
class OgdCostPlayer : public CostPlayer {
  public:
    OgdCostPlayer(const ConvexObjective& objective, CostPlayerConfig config);
    CostVector next(int k, const Vec* d_prev, const Vec* dbar_prev) override;

  private:
    const ConvexObjective& objective_;
    CostPlayerConfig config_;
    DualSet set_;
    Vec lambda_;
    bool initialized_ = false;
};

// Multiplicative weights with the entropy Bregman over the L1 ball, realized
// as a weight simplex over the 2n signed coordinate atoms. Requires an
// l1_ball dual set; box sets are an entropy-domain error.
class MwCostPlayer : public CostPlayer {
  public:
    MwCostPlayer(const ConvexObjective& objective, CostPlayerConfig config);
    CostVector next(int k, const Vec* d_prev, const Vec* dbar_prev) override;

  private:
    const ConvexObjective& objective_;
    CostPlayerConfig config_;
    double radius_;
    Vec weights_;  // 2n atoms: +e_i at 2i, -e_i at 2i+1
};

std::unique_ptr<CostPlayer> make_cost_player(const ConvexObjective& objective,
                                             const CostPlayerConfig& config);

// Average cost-player regret over a finished run: mean of the per-iteration
// losses l_k(lambda) = f*(lambda) - lambda.d^k at the played costs, minus the
// best fixed comparator from `comparators` plus the hindsight gradient
// grad f(dbar). f* is the exact bilinear conjugate when available and a grid
// estimate over `conj_grid` otherwise.
double cost_player_regret(const std::vector<Vec>& lambdas, const std::vector<Vec>& ds,
                          const ConvexObjective& objective, std::vector<Vec> comparators,
                          const std::vector<Vec>& conj_grid);

}  // namespace cvxmdp
