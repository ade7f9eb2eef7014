#pragma once

#include <memory>
#include <string>

#include "cvxmdp/common.hpp"

namespace cvxmdp {

// Set the cost player optimizes over. `box` is the sup-norm ball of the given
// radius (the default dual realization), `l1_ball` the L1 ball (bilinear
// sup-norm games), `singleton` a fixed point (linear objectives).
struct DualSet {
    enum class Kind { box, l1_ball, singleton };
    Kind kind = Kind::box;
    double radius = 0.0;
    Vec point;  // singleton only
};

// Expert occupancy with provenance: exact experts come from a policy's flow
// solve and satisfy the polytope constraints; empirical ones are estimates.
struct ExpertOccupancy {
    Vec d;
    bool exact = true;
};

// eps-mixes an expert with the uniform vector so KL-type objectives see full
// support. Preserves total mass.
Vec smooth_expert(const Vec& d_expert, double eps = 1e-6);

class ConvexObjective {
  public:
    virtual ~ConvexObjective() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual double value(const Vec& d) const = 0;

    virtual bool has_gradient() const { return true; }
    virtual Vec gradient(const Vec& d) const = 0;

    // Gradient of the convex conjugate, where a closed form exists; used by
    // mirror-ascent cost players on non-bilinear objectives.
    virtual bool has_conjugate_grad() const { return false; }
    virtual Vec conjugate_grad(const Vec&) const {
        throw UnsupportedOperation(name() + ": conjugate gradient unavailable");
    }

    // Sup-norm bound on gradients over the feasible set; also the box radius
    // of the default dual set and the cost normalizer for policy players.
    virtual double grad_bound() const = 0;
    virtual bool is_convex() const { return true; }
    virtual DualSet dual_set() const { return DualSet{DualSet::Kind::box, grad_bound(), {}}; }

    // Bilinear game form f(d) = max over the dual set of lambda.(d - anchor),
    // for which the conjugate is exactly lambda.anchor.
    virtual bool is_bilinear() const { return false; }
    virtual const Vec* anchor() const { return nullptr; }
};

// f(d) = lambda0.d; the dual set degenerates to { lambda0 }.
class LinearObjective : public ConvexObjective {
  public:
    explicit LinearObjective(Vec lambda0);
    std::string name() const override { return "linear"; }
    int dim() const override { return static_cast<int>(lambda0_.size()); }
    double value(const Vec& d) const override;
    Vec gradient(const Vec&) const override { return lambda0_; }
    double grad_bound() const override { return bound_; }
    DualSet dual_set() const override { return DualSet{DualSet::Kind::singleton, 0.0, lambda0_}; }

  private:
    Vec lambda0_;
    double bound_;
};

// f(d) = sum_i d_i log d_i (negative entropy). Gradients take the floor
// max(d, 1e-12) so boundary points stay finite.
class NegEntropyObjective : public ConvexObjective {
  public:
    explicit NegEntropyObjective(int dim) : dim_(dim) {}
    static constexpr double kFloor = 1e-12;
    std::string name() const override { return "neg_entropy"; }
    int dim() const override { return dim_; }
    double value(const Vec& d) const override;
    Vec gradient(const Vec& d) const override;
    bool has_conjugate_grad() const override { return true; }
    Vec conjugate_grad(const Vec& y) const override;  // exp(y - 1)
    double grad_bound() const override { return -(1.0 + std::log(kFloor)); }

  private:
    int dim_;
};

// f(d) = ||d - d_E||_2^2
class L2AlObjective : public ConvexObjective {
  public:
    explicit L2AlObjective(Vec expert);
    std::string name() const override { return "l2_al"; }
    int dim() const override { return static_cast<int>(expert_.size()); }
    double value(const Vec& d) const override;
    Vec gradient(const Vec& d) const override;
    bool has_conjugate_grad() const override { return true; }
    Vec conjugate_grad(const Vec& y) const override;  // d_E + y/2
    double grad_bound() const override { return 2.0; }
    const Vec& expert() const { return expert_; }

  private:
    Vec expert_;
};

// f(d) = KL(d || d_E). Requires a fully supported expert; smooth first.
class KlObjective : public ConvexObjective {
  public:
    explicit KlObjective(Vec expert);
    static constexpr double kFloor = 1e-12;
    std::string name() const override { return "kl"; }
    int dim() const override { return static_cast<int>(expert_.size()); }
    double value(const Vec& d) const override;
    Vec gradient(const Vec& d) const override;
    bool has_conjugate_grad() const override { return true; }
    Vec conjugate_grad(const Vec& y) const override;  // d_E * exp(y - 1)
    double grad_bound() const override { return bound_; }

  private:
    Vec expert_;
    double bound_;
};

// f(d) = ||d - d_E||_inf in its game form: payoffs lambda.(d - d_E) with
// lambda in the unit L1 ball. No gradient is exposed; cost players act on the
// bilinear structure directly.
class LinfAlObjective : public ConvexObjective {
  public:
    explicit LinfAlObjective(Vec expert);
    std::string name() const override { return "linf_al"; }
    int dim() const override { return static_cast<int>(expert_.size()); }
    double value(const Vec& d) const override;
    bool has_gradient() const override { return false; }
    Vec gradient(const Vec&) const override {
        throw UnsupportedOperation("linf_al: game form only, no gradient");
    }
    double grad_bound() const override { return 1.0; }
    DualSet dual_set() const override { return DualSet{DualSet::Kind::l1_ball, 1.0, {}}; }
    bool is_bilinear() const override { return true; }
    const Vec* anchor() const override { return &expert_; }

  private:
    Vec expert_;
};

// Per-skill state marginals with a prior over skills.
struct SkillSet {
    Vec prior;                   // Z entries, simplex
    std::vector<Vec> marginals;  // Z vectors of S entries, each mass 1
    int num_skills() const { return static_cast<int>(prior.size()); }
    int num_states() const { return marginals.empty() ? 0 : static_cast<int>(marginals[0].size()); }
    void check(double tol = 1e-8) const;
    Vec concat() const;
    static SkillSet from_concat(const Vec& prior, const Vec& x);
};

// Skill-diversity objective over concatenated per-skill state marginals
// x = [d^1; ...; d^Z]:  f(x) = sum_z p(z) KL(d^z || sum_k p(k) d^k),
// negated when `maximize` (the skill-discovery direction, non-convex).
//
// gradient() is the exact analytic gradient of value(). The per-skill costs
// the skill game hands its policy players (the discriminator-style reward
// log p(z|s) - log p(z), optionally plus the correction 1 - p(z|s), optionally
// minus the constant 1) come from skill_rewards() instead; the correction term
// is the derivative of skill z's own KL term alone, which is deliberately not
// the joint gradient.
class DiaynObjective : public ConvexObjective {
  public:
    enum class RewardVariant { mi, gradient_corrected, gradient_corrected_no_const };
    static constexpr double kFloor = 1e-12;

    DiaynObjective(Vec prior, int num_states, bool maximize = true,
                   RewardVariant variant = RewardVariant::gradient_corrected);

    std::string name() const override { return "diayn"; }
    int dim() const override { return static_cast<int>(prior_.size()) * num_states_; }
    int num_skills() const { return static_cast<int>(prior_.size()); }
    int num_states() const { return num_states_; }
    const Vec& prior() const { return prior_; }
    RewardVariant variant() const { return variant_; }

    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    double grad_bound() const override { return bound_; }
    bool is_convex() const override { return !maximize_; }

    // Identity check form: sum_z p(z) sum_s d^z(s) (log p(z|s) - log p(z)).
    double value_bayes_form(const Vec& x) const;
    // Posterior p(z|s) stacked z-major; throws ZeroMixtureState when the
    // mixture vanishes at a state some skill visits.
    Vec posterior(const Vec& x) const;
    // Per-skill rewards (stacked z-major, length Z*S) under the configured
    // variant.
    Vec skill_rewards(const Vec& x) const;

  private:
    Vec prior_;
    int num_states_;
    bool maximize_;
    RewardVariant variant_;
    double bound_;
};

// Grid lower bound on the convex conjugate f*(y) = max_d y.d - f(d).
double fenchel_conjugate_check(const ConvexObjective& objective, const Vec& y,
                               const std::vector<Vec>& grid);

}  // namespace cvxmdp
