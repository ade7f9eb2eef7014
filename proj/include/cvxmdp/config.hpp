#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "cvxmdp/game.hpp"

namespace cvxmdp {

// One experiment: an environment, an objective, a player pair, and a game
// budget, parsed from a single JSON document. Validation errors carry the
// dotted field path.
struct ExperimentConfig {
    enum class EnvType { gridworld, deep_sea, random, two_state };
    enum class ObjectiveType { linear, neg_entropy, l2_al, kl, linf_al, diayn };

    std::string name = "run";
    Mode mode = Mode::average;
    double gamma = 0.95;

    EnvType env_type = EnvType::gridworld;
    int width = 5, height = 5;
    double slip = 0.2;
    int depth = 8;
    int rand_states = 6, rand_actions = 3, rand_branching = 3;
    std::uint64_t env_seed = 1;
    double move_prob = 0.9;

    ObjectiveType objective_type = ObjectiveType::neg_entropy;
    Vec linear_cost;                  // linear
    std::vector<int> expert_actions;  // deterministic expert policy (al / kl / linf)
    Vec expert_policy_probs;          // stochastic expert policy, row-major S*A
    Vec expert_occupancy;             // explicit alternative to a policy expert
    double smooth_eps = 1e-6;         // kl expert smoothing
    int skills = 8;                   // diayn
    Vec prior_weights;                // empty means uniform unless prior_seed set
    std::uint64_t prior_seed = 0;     // nonzero draws pinned random weights
    bool maximize = true;
    DiaynObjective::RewardVariant variant = DiaynObjective::RewardVariant::gradient_corrected;

    CostPlayerConfig cost;
    PolicyPlayerConfig policy;
    GameConfig game;
    SkillGameConfig skill_game;
    std::vector<ConstraintSpec> constraints;
    ConstrainedConfig constrained;
    std::vector<std::uint64_t> seeds = {1};

    nlohmann::json echo;  // the parsed document, persisted into summaries

    TabularMdp build_mdp() const;
    // Deep-sea extrinsic reward as a cost vector (negated), used when the
    // linear objective is configured with "cost": "neg_extrinsic".
    Vec deep_sea_cost() const;
    std::unique_ptr<ConvexObjective> build_objective(const TabularMdp& mdp) const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace cvxmdp
