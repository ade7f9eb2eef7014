#include "cvxmdp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cvxmdp/trace_io.hpp"

namespace cvxmdp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path, what);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown field");
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Vec as_vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    Vec v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

std::vector<int> as_int_vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of integers");
    std::vector<int> v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

void parse_env(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("env", "expected an object");
    std::string type = as_string(require(j, "type", "env"), "env.type");
    if (type == "gridworld") {
        check_keys(j, {"type", "width", "height", "slip"}, "env");
        c.env_type = ExperimentConfig::EnvType::gridworld;
        if (j.contains("width")) c.width = as_int(j["width"], "env.width");
        if (j.contains("height")) c.height = as_int(j["height"], "env.height");
        if (j.contains("slip")) c.slip = as_number(j["slip"], "env.slip");
        if (c.width < 1 || c.height < 1) fail("env.width", "grid must be at least 1x1");
        if (c.slip < 0.0 || c.slip > 1.0) fail("env.slip", "slip must lie in [0, 1]");
    } else if (type == "deep_sea") {
        check_keys(j, {"type", "depth"}, "env");
        c.env_type = ExperimentConfig::EnvType::deep_sea;
        if (j.contains("depth")) c.depth = as_int(j["depth"], "env.depth");
        if (c.depth < 2) fail("env.depth", "depth must be at least 2");
    } else if (type == "random") {
        check_keys(j, {"type", "states", "actions", "branching", "seed"}, "env");
        c.env_type = ExperimentConfig::EnvType::random;
        if (j.contains("states")) c.rand_states = as_int(j["states"], "env.states");
        if (j.contains("actions")) c.rand_actions = as_int(j["actions"], "env.actions");
        if (j.contains("branching")) c.rand_branching = as_int(j["branching"], "env.branching");
        if (j.contains("seed")) c.env_seed = static_cast<std::uint64_t>(as_int(j["seed"], "env.seed"));
        if (c.rand_states < 1 || c.rand_actions < 1) fail("env.states", "need at least one state and action");
    } else if (type == "two_state") {
        check_keys(j, {"type", "move_prob"}, "env");
        c.env_type = ExperimentConfig::EnvType::two_state;
        if (j.contains("move_prob")) c.move_prob = as_number(j["move_prob"], "env.move_prob");
        if (c.move_prob <= 0.0 || c.move_prob > 1.0) fail("env.move_prob", "must lie in (0, 1]");
    } else {
        fail("env.type", "unknown environment '" + type + "'");
    }
}

void parse_expert(const json& j, ExperimentConfig& c, const std::string& path) {
    if (j.contains("expert_ref")) {
        json ref = read_json(as_string(j["expert_ref"], path + ".expert_ref"));
        if (ref.contains("expert_policy"))
            c.expert_actions = as_int_vec(ref["expert_policy"], path + ".expert_ref:expert_policy");
        else if (ref.contains("expert_occupancy"))
            c.expert_occupancy = as_vec(ref["expert_occupancy"], path + ".expert_ref:expert_occupancy");
        else
            fail(path + ".expert_ref", "referenced file has neither expert_policy nor expert_occupancy");
        return;
    }
    if (j.contains("expert_policy"))
        c.expert_actions = as_int_vec(j["expert_policy"], path + ".expert_policy");
    else if (j.contains("expert_policy_probs"))
        c.expert_policy_probs = as_vec(j["expert_policy_probs"], path + ".expert_policy_probs");
    else if (j.contains("expert_occupancy"))
        c.expert_occupancy = as_vec(j["expert_occupancy"], path + ".expert_occupancy");
    else
        fail(path, "objective needs expert_policy, expert_policy_probs, expert_occupancy, or expert_ref");
}

void parse_objective(const json& spec, ExperimentConfig& c) {
    json j = spec.is_string() ? json{{"type", spec.get<std::string>()}} : spec;
    if (!j.is_object()) fail("objective", "expected a string or an object");
    std::string type = as_string(require(j, "type", "objective"), "objective.type");
    if (type == "linear") {
        check_keys(j, {"type", "cost"}, "objective");
        c.objective_type = ExperimentConfig::ObjectiveType::linear;
        const json& cost = require(j, "cost", "objective");
        if (cost.is_string()) {
            if (cost.get<std::string>() != "neg_extrinsic")
                fail("objective.cost", "string form must be 'neg_extrinsic'");
            if (c.env_type != ExperimentConfig::EnvType::deep_sea)
                fail("objective.cost", "'neg_extrinsic' needs the deep_sea environment");
        } else {
            c.linear_cost = as_vec(cost, "objective.cost");
        }
    } else if (type == "neg_entropy") {
        check_keys(j, {"type"}, "objective");
        c.objective_type = ExperimentConfig::ObjectiveType::neg_entropy;
    } else if (type == "l2_al" || type == "kl" || type == "linf_al") {
        check_keys(j,
                   {"type", "expert_policy", "expert_policy_probs", "expert_occupancy", "expert_ref",
                    "smooth_eps"},
                   "objective");
        c.objective_type = type == "l2_al" ? ExperimentConfig::ObjectiveType::l2_al
                           : type == "kl"  ? ExperimentConfig::ObjectiveType::kl
                                           : ExperimentConfig::ObjectiveType::linf_al;
        parse_expert(j, c, "objective");
        if (j.contains("smooth_eps")) c.smooth_eps = as_number(j["smooth_eps"], "objective.smooth_eps");
    } else if (type == "diayn") {
        check_keys(j, {"type", "skills", "prior", "prior_seed", "variant", "maximize"}, "objective");
        c.objective_type = ExperimentConfig::ObjectiveType::diayn;
        if (j.contains("skills")) c.skills = as_int(j["skills"], "objective.skills");
        if (c.skills < 2) fail("objective.skills", "need at least two skills");
        if (j.contains("prior")) {
            if (j["prior"].is_string()) {
                if (j["prior"].get<std::string>() != "uniform")
                    fail("objective.prior", "string form must be 'uniform'");
            } else {
                c.prior_weights = as_vec(j["prior"], "objective.prior");
                if (static_cast<int>(c.prior_weights.size()) != c.skills)
                    fail("objective.prior", "length must equal skills");
            }
        }
        if (j.contains("prior_seed"))
            c.prior_seed = static_cast<std::uint64_t>(as_int(j["prior_seed"], "objective.prior_seed"));
        if (j.contains("maximize")) c.maximize = as_bool(j["maximize"], "objective.maximize");
        if (j.contains("variant")) {
            std::string v = as_string(j["variant"], "objective.variant");
            if (v == "mi")
                c.variant = DiaynObjective::RewardVariant::mi;
            else if (v == "gc")
                c.variant = DiaynObjective::RewardVariant::gradient_corrected;
            else if (v == "gc_no_const")
                c.variant = DiaynObjective::RewardVariant::gradient_corrected_no_const;
            else
                fail("objective.variant", "expected mi, gc, or gc_no_const");
        }
    } else {
        fail("objective.type", "unknown objective '" + type + "'");
    }
}

void parse_cost_player(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("cost_player", "expected an object");
    check_keys(j, {"kind", "lr_c", "lr_exp"}, "cost_player");
    std::string kind = as_string(require(j, "kind", "cost_player"), "cost_player.kind");
    if (kind == "ftl")
        c.cost.kind = CostPlayerKind::ftl;
    else if (kind == "ogd")
        c.cost.kind = CostPlayerKind::ogd;
    else if (kind == "mw")
        c.cost.kind = CostPlayerKind::mw;
    else
        fail("cost_player.kind", "unknown cost player '" + kind + "'");
    if (j.contains("lr_c")) c.cost.lr_c = as_number(j["lr_c"], "cost_player.lr_c");
    if (j.contains("lr_exp")) c.cost.lr_exp = as_number(j["lr_exp"], "cost_player.lr_exp");
}

void parse_policy_player(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("policy_player", "expected an object");
    check_keys(j,
               {"kind", "tol_schedule", "tol_c", "q_budget", "q_gamma", "q_lr_exp", "delta",
                "evi_budget"},
               "policy_player");
    std::string kind = as_string(require(j, "kind", "policy_player"), "policy_player.kind");
    if (kind == "best_response")
        c.policy.kind = PolicyPlayerKind::best_response;
    else if (kind == "q_learning")
        c.policy.kind = PolicyPlayerKind::q_learning;
    else if (kind == "ucrl2")
        c.policy.kind = PolicyPlayerKind::ucrl2;
    else
        fail("policy_player.kind", "unknown policy player '" + kind + "'");
    if (j.contains("tol_schedule")) {
        std::string s = as_string(j["tol_schedule"], "policy_player.tol_schedule");
        if (s == "constant")
            c.policy.tol_schedule = TolSchedule::constant;
        else if (s == "1/k")
            c.policy.tol_schedule = TolSchedule::inv_k;
        else if (s == "1/sqrt_k" || s == "1/sqrt(k)")
            c.policy.tol_schedule = TolSchedule::inv_sqrt_k;
        else
            fail("policy_player.tol_schedule", "expected constant, 1/k, or 1/sqrt_k");
    }
    if (j.contains("tol_c")) c.policy.tol_c = as_number(j["tol_c"], "policy_player.tol_c");
    if (j.contains("q_budget")) c.policy.q_budget = as_int(j["q_budget"], "policy_player.q_budget");
    if (j.contains("q_gamma")) c.policy.q_gamma = as_number(j["q_gamma"], "policy_player.q_gamma");
    if (j.contains("q_lr_exp")) c.policy.q_lr_exp = as_number(j["q_lr_exp"], "policy_player.q_lr_exp");
    if (j.contains("delta")) c.policy.delta = as_number(j["delta"], "policy_player.delta");
    if (j.contains("evi_budget")) c.policy.evi_budget = as_int(j["evi_budget"], "policy_player.evi_budget");
    if (c.policy.tol_c <= 0.0) fail("policy_player.tol_c", "must be positive");
}

void parse_game(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("game", "expected an object");
    check_keys(j, {"iterations", "oracle_regret", "gap_columns", "conj_grid_cap", "record_timings"},
               "game");
    if (j.contains("iterations")) c.game.iterations = as_int(j["iterations"], "game.iterations");
    if (c.game.iterations < 1) fail("game.iterations", "must be at least 1");
    if (j.contains("oracle_regret"))
        c.game.compute_oracle_regret = as_bool(j["oracle_regret"], "game.oracle_regret");
    if (j.contains("gap_columns"))
        c.game.compute_gap_columns = as_bool(j["gap_columns"], "game.gap_columns");
    if (j.contains("conj_grid_cap"))
        c.game.conj_grid_cap = as_int(j["conj_grid_cap"], "game.conj_grid_cap");
    if (j.contains("record_timings"))
        c.game.record_timings = as_bool(j["record_timings"], "game.record_timings");
    c.skill_game.iterations = c.game.iterations;
    c.skill_game.compute_oracle_regret = c.game.compute_oracle_regret;
    c.skill_game.record_timings = c.game.record_timings;
    c.skill_game.conj_grid_cap = c.game.conj_grid_cap;
}

void parse_constraints(const json& j, ExperimentConfig& c) {
    if (!j.is_array()) fail("constraints", "expected an array");
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string path = "constraints[" + std::to_string(i) + "]";
        const json& cj = j[i];
        if (!cj.is_object()) fail(path, "expected an object");
        std::string type = as_string(require(cj, "type", path), path + ".type");
        ConstraintSpec spec;
        if (type == "linear") {
            check_keys(cj, {"type", "lambda2", "c"}, path);
            spec.kind = ConstraintSpec::Kind::linear;
            spec.lambda2 = as_vec(require(cj, "lambda2", path), path + ".lambda2");
            spec.c = as_number(require(cj, "c", path), path + ".c");
        } else if (type == "min_entropy") {
            check_keys(cj, {"type", "floor"}, path);
            spec.kind = ConstraintSpec::Kind::min_entropy;
            spec.entropy_floor = as_number(require(cj, "floor", path), path + ".floor");
        } else {
            fail(path + ".type", "constraints need a closed-form conjugate; "
                                 "supported types are linear and min_entropy");
        }
        c.constraints.push_back(std::move(spec));
    }
}

void parse_constrained(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("constrained", "expected an object");
    check_keys(j, {"mu_max", "lr_mu_c", "lr_zeta_c", "lr_exp"}, "constrained");
    if (j.contains("mu_max")) c.constrained.mu_max = as_number(j["mu_max"], "constrained.mu_max");
    if (j.contains("lr_mu_c")) c.constrained.lr_mu_c = as_number(j["lr_mu_c"], "constrained.lr_mu_c");
    if (j.contains("lr_zeta_c"))
        c.constrained.lr_zeta_c = as_number(j["lr_zeta_c"], "constrained.lr_zeta_c");
    if (j.contains("lr_exp")) c.constrained.lr_exp = as_number(j["lr_exp"], "constrained.lr_exp");
    if (c.constrained.mu_max <= 0.0) fail("constrained.mu_max", "must be positive");
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) fail("", "config must be a JSON object");
    check_keys(j,
               {"name", "mode", "gamma", "env", "objective", "cost_player", "policy_player",
                "game", "constraints", "constrained", "seeds"},
               "config");
    ExperimentConfig c;
    c.echo = j;
    if (j.contains("name")) c.name = as_string(j["name"], "name");
    std::string mode = as_string(require(j, "mode", "config"), "mode");
    if (mode == "discounted")
        c.mode = Mode::discounted;
    else if (mode == "average")
        c.mode = Mode::average;
    else
        fail("mode", "expected discounted or average");
    if (j.contains("gamma")) c.gamma = as_number(j["gamma"], "gamma");
    if (c.gamma <= 0.0 || c.gamma >= 1.0) fail("gamma", "must lie in (0, 1)");

    parse_env(require(j, "env", "config"), c);
    parse_objective(require(j, "objective", "config"), c);
    if (j.contains("cost_player")) parse_cost_player(j["cost_player"], c);
    if (j.contains("policy_player")) parse_policy_player(j["policy_player"], c);
    if (j.contains("game")) parse_game(j["game"], c);
    if (j.contains("constraints")) parse_constraints(j["constraints"], c);
    if (j.contains("constrained")) parse_constrained(j["constrained"], c);
    if (j.contains("seeds")) {
        if (!j["seeds"].is_array() || j["seeds"].empty()) fail("seeds", "expected a nonempty array");
        c.seeds.clear();
        for (std::size_t i = 0; i < j["seeds"].size(); ++i)
            c.seeds.push_back(
                static_cast<std::uint64_t>(as_int(j["seeds"][i], "seeds[" + std::to_string(i) + "]")));
    }

    if (c.policy.kind == PolicyPlayerKind::ucrl2 && c.mode != Mode::average)
        fail("policy_player.kind", "ucrl2 plays the average-reward mode only");
    if (c.cost.kind == CostPlayerKind::mw && c.objective_type != ExperimentConfig::ObjectiveType::linf_al)
        fail("cost_player.kind", "mw requires an objective with an l1-ball dual set (linf_al)");
    if (c.objective_type == ExperimentConfig::ObjectiveType::diayn && !c.constraints.empty())
        fail("constraints", "the skill objective does not combine with constraints");
    if (!c.constraints.empty() && c.cost.kind != CostPlayerKind::ogd)
        fail("cost_player.kind", "constrained runs support the ogd cost player only");
    return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_json(path)); }

TabularMdp ExperimentConfig::build_mdp() const {
    switch (env_type) {
        case EnvType::gridworld:
            return make_gridworld(width, height, slip, mode, gamma);
        case EnvType::deep_sea:
            return make_deep_sea(depth, mode, gamma).mdp;
        case EnvType::random:
            return make_random_mdp(rand_states, rand_actions, rand_branching, env_seed, mode, gamma);
        case EnvType::two_state:
            return make_symmetric_two_state(move_prob, mode, gamma);
    }
    throw ConfigError("env.type", "unknown environment");
}

Vec ExperimentConfig::deep_sea_cost() const {
    DeepSea ds = make_deep_sea(depth, mode, gamma);
    Vec cost(ds.extrinsic_reward.size());
    for (std::size_t i = 0; i < cost.size(); ++i) cost[i] = -ds.extrinsic_reward[i];
    return cost;
}

std::unique_ptr<ConvexObjective> ExperimentConfig::build_objective(const TabularMdp& mdp) const {
    const int n = mdp.dim();
    auto expert = [&]() -> Vec {
        if (!expert_occupancy.empty()) {
            if (static_cast<int>(expert_occupancy.size()) != n)
                throw ConfigError("objective.expert_occupancy", "length must equal S*A");
            return expert_occupancy;
        }
        if (!expert_policy_probs.empty()) {
            if (static_cast<int>(expert_policy_probs.size()) != n)
                throw ConfigError("objective.expert_policy_probs", "length must equal S*A");
            Policy pi{mdp.num_states, mdp.num_actions, expert_policy_probs};
            pi.check();
            return occupancy_of_policy(mdp, pi).values;
        }
        if (static_cast<int>(expert_actions.size()) != mdp.num_states)
            throw ConfigError("objective.expert_policy", "length must equal the state count");
        Policy pi = Policy::deterministic(mdp.num_states, mdp.num_actions, expert_actions);
        return occupancy_of_policy(mdp, pi).values;
    };
    switch (objective_type) {
        case ObjectiveType::linear: {
            Vec cost = linear_cost.empty() ? deep_sea_cost() : linear_cost;
            if (static_cast<int>(cost.size()) != n)
                throw ConfigError("objective.cost", "length must equal S*A");
            return std::make_unique<LinearObjective>(cost);
        }
        case ObjectiveType::neg_entropy:
            return std::make_unique<NegEntropyObjective>(n);
        case ObjectiveType::l2_al:
            return std::make_unique<L2AlObjective>(expert());
        case ObjectiveType::kl:
            return std::make_unique<KlObjective>(smooth_expert(expert(), smooth_eps));
        case ObjectiveType::linf_al:
            return std::make_unique<LinfAlObjective>(expert());
        case ObjectiveType::diayn: {
            Vec prior = prior_weights;
            if (prior.empty()) {
                prior.assign(static_cast<std::size_t>(skills), 1.0 / skills);
                if (prior_seed != 0) {
                    auto rng = make_rng(prior_seed, 3);
                    std::uniform_real_distribution<double> unit(0.0, 1.0);
                    double total = 0.0;
                    for (double& w : prior) {
                        w = unit(rng);
                        total += w;
                    }
                    for (double& w : prior) w /= total;
                }
            } else {
                double total = vec_sum(prior);
                if (total <= 0.0) throw ConfigError("objective.prior", "weights must sum to > 0");
                for (double& w : prior) w /= total;
            }
            return std::make_unique<DiaynObjective>(std::move(prior), mdp.num_states, maximize,
                                                    variant);
        }
    }
    throw ConfigError("objective.type", "unknown objective");
}

}  // namespace cvxmdp
