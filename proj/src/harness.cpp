#include "cvxmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace cvxmdp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double entropy_of(const Vec& d) {
    double h = 0.0;
    for (double v : d)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

struct Moments {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                    std::sqrt(static_cast<double>(xs.size()));
    }
    return m;
}

json moments_json(const std::vector<double>& xs) {
    Moments m = moments(xs);
    return json{{"mean", m.mean}, {"stderr", m.stderr_}};
}

std::string run_basename(const std::string& name, std::uint64_t seed) {
    return name + "_seed" + std::to_string(seed);
}

// Minimal CSV reader for trace files: returns the named column keyed by k.
std::vector<std::pair<int, double>> read_csv_column(const std::string& path,
                                                    const std::string& column) {
    std::ifstream f(path);
    if (!f) throw ConfigError("in", "cannot open " + path + " for reading");
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("in", path + " is empty");
    std::vector<std::string> header;
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    int target = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == column) target = static_cast<int>(i);
    if (target < 0) throw ConfigError("in", path + " has no column " + column);

    std::vector<std::pair<int, double>> out;
    while (std::getline(f, line)) {
        std::stringstream ls(line);
        int col = 0;
        int k = 0;
        double value = 0.0;
        while (std::getline(ls, cell, ',')) {
            if (col == 0) k = std::atoi(cell.c_str());
            if (col == target) value = std::strtod(cell.c_str(), nullptr);
            ++col;
        }
        out.emplace_back(k, value);
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    ExperimentResult result;
    result.seed = seed;
    TabularMdp mdp = config.build_mdp();
    std::unique_ptr<ConvexObjective> objective = config.build_objective(mdp);
    PolicyPlayerConfig policy = config.policy;
    policy.seed = seed;

    if (const auto* skills = dynamic_cast<const DiaynObjective*>(objective.get())) {
        SkillGameResult sg = run_skill_game(mdp, *skills, policy, config.skill_game);
        result.trace = std::move(sg.trace);
        result.mi_curve = std::move(sg.objective_curve);
    } else if (!config.constraints.empty()) {
        result.trace = run_constrained_game(mdp, *objective, config.constraints,
                                            config.constrained, config.cost, policy, config.game);
    } else {
        result.trace = run_game(mdp, *objective, config.cost, policy, config.game);
    }
    return result;
}

void run_and_write(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                   const std::string& out_dir, int parallel) {
    if (seeds.empty()) throw ConfigError("seeds", "expected a nonempty array");
    fs::create_directories(out_dir);

    std::vector<ExperimentResult> results(seeds.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                results[i] = run_experiment(config, seeds[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int threads = std::clamp<int>(parallel, 1, static_cast<int>(seeds.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<double> f_bars, gap_los, gap_his, regret_pis, regret_lambdas, mi_finals;
    std::vector<std::vector<double>> residuals;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const ExperimentResult& r = results[i];
        std::string base = (fs::path(out_dir) / run_basename(config.name, r.seed)).string();
        write_trace_csv(base + ".csv", r.trace);
        json summary = trace_summary(r.trace);
        summary["name"] = config.name;
        summary["seed"] = r.seed;
        summary["config"] = config.echo;
        if (!r.mi_curve.empty()) summary["mi_curve"] = r.mi_curve;
        write_json(base + ".json", summary);

        f_bars.push_back(r.trace.f_bar);
        gap_los.push_back(r.trace.gap_lower);
        gap_his.push_back(r.trace.gap_upper);
        if (!r.trace.rows.empty()) {
            regret_pis.push_back(r.trace.rows.back().regret_pi);
            regret_lambdas.push_back(r.trace.rows.back().regret_lambda);
            const Vec& res = r.trace.rows.back().residuals;
            residuals.resize(std::max(residuals.size(), res.size()));
            for (std::size_t c = 0; c < res.size(); ++c) residuals[c].push_back(res[c]);
        }
        if (!r.mi_curve.empty()) mi_finals.push_back(r.mi_curve.back());
    }

    json agg;
    agg["name"] = config.name;
    agg["seeds"] = seeds;
    agg["f_bar"] = moments_json(f_bars);
    agg["gap_lower"] = moments_json(gap_los);
    agg["gap_upper"] = moments_json(gap_his);
    agg["regret_pi"] = moments_json(regret_pis);
    agg["regret_lambda"] = moments_json(regret_lambdas);
    json res_json = json::array();
    for (const auto& col : residuals) res_json.push_back(moments_json(col));
    agg["residuals"] = res_json;
    if (!mi_finals.empty()) {
        agg["mi_final"] = moments_json(mi_finals);
        // Mean MI per iteration across seeds.
        std::size_t len = results[0].mi_curve.size();
        std::vector<double> curve(len, 0.0);
        for (const ExperimentResult& r : results)
            for (std::size_t k = 0; k < len && k < r.mi_curve.size(); ++k)
                curve[k] += r.mi_curve[k] / static_cast<double>(results.size());
        agg["mi_curve_mean"] = curve;
    }
    write_json((fs::path(out_dir) / (config.name + "_aggregate.json")).string(), agg);
}

RateFit fit_log_slope(const std::string& label, const std::vector<double>& ks,
                      const std::vector<double>& gaps) {
    if (ks.size() != gaps.size()) throw DimensionMismatch("fit_log_slope: size mismatch");
    if (ks.size() < 5)
        throw InsufficientPoints(label + ": need at least 5 budgets, got " +
                                 std::to_string(ks.size()));
    const std::size_t n = ks.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log(ks[i]);
        ys[i] = std::log(std::max(gaps[i], 1e-12));
    }
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    RateFit fit;
    fit.label = label;
    fit.points = static_cast<int>(n);
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
    fit.ci_low = fit.slope - 2.0 * fit.slope_stderr;
    fit.ci_high = fit.slope + 2.0 * fit.slope_stderr;
    fit.flagged = fit.slope > -0.4;
    return fit;
}

void suite_table1(const std::string& out_dir) {
    fs::create_directories(out_dir);
    json rows = json::array();

    auto run_row = [&](const std::string& row_name, const json& config_json,
                       std::uint64_t seed = 1) {
        ExperimentConfig config = parse_config(config_json);
        run_and_write(config, {seed}, out_dir, 1);
        json summary =
            read_json((fs::path(out_dir) / (run_basename(config.name, seed) + ".json")).string());
        json entry;
        entry["row"] = row_name;
        entry["cost_player"] = config_json["cost_player"]["kind"];
        entry["policy_player"] = config_json["policy_player"]["kind"];
        entry["f_bar"] = summary["f_bar"];
        entry["gap_lower"] = summary["gap_lower"];
        entry["gap_upper"] = summary["gap_upper"];
        if (summary.contains("residuals")) entry["residuals"] = summary["residuals"];
        rows.push_back(entry);
    };

    // Cost vector for the standard-RL row: a pinned arbitrary reward, negated.
    Vec rl_cost;
    {
        auto rng = make_rng(17, 4);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < 6 * 3; ++i) rl_cost.push_back(-unit(rng));
    }

    run_row("standard_rl",
            json{{"name", "standard_rl"},
                 {"mode", "discounted"},
                 {"gamma", 0.95},
                 {"env", {{"type", "random"}, {"states", 6}, {"actions", 3}, {"branching", 3}, {"seed", 11}}},
                 {"objective", {{"type", "linear"}, {"cost", rl_cost}}},
                 {"cost_player", {{"kind", "ogd"}}},
                 {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-10}}},
                 {"game", {{"iterations", 8}}}});

    std::vector<int> go_east(16, 1);
    // Stochastic east-leaning expert: its occupancy sits strictly inside the
    // polytope, so matching it takes genuine averaging (a deterministic expert
    // is a vertex a single best response can hit exactly).
    std::vector<double> east_lean_16;
    for (int s = 0; s < 16; ++s)
        for (double p : {0.1, 0.7, 0.1, 0.1}) east_lean_16.push_back(p);
    run_row("l2_al",
            json{{"name", "l2_al"},
                 {"mode", "average"},
                 {"env", {{"type", "gridworld"}, {"width", 4}, {"height", 4}, {"slip", 0.2}}},
                 {"objective", {{"type", "l2_al"}, {"expert_policy_probs", east_lean_16}}},
                 {"cost_player", {{"kind", "ogd"}}},
                 {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-9}}},
                 {"game", {{"iterations", 128}}}});

    run_row("pure_exploration",
            json{{"name", "pure_exploration"},
                 {"mode", "average"},
                 {"env", {{"type", "gridworld"}, {"width", 4}, {"height", 4}, {"slip", 0.2}}},
                 {"objective", "neg_entropy"},
                 {"cost_player", {{"kind", "ftl"}}},
                 {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-9}}},
                 {"game", {{"iterations", 256}}}});

    run_row("linf_al",
            json{{"name", "linf_al"},
                 {"mode", "average"},
                 {"env", {{"type", "gridworld"}, {"width", 4}, {"height", 4}, {"slip", 0.2}}},
                 {"objective", {{"type", "linf_al"}, {"expert_policy", go_east}}},
                 {"cost_player", {{"kind", "mw"}}},
                 {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-9}}},
                 {"game", {{"iterations", 512}}}});

    run_row("constrained_mdp",
            json{{"name", "constrained_mdp"},
                 {"mode", "average"},
                 {"env", {{"type", "two_state"}, {"move_prob", 0.9}}},
                 {"objective", {{"type", "linear"}, {"cost", Vec{1.0, 1.0, 0.0, 0.0}}}},
                 {"cost_player", {{"kind", "ogd"}}},
                 {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-10}}},
                 {"game", {{"iterations", 4096}}},
                 {"constraints",
                  json::array({{{"type", "linear"}, {"lambda2", Vec{-1.0, -1.0, 0.0, 0.0}}, {"c", -0.3}}})},
                 {"constrained", {{"mu_max", 10.0}, {"lr_mu_c", 2.0}}}});

    run_row("kl_matching",
            json{{"name", "kl_matching"},
                 {"mode", "average"},
                 {"env", {{"type", "gridworld"}, {"width", 4}, {"height", 4}, {"slip", 0.2}}},
                 {"objective", {{"type", "kl"}, {"expert_policy", go_east}}},
                 {"cost_player", {{"kind", "ftl"}}},
                 {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-9}}},
                 {"game", {{"iterations", 128}}}});

    // Sampling policy players: per-skill exploration noise is what separates
    // the skills at the cold start (deterministic best responses to the
    // uniform mixture give every skill the same occupancy and the mutual
    // information never leaves zero).
    run_row("diayn",
            json{{"name", "diayn"},
                 {"mode", "average"},
                 {"env", {{"type", "gridworld"}, {"width", 4}, {"height", 4}, {"slip", 0.2}}},
                 {"objective", {{"type", "diayn"}, {"skills", 4}}},
                 {"cost_player", {{"kind", "ftl"}}},
                 {"policy_player",
                  {{"kind", "q_learning"}, {"q_budget", 4000}, {"tol_c", 0.05}}},
                 {"game", {{"iterations", 24}}}});

    write_json((fs::path(out_dir) / "table1.json").string(), json{{"rows", rows}});
}

void suite_rates(const std::string& out_dir) {
    fs::create_directories(out_dir);
    const int k_max = 4096;
    std::vector<double> checkpoints;
    for (int k = 16; k <= k_max; k *= 2) checkpoints.push_back(k);

    TabularMdp grid = make_gridworld(5, 5, 0.2, Mode::average);
    // East-leaning stochastic expert; see suite_table1. Its occupancy is
    // feasible by construction, so the l2 optimum is exactly zero and the gap
    // column needs no separate oracle run.
    std::vector<double> east_lean_25;
    for (int s = 0; s < 25; ++s)
        for (double p : {0.1, 0.7, 0.1, 0.1}) east_lean_25.push_back(p);

    NegEntropyObjective entropy_obj(grid.dim());
    double f_opt_entropy = run_fully_corrective_fw(grid, entropy_obj, 240, 240).f_curve.back();
    const double f_opt_l2 = 0.0;

    json index;
    index["checkpoints"] = checkpoints;
    json runs = json::array();

    auto run_combo = [&](const std::string& label, const json& objective_spec,
                         const std::string& cost_kind, double f_opt) {
        json config_json{{"name", label},
                         {"mode", "average"},
                         {"env", {{"type", "gridworld"}, {"width", 5}, {"height", 5}, {"slip", 0.2}}},
                         {"objective", objective_spec},
                         {"cost_player", {{"kind", cost_kind}}},
                         {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-9}}},
                         {"game",
                          {{"iterations", k_max}, {"oracle_regret", false}, {"gap_columns", false}}}};
        ExperimentConfig config = parse_config(config_json);
        run_and_write(config, {1}, out_dir, 1);
        json entry;
        entry["label"] = label;
        entry["csv"] = run_basename(label, 1) + ".csv";
        entry["f_opt"] = f_opt;
        runs.push_back(entry);
    };

    run_combo("neg_entropy_ogd_br", json{{"type", "neg_entropy"}}, "ogd", f_opt_entropy);
    run_combo("l2_al_ogd_br", json{{"type", "l2_al"}, {"expert_policy_probs", east_lean_25}}, "ogd",
              f_opt_l2);
    run_combo("l2_al_ftl_br", json{{"type", "l2_al"}, {"expert_policy_probs", east_lean_25}}, "ftl",
              f_opt_l2);

    index["runs"] = runs;
    write_json((fs::path(out_dir) / "rates_index.json").string(), index);
}

RateReport emit_rate_report(const std::string& in_dir) {
    json index = read_json((fs::path(in_dir) / "rates_index.json").string());
    std::vector<double> checkpoints = index["checkpoints"].get<std::vector<double>>();
    RateReport report;
    json out;
    json fits = json::array();
    for (const json& run : index["runs"]) {
        std::string label = run["label"].get<std::string>();
        double f_opt = run["f_opt"].get<double>();
        auto column =
            read_csv_column((fs::path(in_dir) / run["csv"].get<std::string>()).string(), "f_bar");
        std::vector<double> ks, gaps;
        for (double k : checkpoints) {
            for (const auto& [row_k, f_bar] : column) {
                if (row_k == static_cast<int>(k)) {
                    ks.push_back(k);
                    gaps.push_back(f_bar - f_opt);
                    break;
                }
            }
        }
        RateFit fit = fit_log_slope(label, ks, gaps);
        report.fits.push_back(fit);
        fits.push_back(json{{"label", fit.label},
                            {"slope", fit.slope},
                            {"intercept", fit.intercept},
                            {"slope_stderr", fit.slope_stderr},
                            {"ci", {fit.ci_low, fit.ci_high}},
                            {"flagged", fit.flagged},
                            {"points", fit.points}});
    }
    out["fits"] = fits;
    write_json((fs::path(in_dir) / "rate_report.json").string(), out);
    return report;
}

void suite_diayn(const std::string& out_dir, int skills, int iterations) {
    fs::create_directories(out_dir);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);

    json result;
    result["skills"] = skills;
    for (const char* variant_name : {"mi", "gc", "gc_no_const"}) {
        const std::string variant(variant_name);
        json config_json{
            {"name", "diayn_" + variant},
            {"mode", "average"},
            {"env", {{"type", "gridworld"}, {"width", 9}, {"height", 9}, {"slip", 0.2}}},
            {"objective",
             {{"type", "diayn"}, {"skills", skills}, {"prior_seed", 7}, {"variant", variant}}},
            {"cost_player", {{"kind", "ftl"}}},
            {"policy_player",
             {{"kind", "q_learning"}, {"q_budget", 4000}, {"tol_c", 0.05}}},
            {"game", {{"iterations", iterations}, {"oracle_regret", false}, {"gap_columns", false}}}};
        ExperimentConfig config = parse_config(config_json);
        run_and_write(config, seeds, out_dir, 1);
        result[variant] =
            read_json((fs::path(out_dir) / (config.name + "_aggregate.json")).string());
    }
    write_json((fs::path(out_dir) / "diayn.json").string(), result);
}

void suite_deepsea(const std::string& out_dir) {
    fs::create_directories(out_dir);
    const int depth = 16;

    // Entropy ceiling for this chain, from a long corrective run; the floor
    // asks for half of it.
    TabularMdp chain = make_deep_sea(depth, Mode::average).mdp;
    NegEntropyObjective entropy_obj(chain.dim());
    double h_max = -run_fully_corrective_fw(chain, entropy_obj, 160, 240).f_curve.back();
    double floor = 0.5 * h_max;

    json config_json{{"name", "deepsea"},
                     {"mode", "average"},
                     {"env", {{"type", "deep_sea"}, {"depth", depth}}},
                     {"objective", {{"type", "linear"}, {"cost", "neg_extrinsic"}}},
                     {"cost_player", {{"kind", "ogd"}}},
                     {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-10}}},
                     {"game", {{"iterations", 8192}}},
                     {"constraints", json::array({{{"type", "min_entropy"}, {"floor", floor}}})},
                     {"constrained", {{"mu_max", 20.0}, {"lr_mu_c", 2.0}}}};
    ExperimentConfig config = parse_config(config_json);
    ExperimentResult result = run_experiment(config, 1);
    write_trace_csv((fs::path(out_dir) / "deepsea_seed1.csv").string(), result.trace);

    Vec cost = config.deep_sea_cost();
    json summary = trace_summary(result.trace);
    summary["name"] = config.name;
    summary["seed"] = 1;
    summary["config"] = config.echo;
    summary["entropy_floor"] = floor;
    summary["entropy_max"] = h_max;
    summary["entropy_dbar"] = entropy_of(result.trace.dbar);
    summary["extrinsic_reward_dbar"] = -dot(cost, result.trace.dbar);
    write_json((fs::path(out_dir) / "deepsea_seed1.json").string(), summary);
    write_json((fs::path(out_dir) / "deepsea.json").string(),
               json{{"entropy_floor", floor},
                    {"entropy_max", h_max},
                    {"entropy_dbar", summary["entropy_dbar"]},
                    {"extrinsic_reward_dbar", summary["extrinsic_reward_dbar"]},
                    {"f_bar", result.trace.f_bar},
                    {"infeasible_suspected", result.trace.infeasible_suspected}});
}

}  // namespace cvxmdp
