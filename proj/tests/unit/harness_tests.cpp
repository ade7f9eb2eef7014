#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvxmdp/harness.hpp"
#include "doctest.h"

using namespace cvxmdp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json base_config() {
    return json{{"name", "tiny"},
                {"mode", "average"},
                {"env", {{"type", "two_state"}, {"move_prob", 0.9}}},
                {"objective", "neg_entropy"},
                {"cost_player", {{"kind", "ogd"}}},
                {"policy_player", {{"kind", "best_response"}, {"tol_c", 1e-9}}},
                {"game", {{"iterations", 4}}}};
}

std::string config_error_field(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.field_path;
    }
    return "(no error)";
}

fs::path fresh_dir(const std::string& leaf) {
    fs::path dir = fs::temp_directory_path() / "cvxmdp_harness_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    json ok = base_config();
    CHECK_NOTHROW(parse_config(ok));

    json j = ok;
    j.erase("mode");
    CHECK(config_error_field(j) == "config.mode");

    j = ok;
    j["objective"] = json{{"type", "huber"}};
    CHECK(config_error_field(j) == "objective.type");

    j = ok;
    j["surprise"] = 1;
    CHECK(config_error_field(j) == "config.surprise");

    j = ok;
    j["gamma"] = 1.5;
    CHECK(config_error_field(j) == "gamma");

    j = ok;
    j["env"] = json{{"type", "gridworld"}, {"slip", 2.0}};
    CHECK(config_error_field(j) == "env.slip");

    j = ok;
    j["objective"] = json{{"type", "l2_al"}};
    CHECK(config_error_field(j) == "objective");

    j = ok;
    j["seeds"] = json::array();
    CHECK(config_error_field(j) == "seeds");
}

TEST_CASE("incompatible player pairings are rejected up front") {
    json j = base_config();
    j["cost_player"] = json{{"kind", "mw"}};  // needs the sup-norm objective
    CHECK(config_error_field(j) == "cost_player.kind");

    j = base_config();
    j["mode"] = "discounted";
    j["policy_player"] = json{{"kind", "ucrl2"}};
    CHECK(config_error_field(j) == "policy_player.kind");

    j = base_config();
    j["objective"] = json{{"type", "linear"}, {"cost", {1.0, 1.0, 0.0, 0.0}}};
    j["constraints"] = json::array({json{
        {"type", "linear"}, {"lambda2", {-1.0, -1.0, 0.0, 0.0}}, {"c", -0.3}}});
    j["cost_player"] = json{{"kind", "ftl"}};
    CHECK(config_error_field(j) == "cost_player.kind");
    j["cost_player"] = json{{"kind", "ogd"}};
    CHECK_NOTHROW(parse_config(j));

    j = base_config();
    j["objective"] = json{{"type", "diayn"}, {"skills", 2}};
    j["constraints"] = json::array({json{{"type", "min_entropy"}, {"floor", 0.5}}});
    CHECK(config_error_field(j) == "constraints");

    j = base_config();
    j["constraints"] = json::array({json{{"type", "quadratic"}}});
    CHECK(config_error_field(j) == "constraints[0].type");
}

TEST_CASE("stochastic expert policies are validated against the environment") {
    json j = base_config();
    j["objective"] = json{{"type", "l2_al"}, {"expert_policy_probs", {0.5, 0.5, 0.5}}};
    ExperimentConfig short_probs = parse_config(j);
    TabularMdp mdp = short_probs.build_mdp();
    CHECK_THROWS_AS(short_probs.build_objective(mdp), ConfigError);

    j["objective"] = json{{"type", "l2_al"}, {"expert_policy_probs", {0.3, 0.7, 0.6, 0.4}}};
    ExperimentConfig good = parse_config(j);
    auto objective = good.build_objective(mdp);
    // The expert's own occupancy is the minimizer, at value zero.
    Policy pi{2, 2, {0.3, 0.7, 0.6, 0.4}};
    CHECK(objective->value(occupancy_of_policy(mdp, pi).values) == 0.0);
}

TEST_CASE("a run writes one trace and summary per seed plus an aggregate") {
    fs::path dir = fresh_dir("single");
    json j = base_config();
    ExperimentConfig config = parse_config(j);
    run_and_write(config, {7}, dir.string(), 1);

    CHECK(fs::exists(dir / "tiny_seed7.csv"));
    json summary = read_json((dir / "tiny_seed7.json").string());
    CHECK(summary["seed"] == 7);
    CHECK(summary["config"] == j);  // the parsed document is echoed verbatim
    CHECK(summary["iterations"] == 4);
    CHECK(summary["f_bar"].is_number());
    CHECK(summary["gap_lower"].get<double>() <= summary["gap_upper"].get<double>() + 1e-9);

    json agg = read_json((dir / "tiny_aggregate.json").string());
    CHECK(agg["seeds"] == json::array({7}));
    CHECK(agg["f_bar"]["mean"] == summary["f_bar"]);
    CHECK(agg["f_bar"]["stderr"] == 0.0);  // single seed

    std::string csv = slurp(dir / "tiny_seed7.csv");
    CHECK(csv.rfind("k,f_bar,gap_lower,gap_upper,regret_pi,regret_lambda,samples,ms\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + one row per iteration
}

TEST_CASE("reruns and thread fan-out leave artifacts byte-identical") {
    json j = base_config();
    j["game"]["iterations"] = 16;
    ExperimentConfig config = parse_config(j);
    std::vector<std::uint64_t> seeds = {1, 2, 3};

    fs::path serial = fresh_dir("serial");
    fs::path rerun = fresh_dir("rerun");
    fs::path fanned = fresh_dir("fanned");
    run_and_write(config, seeds, serial.string(), 1);
    run_and_write(config, seeds, rerun.string(), 1);
    run_and_write(config, seeds, fanned.string(), 3);

    for (const auto& entry : fs::directory_iterator(serial)) {
        std::string name = entry.path().filename().string();
        CAPTURE(name);
        std::string bytes = slurp(entry.path());
        CHECK(bytes == slurp(rerun / name));
        CHECK(bytes == slurp(fanned / name));
    }
}

TEST_CASE("csv layout is frozen") {
    GameTrace trace;
    trace.num_constraints = 1;
    GameIterationRow row;
    row.k = 1;
    row.f_bar = 0.5;
    row.gap_lower = -0.25;
    row.gap_upper = 0.5;
    row.regret_pi = 0.0;
    row.regret_lambda = 0.125;
    row.residuals = {0.001};
    row.samples = 10;
    trace.rows.push_back(row);
    row.k = 2;
    row.f_bar = -0.0078125;
    row.gap_lower = -0.5;
    row.gap_upper = 1.5;
    row.regret_pi = 0.0625;
    row.regret_lambda = 0.0;
    row.residuals = {2.0};
    row.samples = 20;
    trace.rows.push_back(row);

    std::ostringstream os;
    write_trace_csv(os, trace);
    CHECK(os.str() ==
          "k,f_bar,gap_lower,gap_upper,regret_pi,regret_lambda,residual_1,samples,ms\n"
          "1,0.5,-0.25,0.5,0,0.125,0.001,10,0\n"
          "2,-0.0078125,-0.5,1.5,0.0625,0,2,20,0\n");
}

TEST_CASE("doubles round-trip through their formatted text") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-9) == "1e-09");
    auto rng = make_rng(99, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 200; ++i) {
        double v = unit(rng) * std::pow(10.0, expo(rng));
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("slope fits recover synthetic decay rates") {
    std::vector<double> ks, sqrt_gaps, flat_gaps;
    for (int k = 16; k <= 1024; k *= 2) {
        ks.push_back(k);
        sqrt_gaps.push_back(3.0 / std::sqrt(static_cast<double>(k)));
        flat_gaps.push_back(0.7);
    }
    RateFit fit = fit_log_slope("sqrt", ks, sqrt_gaps);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CHECK(fit.slope_stderr <= 1e-9);
    CHECK(!fit.flagged);
    CHECK(fit.points == 7);

    RateFit flat = fit_log_slope("flat", ks, flat_gaps);
    CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(flat.flagged);

    CHECK_THROWS_AS(fit_log_slope("few", {1, 2, 3, 4}, {1, 1, 1, 1}), InsufficientPoints);
    CHECK_THROWS_AS(fit_log_slope("bad", {1, 2, 3, 4, 5}, {1, 1}), DimensionMismatch);
}

TEST_CASE("rate reports are rebuilt from the on-disk index") {
    fs::path dir = fresh_dir("rates");
    json index;
    index["checkpoints"] = {16, 32, 64, 128, 256};
    index["runs"] = json::array({json{
        {"label", "synthetic"}, {"csv", "synthetic_seed1.csv"}, {"f_opt", 1.0}}});
    write_json((dir / "rates_index.json").string(), index);

    std::ofstream csv(dir / "synthetic_seed1.csv", std::ios::binary);
    csv << "k,f_bar,gap_lower,gap_upper,regret_pi,regret_lambda,samples,ms\n";
    for (int k = 1; k <= 256; ++k)
        csv << k << ',' << format_double(1.0 + 2.0 / k) << ",0,0,0,0,0,0\n";
    csv.close();

    RateReport report = emit_rate_report(dir.string());
    REQUIRE(report.fits.size() == 1);
    CHECK(report.fits[0].label == "synthetic");
    CHECK(report.fits[0].slope == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(!report.fits[0].flagged);
    CHECK(fs::exists(dir / "rate_report.json"));
}

TEST_CASE("a configured linear run lands on the best deterministic policy") {
    json j = base_config();
    j["name"] = "reward";
    j["objective"] = json{{"type", "linear"}, {"cost", {0.0, 0.2, -1.0, 0.4}}};
    j["cost_player"] = json{{"kind", "ftl"}};
    ExperimentConfig config = parse_config(j);
    ExperimentResult result = run_experiment(config, 1);

    TabularMdp mdp = config.build_mdp();
    double best = 1e300;
    for (int a0 = 0; a0 < 2; ++a0)
        for (int a1 = 0; a1 < 2; ++a1) {
            Policy pi = Policy::deterministic(2, 2, {a0, a1});
            Vec d = occupancy_of_policy(mdp, pi).values;
            best = std::min(best, dot(Vec{0.0, 0.2, -1.0, 0.4}, d));
        }
    CHECK(result.trace.f_bar == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("deep-sea extrinsic cost is wired through the config") {
    json j = base_config();
    j["name"] = "chain";
    j["env"] = json{{"type", "deep_sea"}, {"depth", 4}};
    j["objective"] = json{{"type", "linear"}, {"cost", "neg_extrinsic"}};
    j["cost_player"] = json{{"kind", "ftl"}};
    j["game"] = json{{"iterations", 1}};
    ExperimentConfig config = parse_config(j);
    ExperimentResult result = run_experiment(config, 1);
    // Only the always-advance policy earns the positive reward: 0.99 / depth.
    CHECK(result.trace.f_bar == doctest::Approx(-0.99 / 4.0).epsilon(1e-9));
}

TEST_CASE("skill runs carry their objective curve into the summaries") {
    fs::path dir = fresh_dir("skills");
    json j = base_config();
    j["name"] = "skills";
    j["objective"] = json{{"type", "diayn"}, {"skills", 2}};
    j["policy_player"] =
        json{{"kind", "q_learning"}, {"tol_c", 0.05}, {"q_budget", 400}};
    j["game"] = json{{"iterations", 4}};
    ExperimentConfig config = parse_config(j);
    run_and_write(config, {1, 2}, dir.string(), 1);

    json summary = read_json((dir / "skills_seed1.json").string());
    REQUIRE(summary.contains("mi_curve"));
    CHECK(summary["mi_curve"].size() == 4);
    json agg = read_json((dir / "skills_aggregate.json").string());
    CHECK(agg.contains("mi_final"));
    CHECK(agg["mi_curve_mean"].size() == 4);
}
