#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvxmdp/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Convex-MDP meta-game solver"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", in_dir;
    std::vector<std::uint64_t> seeds;
    int parallel = 1;
    bool timings = false;
    int skills = 8;
    int iters = 24;
    std::string suite_name, report_name;

    CLI::App* solve = app.add_subcommand("solve", "Run one experiment config");
    solve->add_option("--config", config_path, "JSON experiment config")->required();
    solve->add_option("--seeds", seeds, "Seed list (default: from config)")->delimiter(',');
    solve->add_option("--out", out_dir, "Output directory");
    solve->add_option("--parallel", parallel, "Concurrent seed runs");
    solve->add_flag("--timings", timings, "Record wall time in the ms column");

    CLI::App* suite = app.add_subcommand("suite", "Run a canned experiment suite");
    suite->add_option("name", suite_name, "table1 | rates | diayn | deepsea")->required();
    suite->add_option("--out", out_dir, "Output directory");
    suite->add_option("--skills", skills, "Skill count for the diayn suite");
    suite->add_option("--iters", iters, "Iteration budget for the diayn suite");

    CLI::App* report = app.add_subcommand("report", "Fit rates from a suite's traces");
    report->add_option("name", report_name, "rates")->required();
    report->add_option("--in", in_dir, "Directory with rates_index.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            cvxmdp::ExperimentConfig config = cvxmdp::load_config(config_path);
            if (timings) {
                config.game.record_timings = true;
                config.skill_game.record_timings = true;
            }
            if (seeds.empty()) seeds = config.seeds;
            cvxmdp::run_and_write(config, seeds, out_dir, parallel);
            std::printf("wrote %zu run(s) to %s\n", seeds.size(), out_dir.c_str());
        } else if (suite->parsed()) {
            if (suite_name == "table1")
                cvxmdp::suite_table1(out_dir);
            else if (suite_name == "rates")
                cvxmdp::suite_rates(out_dir);
            else if (suite_name == "diayn")
                cvxmdp::suite_diayn(out_dir, skills, iters);
            else if (suite_name == "deepsea")
                cvxmdp::suite_deepsea(out_dir);
            else {
                std::fprintf(stderr, "unknown suite '%s'\n", suite_name.c_str());
                return 2;
            }
            std::printf("suite %s written to %s\n", suite_name.c_str(), out_dir.c_str());
        } else if (report->parsed()) {
            if (report_name != "rates") {
                std::fprintf(stderr, "unknown report '%s'\n", report_name.c_str());
                return 2;
            }
            cvxmdp::RateReport r = cvxmdp::emit_rate_report(in_dir);
            for (const cvxmdp::RateFit& fit : r.fits)
                std::printf("%-24s slope %+.3f (ci %+.3f..%+.3f)%s\n", fit.label.c_str(), fit.slope,
                            fit.ci_low, fit.ci_high, fit.flagged ? "  FLAGGED" : "");
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
