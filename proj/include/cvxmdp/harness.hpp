#pragma once

#include <optional>
#include <string>

#include "cvxmdp/config.hpp"
#include "cvxmdp/trace_io.hpp"

namespace cvxmdp {

struct InsufficientPoints : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentResult {
    GameTrace trace;
    std::uint64_t seed = 0;
    std::vector<double> mi_curve;  // skill games only
};

// One (config, seed) run; routes to the plain, constrained, or skill game.
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// Per-seed CSV + JSON summary plus an aggregate JSON with mean and standard
// error of the final objective, gaps, and residuals. parallel > 1 fans seeds
// out over threads; artifacts are identical either way.
void run_and_write(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                   const std::string& out_dir, int parallel = 1);

// Small-instance sweep over the solver-objective pairings; writes one trace
// per row and table1.json mapping row name to players, final value, and gap.
void suite_table1(const std::string& out_dir);

// Convergence-rate study: (objective, cost player) pairs under exact best
// responses across a geometric grid of iteration budgets, plus oracle optima
// from long fully corrective runs. Writes rates_index.json.
void suite_rates(const std::string& out_dir);

// Skill-diversity prior ablation: three reward variants, ten seeds each,
// pinned non-uniform prior. Writes per-variant MI curves and diayn.json.
void suite_diayn(const std::string& out_dir, int skills = 8, int iterations = 24);

// Entropy-constrained chain exploration; writes the constrained trace and
// deepsea.json with the entropy and extrinsic-reward outcomes.
void suite_deepsea(const std::string& out_dir);

struct RateFit {
    std::string label;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    bool flagged = false;  // slope above -0.4
    int points = 0;
};

struct RateReport {
    std::vector<RateFit> fits;
};

// Least-squares log(gap) vs log(K) per configuration in a rates-suite output
// directory; throws InsufficientPoints when a configuration has fewer than
// five budgets. Writes rate_report.json into the directory.
RateReport emit_rate_report(const std::string& in_dir);

// Slope fit on (K, gap) pairs; shared with the report tests.
RateFit fit_log_slope(const std::string& label, const std::vector<double>& ks,
                      const std::vector<double>& gaps);

}  // namespace cvxmdp
