#include "cvxmdp/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cvxmdp {

std::string format_double(double v) {
    // %.17g round-trips every double and is locale-independent for the
    // values traces carry; shorter representations when exact.
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v || (v != v && back != back)) break;
    }
    return buf;
}

void write_trace_csv(std::ostream& os, const GameTrace& trace) {
    os << "k,f_bar,gap_lower,gap_upper,regret_pi,regret_lambda";
    for (int i = 1; i <= trace.num_constraints; ++i) os << ",residual_" << i;
    os << ",samples,ms\n";
    for (const GameIterationRow& row : trace.rows) {
        os << row.k << ',' << format_double(row.f_bar) << ',' << format_double(row.gap_lower)
           << ',' << format_double(row.gap_upper) << ',' << format_double(row.regret_pi) << ','
           << format_double(row.regret_lambda);
        for (int i = 0; i < trace.num_constraints; ++i)
            os << ',' << format_double(i < static_cast<int>(row.residuals.size())
                                           ? row.residuals[static_cast<std::size_t>(i)]
                                           : 0.0);
        os << ',' << row.samples << ',' << format_double(row.ms) << '\n';
    }
}

void write_trace_csv(const std::string& path, const GameTrace& trace) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out", "cannot open " + path + " for writing");
    write_trace_csv(f, trace);
}

nlohmann::json trace_summary(const GameTrace& trace) {
    nlohmann::json j;
    j["iterations"] = trace.rows.size();
    j["f_bar"] = trace.f_bar;
    j["gap_lower"] = trace.gap_lower;
    j["gap_upper"] = trace.gap_upper;
    j["total_samples"] = trace.total_samples;
    j["budget_warning"] = trace.budget_warning;
    j["infeasible_suspected"] = trace.infeasible_suspected;
    j["max_occupancy_violation"] = trace.max_occupancy_violation;
    if (!trace.rows.empty()) {
        const GameIterationRow& last = trace.rows.back();
        j["regret_pi"] = last.regret_pi;
        j["regret_lambda"] = last.regret_lambda;
        j["residuals"] = last.residuals;
    }
    j["dbar"] = trace.dbar;
    j["lambdabar"] = trace.lambdabar;
    return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out", "cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("in", "cannot open " + path + " for reading");
    nlohmann::json j;
    f >> j;
    return j;
}

}  // namespace cvxmdp
