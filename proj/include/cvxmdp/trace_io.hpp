#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "cvxmdp/game.hpp"

namespace cvxmdp {

// Shortest exact decimal for a double; reruns must be byte-identical.
std::string format_double(double v);

// Fixed column order: k, f_bar, gap_lower, gap_upper, regret_pi,
// regret_lambda, residual_1..m, samples, ms.
void write_trace_csv(std::ostream& os, const GameTrace& trace);
void write_trace_csv(const std::string& path, const GameTrace& trace);

// Final averages plus run metadata; callers add the config echo and seed.
nlohmann::json trace_summary(const GameTrace& trace);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace cvxmdp
