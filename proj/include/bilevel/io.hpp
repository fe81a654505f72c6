#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilevel/baselines.hpp"
#include "bilevel/model.hpp"
#include "bilevel/pso.hpp"

namespace bilevel::io {

// Raised for malformed instance documents; the message carries the offending
// section/key or the parser's position report.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Process exit codes shared by the command layer and its tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitUsage = 64;

// Instance documents are JSON with exactly these top-level keys: meta {name,
// seed}, buyer {demand, lt_lower, lt_upper, lambda, weights, q_min, q_max,
// ordering_cost}, suppliers [...], and an optional horizon (filled from the
// planning estimate when absent). Unknown keys anywhere are rejected.
ProcurementInstance parse_instance(const std::string& text);
ProcurementInstance read_instance(const std::string& path);
std::string instance_to_text(const ProcurementInstance& inst);
void write_instance(const ProcurementInstance& inst, const std::string& path);

// "lo:hi:step" -> inclusive grid; throws ParseError on malformed specs.
std::vector<double> parse_range(const std::string& spec);

// Report renderers. All numeric cells are fixed six-decimal (integers stay
// integers), rows are deterministically ordered, lines end in LF.
std::string solve_report_csv(const pso::SolveReport& report, const ProcurementInstance& inst);
std::string comparison_csv(const std::vector<baselines::ComparisonRow>& rows,
                           const std::vector<std::string>& algorithm_names);

struct SweepRow {
  double w1 = 0.0;
  double gamma = 0.0;
  double objective = 0.0;
  double procurement = 0.0;
  double delay = 0.0;
};

// Re-solves the instance once per (w1, gamma) grid point with the exact lower
// solver; w2 follows as 1 - w1 and gamma replaces every supplier's lateness
// rate. Each cell runs on its own seed substream.
std::vector<SweepRow> sensitivity_sweep(const ProcurementInstance& base,
                                        const std::vector<double>& w1_grid,
                                        const std::vector<double>& gamma_grid,
                                        const pso::SwarmConfig& cfg, int beam, int stride);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Full command-line surface; args exclude the program name. Subcommands:
// solve, generate, compare, sweep, audit. Returns a process exit code.
int cli_main(const std::vector<std::string>& args);

}  // namespace bilevel::io
