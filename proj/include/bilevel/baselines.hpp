#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bilevel/model.hpp"
#include "bilevel/pso.hpp"

namespace bilevel::baselines {

// Single-path descent: same branching and loading rules as the exact search,
// but at every period only the child with the lowest heuristic estimate is
// kept and there is no backtracking. Dead end -> nullopt.
std::optional<ItemPlan> greedy_solve_subproblem(const SupplierParams& sp, int item, int qty,
                                                int horizon, int lt_lower, int stride = 1);

struct SaConfig {
  int moves = 500;    // total proposals, calibration included
  int warmup = 50;    // leading proposals used to pick the start temperature
  double accept_target = 0.9;  // worst-case acceptance rate over the warmup
  double cooling = 0.95;
  int cooling_interval = 20;         // moves between cooling steps
  double initial_temperature = 0.0;  // 0: calibrate from warmup deltas
  std::uint64_t seed = 0;
};

struct SaStats {
  int proposed = 0;
  int accepted = 0;
  int accepted_worse = 0;
  double start_temperature = 0.0;
};

// Simulated annealing over the production schedule (which shift produces how
// much in which period); deliveries always follow the loading rule. Starts
// from the greedy plan and returns the best plan seen, so the result never
// costs more than greedy's. Nullopt only when greedy itself finds nothing.
std::optional<ItemPlan> sa_solve_subproblem(const SupplierParams& sp, int item, int qty,
                                            int horizon, int lt_lower,
                                            const SaConfig& cfg = {}, SaStats* stats = nullptr);

// Relative gap to the best value found across a compared set. Requires
// best_found > 0 (returns NaN otherwise) and sol >= best_found.
double deviation(double sol, double best_found);

// Lower solvers in outer-loop pluggable form. The annealer derives one
// substream per (item, quantity) from its seed so memoized evaluation stays
// deterministic.
pso::LowerSolver make_greedy_solver(int stride = 1);
pso::LowerSolver make_sa_solver(const SaConfig& cfg = {}, int stride = 1);

// A named full-stack strategy: given an instance and a run seed, produce a
// complete outer-loop report.
struct AlgorithmSpec {
  std::string name;
  std::function<pso::SolveReport(const ProcurementInstance&, std::uint64_t seed)> run;
};

AlgorithmSpec pso_astar_algorithm(pso::SwarmConfig base, int beam = 0, int stride = 1);
AlgorithmSpec pso_greedy_algorithm(pso::SwarmConfig base, int stride = 1);
AlgorithmSpec pso_sa_algorithm(pso::SwarmConfig base, SaConfig sa = {}, int stride = 1);

struct ComparisonRow {
  std::string problem;
  int supplier_count = 0;
  int item_count = 0;
  int repetitions = 0;
  double best_found = 0.0;              // min objective over every run
  std::vector<double> mean_deviation;   // one entry per algorithm, input order
  std::vector<double> mean_runtime;     // seconds, same order
};

// Runs every algorithm on every problem `repetitions` times, scores each run
// against the per-problem best found, and averages. Each (problem, algorithm,
// repetition) cell draws its seed from an independent substream, so results
// do not depend on execution order; cells run on a small worker pool.
std::vector<ComparisonRow> compare_suite(const std::vector<ProcurementInstance>& problems,
                                         const std::vector<AlgorithmSpec>& algorithms,
                                         int repetitions, std::uint64_t seed);

}  // namespace bilevel::baselines
