#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "bilevel/grid.hpp"
#include "bilevel/model.hpp"

namespace bilevel::pso {

using RealMatrix = Grid<double>;

// Outer-loop parameters. The defaults are the tuned levels used throughout the
// test suites; everything is overridable per run.
struct SwarmConfig {
  int particles = 30;
  int iterations = 100;
  double c1 = 2.0;
  double c2 = 2.0;
  double w_min = 0.2;
  double w_max = 0.9;
  double velocity_coeff = 0.2;  // fraction of the allocation interval length
  double epsilon = 1.0;         // stand-in offset for inactive (zero) cells
  std::uint64_t seed = 0;
};

// One candidate allocation, kept in continuous "shadow" coordinates so that
// momentum survives the integer repair step.
struct Particle {
  RealMatrix position;
  RealMatrix velocity;
  RealMatrix pbest_position;
  double pbest_value = 0.0;  // +inf until first evaluation
  AllocationMatrix last_feasible_alloc;
};

// Pluggable supplier-side planner. The same outer loop runs with the exact
// search, the greedy descent, or the annealer slotted in here.
struct LowerSolver {
  std::string name;
  std::function<std::optional<ItemPlan>(const SupplierParams& sp, int item, int qty,
                                        int horizon, int lt_lower)>
      solve;
};

// The default lower solver: best-first search with the given beam (0 =
// unbounded) and production stride.
LowerSolver make_astar_solver(int beam = 0, int stride = 1);

// Linearly decreasing inertia weight; iter runs from 0 (w_max) to
// cfg.iterations (w_min).
double inertia(int iter, const SwarmConfig& cfg);

// Per-element velocity ceiling: velocity_coeff * (alloc_max - alloc_min).
// The lower bound is its negation.
RealMatrix velocity_limits(const ProcurementInstance& inst, const SwarmConfig& cfg);

// v <- w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x), elementwise, then clamped
// to +-limits. Cells whose stored coordinate is exactly zero enter the
// difference terms as alloc_min - epsilon so an inactive supplier can be
// pulled back into the running. Returns the number of clamped elements.
int update_velocity(Particle& p, const RealMatrix& gbest, double w, const SwarmConfig& cfg,
                    const ProcurementInstance& inst, const RealMatrix& limits,
                    std::mt19937_64& rng);

// x <- x + v. No rounding here; integerization happens in repair_demand.
void update_position(Particle& p);

// Floors the shadow coordinates into an allocation (entries below alloc_min
// drop to zero, entries above alloc_max clamp), then walks random +-1
// adjustments until every item's column sums to its demand. Adjustments at
// the bounds jump between 0 and alloc_min. On success the integer result is
// written back into `position` with each cell's fractional residue
// re-attached; returns the allocation. Returns nullopt when the walk cannot
// balance the demand within the step budget.
std::optional<AllocationMatrix> repair_demand(RealMatrix& position,
                                              const ProcurementInstance& inst,
                                              std::mt19937_64& rng);

// Random initial population: per item, suppliers are picked in random order
// and given a uniform lot in [alloc_min, min(alloc_max, remaining demand)]
// until the demand is covered; unpicked suppliers stay at zero. Velocities
// start at zero. Throws std::runtime_error when an item's demand cannot be
// covered within the retry budget.
std::vector<Particle> init_population(const ProcurementInstance& inst, const SwarmConfig& cfg);

// Memo for repeated (supplier, item, quantity) subproblems within one run;
// the lower solvers are pure functions of that triple, so caching is exact.
class SubproblemCache {
 public:
  const std::optional<ItemPlan>* find(int supplier, int item, int qty) const;
  void store(int supplier, int item, int qty, std::optional<ItemPlan> plan);
  std::size_t size() const { return map_.size(); }

 private:
  static std::uint64_t key(int supplier, int item, int qty);
  std::unordered_map<std::uint64_t, std::optional<ItemPlan>> map_;
};

struct EvalResult {
  double objective = 0.0;  // +inf when any dispatched subproblem is infeasible
  std::vector<SupplierPlan> plans;
};

// Dispatches every active cell of the allocation to the lower solver, prices
// the resulting plans, and scores the buyer objective.
EvalResult evaluate(const AllocationMatrix& alloc, const ProcurementInstance& inst,
                    const LowerSolver& solver, SubproblemCache* cache = nullptr);

struct SolveReport {
  AllocationMatrix best_alloc;
  double best_value = 0.0;
  std::vector<SupplierPlan> best_plans;
  std::vector<double> trace;  // gbest after init, then after each iteration
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t clamp_events = 0;     // velocity elements hit the limit
  std::uint64_t reinitialized = 0;    // particles whose repair gave up
  std::uint64_t cache_hits = 0;
  std::uint64_t subproblems_solved = 0;
};

// Full outer loop: init, then per iteration velocity/position/repair/evaluate
// and personal/global best updates on strict improvement. Deterministic for a
// fixed (instance, config) pair: every random draw comes from a substream
// keyed by (seed, iteration, particle).
SolveReport run(const ProcurementInstance& inst, const SwarmConfig& cfg,
                const LowerSolver& solver);

}  // namespace bilevel::pso
