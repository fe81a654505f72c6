#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bilevel/model.hpp"

// Reference solvers used only by tests. Everything here re-derives its answers
// by exhaustive enumeration, with its own copy of the per-period loading rule,
// so a planner bug cannot hide behind shared code. Intended for tiny inputs;
// every entry point carries a hard state budget and reports loudly when it is
// hit instead of returning a half-searched answer.

namespace bilevel::oracle {

struct EnumerationBudget {
  std::uint64_t max_states = 1000000;
};

enum class Status { optimal, infeasible, budget_exceeded };

struct SubproblemResult {
  Status status = Status::infeasible;
  std::optional<ItemPlan> plan;  // set when status == optimal
  std::uint64_t states = 0;      // period-states visited by the enumeration
};

// Exhaustive depth-first walk over the same decision space the planner
// searches: both production quantities per period (every unit value, no
// stride), deliveries fixed by the loading rule. Returns the cheapest
// complete plan under the full cost law.
SubproblemResult brute_force_subproblem(const SupplierParams& sp, int item, int qty, int horizon,
                                        int lt_lower, const EnumerationBudget& budget = {});

struct StateKey {
  int period = 0;
  int inventory = 0;
  int remaining = 0;
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t v : {static_cast<std::uint64_t>(k.period),
                            static_cast<std::uint64_t>(k.inventory),
                            static_cast<std::uint64_t>(k.remaining)}) {
      h ^= v + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

using CompletionTable = std::unordered_map<StateKey, double, StateKeyHash>;

// Cheapest cost-to-finish for every state reachable in the enumeration above,
// in the planner's additive per-period accounting (the inventory-squared
// telescope is dropped; it cancels over complete lots). States that cannot
// finish map to +infinity. This is the yardstick the optimism audit compares
// the completion estimate against.
CompletionTable completion_cost_table(const SupplierParams& sp, int item, int qty, int horizon,
                                      int lt_lower, const EnumerationBudget& budget = {});

// Every demand split the buyer could order: per item, all ways to spread the
// demand over suppliers with each positive cell inside its allocation bounds,
// combined across items. Throws std::length_error past the budget.
std::vector<AllocationMatrix> candidate_allocations(const ProcurementInstance& inst,
                                                    const EnumerationBudget& budget = {});

struct BilevelResult {
  Status status = Status::infeasible;
  double best_value = 0.0;
  std::optional<AllocationMatrix> best_alloc;
  std::uint64_t evaluations = 0;  // (supplier, item, qty) cells solved
};

// Exact buyer optimum: enumerates the demand splits item by item (the
// objective adds up cell by cell, so items can be optimized independently),
// pricing each cell with the enumeration solver above. Infeasible when some
// item has no split whose every cell admits a plan.
BilevelResult brute_force_bilevel(const ProcurementInstance& inst,
                                  const EnumerationBudget& budget = {});

}  // namespace bilevel::oracle
