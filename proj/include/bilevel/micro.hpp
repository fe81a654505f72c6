#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bilevel/model.hpp"

// Seeded families of deliberately tiny problems. They exist so that tests can
// afford exhaustive reference answers: short horizons, unit-scale capacities,
// lots small enough to enumerate.

namespace bilevel::micro {

struct SubproblemCase {
  std::string name;
  SupplierParams sp;
  int item = 0;
  int qty = 0;
  int horizon = 1;
  int lt_lower = 1;
};

// One-cell planning problems: horizon <= 3, at most 4 production units per
// shift and period, 1-2 vehicles, lots <= 8. Overtime never undercuts the
// ordinary shift (as in every drawn instance). A slice of the cases is
// stock-covered (lot within opening inventory) and a few are impossible
// inside the horizon on purpose.
std::vector<SubproblemCase> subproblem_cases(std::uint64_t seed, int count);

// Two suppliers, one item, demand and bounds small enough that every split of
// the demand can be priced exhaustively.
ProcurementInstance tiny_bilevel_instance(std::uint64_t seed);

// Hand-built plans for exercising the feasibility checker: one clean plan per
// tier plus targeted corruptions (capacity, lot equations, balance, vehicle
// and store limits, setup coupling, horizon overrun).
struct FeasibilityCase {
  std::string name;
  ItemPlan plan;
  SupplierParams sp;
  int item = 0;
  int qty = 0;
  int horizon = 1;
  bool should_pass = true;
};

std::vector<FeasibilityCase> feasibility_cases();

}  // namespace bilevel::micro
