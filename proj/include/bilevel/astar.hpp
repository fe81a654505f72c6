#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "bilevel/model.hpp"

namespace bilevel::astar {

// ---------------------------------------------------------------------------
// Lower-level planner: one supplier, one item, one lot of `order_qty` units.
//
// The search walks period by period. An action fixes the two production
// quantities for the next period; the deliveries that follow are not searched
// over but resolved by a closed-form loading rule (base load per vehicle,
// vehicle count, then an augmentation step that ships leftover stock when the
// balance equation says holding it is dearer). A node is a goal once nothing
// remains undelivered.
//
// Safety stock handling: the opening inventory is the safety stock, and it
// must be intact again once the lot completes. While the order is open the
// planner treats that quantity as a floor below which deliveries may not dig
// (`reserve`), which together with the production bound (never produce beyond
// what the lot still owes) pins total production to the lot size. The one
// exception is a lot small enough to be covered from opening stock: then no
// production is planned at all and the reserve drops to what must remain
// after the lot ships.
// ---------------------------------------------------------------------------

struct PlannerState {
  int period = 0;     // periods completed so far
  int inventory = 0;  // on-hand at the end of `period`
  int remaining = 0;  // undelivered units of the lot

  friend bool operator==(const PlannerState&, const PlannerState&) = default;
};

struct Action {
  int ordinary = 0;
  int overtime = 0;
  std::vector<int> sends;  // resolved by the loading rule, one entry per vehicle
};

struct SearchNode {
  PlannerState state;
  double g = 0.0;  // cost of the periods walked so far
  double h = 0.0;  // optimistic completion estimate
  double f = 0.0;  // g + h
  int parent = -1;  // arena index of the predecessor
  Action action;    // how this node's period was played
};

// Per-solve working slice of one (supplier, item) pair.
struct PlannerContext {
  double cor = 0, cov = 0, pt = 1, hold = 0, hold_interval = 0, setup = 0;
  int ss = 0, vcap = 1, incap = 1, vehicles = 1;
  double alpha = 0, beta = 0, gamma = 0;
  std::vector<double> cap_ord, cap_ot;  // per period, last entry repeats
  int order_qty = 0, horizon = 1, lt_lower = 1;
  int reserve = 0;  // inventory floor while the order is open
  int stride = 1;   // production quantities are enumerated in steps of `stride`

  static PlannerContext make(const SupplierParams& sp, int item, int qty, int horizon,
                             int lt_lower, int stride = 1);

  double cap_ord_time(int period) const;
  double cap_ot_time(int period) const;
  int cap_ord_units(int period) const;  // floor(time / pt)
  int cap_ot_units(int period) const;
  // Largest per-period time budget over the remaining periods; bounds how fast
  // outstanding production could possibly be finished.
  double best_future_time_cap(int period) const;
};

// Per-vehicle load that balances the within-period holding rate against the
// vehicle charges, clipped by vehicle capacity, store capacity, and the
// undelivered quantity. Never below one unit.
int base_delivery_quantity(double alpha, double beta, double hold, double pt, int vcap,
                           int incap, int remaining);

// Vehicles dispatched this period: enough base loads to move `basis` units,
// capped by the fleet size. Zero when nothing needs moving.
int delivery_count(int basis, int allowed_qty, int vehicles);

struct DeliveryOutcome {
  std::vector<int> sends;  // one entry per vehicle in the fleet
  int shipped = 0;
  int end_inventory = 0;  // includes any reserved stock
};

// Resolves the deliveries for one period: base loads for the dispatched
// vehicles, then an augmentation step that tops the loads up with leftover
// stock when the holding/delivery balance favors shipping it. The total is
// clipped to what is shippable (stock above the reserve, at most the
// undelivered quantity) and to the per-vehicle caps; the final total is spread
// evenly across the dispatched vehicles, remainder one unit at a time.
DeliveryOutcome augmented_delivery(const PlannerContext& ctx, int prev_inventory, int production,
                                   int remaining);

// Optimistic completion cost from a state: production of what the stock
// cannot cover at the ordinary rate, setups for the fewest production periods
// that could do it, vehicle charges for the fewest dispatches that could move
// the undelivered units, the unavoidable part of the within-period holding
// rate, and the lateness of the earliest physically possible shipping
// schedule. Zero once nothing remains.
double heuristic_cost(const PlannerState& state, const PlannerContext& ctx);

// All legal next-period actions from a node: ordinary production from zero up
// to what the lot still owes (stride steps, bound always included), overtime
// quantities only once the ordinary shift is saturated. Deliveries are
// resolved per action; children that would end the period above store
// capacity, or that can never finish production in the remaining periods, are
// dropped (counted in *pruned when given).
std::vector<SearchNode> expand_node(const SearchNode& node, const PlannerContext& ctx,
                                    std::uint64_t* pruned = nullptr);

// Frontier ordered by (f, insertion order); ties go to the earlier insertion,
// which keeps every solve reproducible. A bounded frontier drops its worst
// entries only when `truncate` is called (once per expansion batch).
class OpenList {
 public:
  explicit OpenList(std::size_t capacity = 0);  // 0 = unbounded

  void push(int node_index, double f);
  std::optional<int> pop_lowest();
  void truncate();

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  // Node indices in frontier order, best first. For inspection and tests.
  std::vector<int> contents() const;

 private:
  struct Key {
    double f;
    std::uint64_t seq;
    int node;
    bool operator<(const Key& o) const {
      if (f != o.f) return f < o.f;
      return seq < o.seq;
    }
  };
  std::size_t capacity_;
  std::uint64_t next_seq_ = 0;
  std::set<Key> entries_;
};

struct PlannerOptions {
  std::size_t beam = 50;  // open-list capacity; 0 = unbounded
  int stride = 1;         // production enumeration step; 0 picks one from the capacity scale
};

struct SearchStats {
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t pruned = 0;      // children dropped for store-capacity or dead-end reasons
  std::uint64_t truncated = 0;   // children dropped by the beam
  std::size_t open_peak = 0;
};

// Plans one lot end to end. Returns the reconstructed plan (periods 1..goal,
// cost fields filled from the full cost law, price quoted) or nothing when no
// plan exists within the horizon. With an unbounded beam and stride 1 the
// returned plan is cost-optimal over the action space described above.
std::optional<ItemPlan> solve_subproblem(const SupplierParams& sp, int item, int qty, int horizon,
                                         int lt_lower, const PlannerOptions& opts = {},
                                         SearchStats* stats = nullptr);

}  // namespace bilevel::astar
