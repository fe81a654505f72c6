#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bilevel/grid.hpp"

namespace bilevel {

// ---------------------------------------------------------------------------
// Problem data
//
// One buyer orders m items from n candidate suppliers over a shared horizon of
// T periods. The buyer splits each item's demand across suppliers (subject to
// per-cell allocation bounds); every supplier that receives an order plans its
// own production and vehicle deliveries and quotes a price for the lot.
// ---------------------------------------------------------------------------

struct BuyerParams {
  std::vector<int> demand;      // per item, units
  int lt_lower = 1;             // first period in which deliveries count as late (supplier side)
  int lt_upper = 1;             // last period tolerated by the buyer before shortage cost accrues
  double delay_factor = 0.0;    // lambda: shortage cost per unit per period past lt_upper
  double w1 = 0.4;              // weight on procurement cost
  double w2 = 0.6;              // weight on expected shortage cost
  Grid<int> alloc_min;          // supplier x item: smallest lot a supplier will accept
  Grid<int> alloc_max;          // supplier x item: largest lot a supplier can take
  Grid<double> ordering_cost;   // supplier x item: fixed cost of placing the order
};

struct SupplierParams {
  // per item
  std::vector<double> prod_cost_ord;       // unit production cost, ordinary shift
  std::vector<double> prod_cost_ot;        // unit production cost, overtime
  std::vector<double> proc_time;           // processing time per unit
  std::vector<double> hold_cost;           // holding cost rate applied within a period
  std::vector<double> hold_cost_interval;  // holding cost per unit carried across periods
  std::vector<double> setup_cost;          // charged in every period with production
  std::vector<int> safety_stock;           // opening inventory, restored by horizon end
  std::vector<int> vehicle_cap;            // per-vehicle load limit
  std::vector<int> store_cap;              // warehouse limit on end-of-period inventory and any single send

  // per period; the last entry repeats past the end of the list
  std::vector<double> cap_ord;  // ordinary shift time available
  std::vector<double> cap_ot;   // overtime time available

  int vehicle_count = 1;
  double vehicle_fixed_cost = 0.0;  // alpha: per dispatched vehicle
  double vehicle_unit_cost = 0.0;   // beta: per unit shipped
  double delay_factor = 0.0;        // gamma: supplier-side lateness penalty rate
  double profit_rate = 0.0;         // markup applied when quoting a price

  double cap_ord_at(int period) const;  // period is 1-based
  double cap_ot_at(int period) const;
};

struct ProcurementInstance {
  std::string name;
  std::uint64_t seed = 0;
  BuyerParams buyer;
  std::vector<SupplierParams> suppliers;
  int horizon = 1;

  int supplier_count() const { return static_cast<int>(suppliers.size()); }
  int item_count() const { return static_cast<int>(buyer.demand.size()); }
};

// Allocation decided by the buyer: q(i,j) units of item j ordered from supplier i.
// A cell is active when q > 0; active cells must respect the allocation bounds.
using AllocationMatrix = Grid<int>;

// ---------------------------------------------------------------------------
// Supplier-side plans
// ---------------------------------------------------------------------------

struct PeriodRecord {
  int ordinary = 0;        // units produced on the ordinary shift
  int overtime = 0;        // units produced in overtime
  std::vector<int> sends;  // units loaded per vehicle this period
  bool setup = false;      // true when any production happened
  int inventory = 0;       // end-of-period inventory
  double delay_penalty = 0.0;  // lateness charge for this period's sends

  int produced() const { return ordinary + overtime; }
  int shipped() const;
  int vehicles_used() const;
};

// One supplier's plan for a single item: period records run from period 1 up to
// the period in which the last unit ships; quiet trailing periods are omitted.
struct ItemPlan {
  int item = 0;
  int order_qty = 0;
  int initial_inventory = 0;
  std::vector<PeriodRecord> periods;
  double total_cost = 0.0;  // full cost law, see item_cost()
  double delay_sum = 0.0;   // sum of per-period delay penalties
  double price = 0.0;       // quoted unit price for the lot
};

struct SupplierPlan {
  int supplier = 0;
  std::map<int, ItemPlan> items;  // keyed by item index
};

struct CostBreakdown {
  double production_ord = 0.0;
  double production_ot = 0.0;
  double holding = 0.0;           // within-period rate component (quadratic in loads)
  double holding_interval = 0.0;  // carry-over component
  double delivery_fixed = 0.0;
  double delivery_unit = 0.0;
  double setup = 0.0;
  double delay = 0.0;

  double total() const {
    return production_ord + production_ot + holding + holding_interval +
           delivery_fixed + delivery_unit + setup + delay;
  }
};

struct BuyerObjective {
  double procurement = 0.0;  // sum of price*qty + ordering costs
  double delay = 0.0;        // expected shortage cost from late deliveries
  double value = 0.0;        // w1*procurement + w2*delay
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Structural and bound checks; returns one message per violation, empty when
// the instance is usable. Solvers assume a clean report.
std::vector<std::string> validate_instance(const ProcurementInstance& inst);

// Smallest horizon that leaves every (supplier, item) cell enough production
// and shipping periods for its largest admissible lot. Throws
// UnboundedHorizonError when a cell with positive allocation bound has zero
// production or shipping capacity.
int estimate_horizon(const ProcurementInstance& inst);

struct UnboundedHorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lateness charge on the supplier side: gamma * (t - lt_lower)+ * units.
double supplier_delay_penalty(int units_sent, int period, int lt_lower, double gamma);

// Shortage charge on the buyer side: lambda * (t - lt_upper)+ * units.
double buyer_shortage_cost(int units_sent, int period, int lt_upper, double lambda);

// Full cost law for one item plan, evaluated term by term over its periods:
// production (both shifts), within-period holding
//   H*PT/2 * (sum of squared vehicle loads + I_t^2 - I_{t-1}^2),
// carry-over holding H'*I_t, vehicle fixed/unit charges, setup charges, and
// lateness penalties. The quadratic holding term telescopes to zero over any
// plan that ends at its opening inventory; for stock-depleting plans it can
// come out negative (the depletion refunds holding that was never incurred).
CostBreakdown item_cost(const ItemPlan& plan, const SupplierParams& sp, int item);

// Convenience wrapper over item_cost for a full supplier plan.
CostBreakdown supplier_total_cost(const SupplierPlan& plan, const SupplierParams& sp, int item);

// Unit price quoted for a lot: (1 + profit_rate) / qty * (total_cost - delay_sum).
// The supplier absorbs its own lateness penalties rather than billing them.
double bid_price(double total_cost, double delay_sum, int qty, double profit_rate);

// Buyer's weighted objective for an allocation and the matching supplier plans.
// Throws std::invalid_argument when an active cell has no plan or a plan ships
// a different quantity than allocated.
BuyerObjective buyer_objective(const AllocationMatrix& alloc,
                               const std::vector<SupplierPlan>& plans,
                               const ProcurementInstance& inst);

// Checks one item plan against the supplier-side constraint set: shift
// capacities, setup coupling, inventory balance and bounds, vehicle limits,
// and the two lot equations (total production = qty, total shipped = qty).
// A production-free plan that covers the lot from opening stock (qty <= I0)
// is legal and exempt from the production equation.
std::vector<std::string> check_plan_feasible(const ItemPlan& plan, const SupplierParams& sp,
                                             int item, int qty, int horizon);

}  // namespace bilevel
