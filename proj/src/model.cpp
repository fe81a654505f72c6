#include "bilevel/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bilevel {

namespace {

double at_or_last(const std::vector<double>& v, int period) {
  if (v.empty()) return 0.0;
  int idx = period - 1;
  if (idx < 0) idx = 0;
  if (idx >= static_cast<int>(v.size())) idx = static_cast<int>(v.size()) - 1;
  return v[static_cast<std::size_t>(idx)];
}

}  // namespace

double SupplierParams::cap_ord_at(int period) const { return at_or_last(cap_ord, period); }
double SupplierParams::cap_ot_at(int period) const { return at_or_last(cap_ot, period); }

int PeriodRecord::shipped() const {
  return std::accumulate(sends.begin(), sends.end(), 0);
}

int PeriodRecord::vehicles_used() const {
  int n = 0;
  for (int s : sends)
    if (s > 0) ++n;
  return n;
}

// ---------------------------------------------------------------------------

std::vector<std::string> validate_instance(const ProcurementInstance& inst) {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& msg) { out.push_back(msg); };

  const int n = inst.supplier_count();
  const int m = inst.item_count();
  const BuyerParams& b = inst.buyer;

  if (n == 0) fail("no suppliers");
  if (m == 0) fail("no items");
  if (inst.horizon < 1) fail("horizon must be at least 1");

  if (b.alloc_min.rows() != n || b.alloc_min.cols() != m) fail("q_min dimensions do not match suppliers x items");
  if (b.alloc_max.rows() != n || b.alloc_max.cols() != m) fail("q_max dimensions do not match suppliers x items");
  if (b.ordering_cost.rows() != n || b.ordering_cost.cols() != m)
    fail("ordering_cost dimensions do not match suppliers x items");

  if (b.lt_lower < 1) fail("lt_lower must be at least 1");
  if (b.lt_upper < b.lt_lower) fail("lt_upper must not precede lt_lower");
  if (b.delay_factor < 0) fail("lambda must be non-negative");
  if (b.w1 < 0 || b.w2 < 0) fail("objective weights must be non-negative");
  if (std::abs(b.w1 + b.w2 - 1.0) > 1e-9) fail("objective weights must sum to 1");

  for (int j = 0; j < m; ++j) {
    if (b.demand[static_cast<std::size_t>(j)] < 0) {
      std::ostringstream os;
      os << "negative demand for item " << j;
      fail(os.str());
    }
  }

  for (int j = 0; j < m && b.alloc_max.rows() == n && b.alloc_max.cols() == m &&
                  b.alloc_min.rows() == n && b.alloc_min.cols() == m;
       ++j) {
    long long cover = 0;
    bool bounds_ok = true;
    for (int i = 0; i < n; ++i) {
      if (b.alloc_min(i, j) < 0 || b.alloc_max(i, j) < 0) {
        bounds_ok = false;
        std::ostringstream os;
        os << "negative allocation bound at supplier " << i << ", item " << j;
        fail(os.str());
      }
      if (b.alloc_min(i, j) > b.alloc_max(i, j)) {
        std::ostringstream os;
        os << "q_min exceeds q_max at supplier " << i << ", item " << j;
        fail(os.str());
      }
      cover += b.alloc_max(i, j);
    }
    if (bounds_ok && cover < b.demand[static_cast<std::size_t>(j)]) {
      std::ostringstream os;
      os << "demand uncoverable for item " << j << ": sum of q_max " << cover << " < demand "
         << b.demand[static_cast<std::size_t>(j)];
      fail(os.str());
    }
  }

  for (int i = 0; i < n; ++i) {
    const SupplierParams& sp = inst.suppliers[static_cast<std::size_t>(i)];
    auto want_m = [&](std::size_t got, const char* what) {
      if (static_cast<int>(got) != m) {
        std::ostringstream os;
        os << "supplier " << i << ": " << what << " has " << got << " entries, expected " << m;
        fail(os.str());
      }
    };
    want_m(sp.prod_cost_ord.size(), "cor");
    want_m(sp.prod_cost_ot.size(), "cov");
    want_m(sp.proc_time.size(), "pt");
    want_m(sp.hold_cost.size(), "h");
    want_m(sp.hold_cost_interval.size(), "h_prime");
    want_m(sp.setup_cost.size(), "sc");
    want_m(sp.safety_stock.size(), "ss");
    want_m(sp.vehicle_cap.size(), "vcap");
    want_m(sp.store_cap.size(), "incap");

    if (sp.cap_ord.empty()) fail("supplier " + std::to_string(i) + ": empty orc");
    if (sp.cap_ot.empty()) fail("supplier " + std::to_string(i) + ": empty ovc");
    if (sp.vehicle_count < 1) fail("supplier " + std::to_string(i) + ": vehicles must be at least 1");
    if (sp.vehicle_fixed_cost < 0 || sp.vehicle_unit_cost < 0 || sp.delay_factor < 0 ||
        sp.profit_rate < 0)
      fail("supplier " + std::to_string(i) + ": negative cost parameter");

    for (double c : sp.cap_ord)
      if (c < 0) fail("supplier " + std::to_string(i) + ": negative orc entry");
    for (double c : sp.cap_ot)
      if (c < 0) fail("supplier " + std::to_string(i) + ": negative ovc entry");

    if (static_cast<int>(sp.proc_time.size()) != m) continue;
    for (int j = 0; j < m; ++j) {
      std::ostringstream where;
      where << "supplier " << i << ", item " << j;
      if (sp.proc_time[static_cast<std::size_t>(j)] <= 0) fail(where.str() + ": pt must be positive");
      if (sp.prod_cost_ord[static_cast<std::size_t>(j)] < 0 ||
          sp.prod_cost_ot[static_cast<std::size_t>(j)] < 0 ||
          sp.hold_cost[static_cast<std::size_t>(j)] < 0 ||
          sp.hold_cost_interval[static_cast<std::size_t>(j)] < 0 ||
          sp.setup_cost[static_cast<std::size_t>(j)] < 0)
        fail(where.str() + ": negative cost parameter");
      if (sp.safety_stock[static_cast<std::size_t>(j)] < 0) fail(where.str() + ": negative ss");
      if (sp.vehicle_cap[static_cast<std::size_t>(j)] < 1) fail(where.str() + ": vcap must be at least 1");
      if (sp.store_cap[static_cast<std::size_t>(j)] < 1) fail(where.str() + ": incap must be at least 1");
    }
  }

  return out;
}

int estimate_horizon(const ProcurementInstance& inst) {
  int horizon = 1;
  for (int i = 0; i < inst.supplier_count(); ++i) {
    const SupplierParams& sp = inst.suppliers[static_cast<std::size_t>(i)];
    for (int j = 0; j < inst.item_count(); ++j) {
      const int qmax = inst.buyer.alloc_max(i, j);
      if (qmax <= 0) continue;
      const double pt = sp.proc_time[static_cast<std::size_t>(j)];
      const double cap = sp.cap_ord_at(1);
      const long long ship_rate =
          static_cast<long long>(sp.vehicle_count) *
          std::min(sp.vehicle_cap[static_cast<std::size_t>(j)], sp.store_cap[static_cast<std::size_t>(j)]);
      if (cap <= 0 || ship_rate <= 0) {
        std::ostringstream os;
        os << "unbounded horizon: supplier " << i << ", item " << j
           << " has positive q_max but zero production or shipping capacity";
        throw UnboundedHorizonError(os.str());
      }
      const int prod_periods = static_cast<int>(std::ceil(qmax * pt / cap - 1e-12));
      const int ship_periods =
          static_cast<int>((qmax + ship_rate - 1) / ship_rate);
      horizon = std::max({horizon, prod_periods, ship_periods});
    }
  }
  return horizon;
}

double supplier_delay_penalty(int units_sent, int period, int lt_lower, double gamma) {
  const int lag = period - lt_lower;
  if (lag <= 0 || units_sent <= 0) return 0.0;
  return gamma * lag * units_sent;
}

double buyer_shortage_cost(int units_sent, int period, int lt_upper, double lambda) {
  const int lag = period - lt_upper;
  if (lag <= 0 || units_sent <= 0) return 0.0;
  return lambda * lag * units_sent;
}

CostBreakdown item_cost(const ItemPlan& plan, const SupplierParams& sp, int item) {
  CostBreakdown cb;
  const std::size_t j = static_cast<std::size_t>(item);
  const double cor = sp.prod_cost_ord[j];
  const double cov = sp.prod_cost_ot[j];
  const double hpt = sp.hold_cost[j] * sp.proc_time[j];
  const double hi = sp.hold_cost_interval[j];
  const double sc = sp.setup_cost[j];

  double prev_inv = plan.initial_inventory;
  for (const PeriodRecord& pr : plan.periods) {
    cb.production_ord += cor * pr.ordinary;
    cb.production_ot += cov * pr.overtime;

    double sq = 0.0;
    for (int s : pr.sends) sq += static_cast<double>(s) * s;
    const double inv = pr.inventory;
    cb.holding += hpt * 0.5 * (sq + inv * inv - prev_inv * prev_inv);
    cb.holding_interval += hi * inv;

    cb.delivery_fixed += sp.vehicle_fixed_cost * pr.vehicles_used();
    cb.delivery_unit += sp.vehicle_unit_cost * pr.shipped();
    if (pr.setup) cb.setup += sc;
    cb.delay += pr.delay_penalty;

    prev_inv = inv;
  }
  return cb;
}

CostBreakdown supplier_total_cost(const SupplierPlan& plan, const SupplierParams& sp, int item) {
  auto it = plan.items.find(item);
  if (it == plan.items.end()) return CostBreakdown{};
  return item_cost(it->second, sp, item);
}

double bid_price(double total_cost, double delay_sum, int qty, double profit_rate) {
  if (qty <= 0) throw std::invalid_argument("bid_price: quantity must be positive");
  return (1.0 + profit_rate) / qty * (total_cost - delay_sum);
}

BuyerObjective buyer_objective(const AllocationMatrix& alloc,
                               const std::vector<SupplierPlan>& plans,
                               const ProcurementInstance& inst) {
  BuyerObjective obj;
  const BuyerParams& b = inst.buyer;

  auto plan_for = [&plans](int supplier) -> const SupplierPlan* {
    for (const SupplierPlan& sp : plans)
      if (sp.supplier == supplier) return &sp;
    return nullptr;
  };

  for (int i = 0; i < alloc.rows(); ++i) {
    const SupplierPlan* sp = plan_for(i);
    for (int j = 0; j < alloc.cols(); ++j) {
      const int q = alloc(i, j);
      if (q <= 0) continue;
      if (sp == nullptr) throw std::invalid_argument("plan/allocation mismatch: no plan for supplier " + std::to_string(i));
      auto it = sp->items.find(j);
      if (it == sp->items.end())
        throw std::invalid_argument("plan/allocation mismatch: supplier " + std::to_string(i) +
                                    " has no plan for item " + std::to_string(j));
      const ItemPlan& ip = it->second;
      int shipped = 0;
      for (const PeriodRecord& pr : ip.periods) shipped += pr.shipped();
      if (shipped != q)
        throw std::invalid_argument("plan/allocation mismatch: supplier " + std::to_string(i) +
                                    ", item " + std::to_string(j) + " ships " + std::to_string(shipped) +
                                    " of " + std::to_string(q));

      obj.procurement += ip.price * q + b.ordering_cost(i, j);
      for (std::size_t t = 0; t < ip.periods.size(); ++t)
        obj.delay += buyer_shortage_cost(ip.periods[t].shipped(), static_cast<int>(t) + 1,
                                         b.lt_upper, b.delay_factor);
    }
  }
  obj.value = b.w1 * obj.procurement + b.w2 * obj.delay;
  return obj;
}

std::vector<std::string> check_plan_feasible(const ItemPlan& plan, const SupplierParams& sp,
                                             int item, int qty, int horizon) {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& msg) { out.push_back(msg); };
  const std::size_t j = static_cast<std::size_t>(item);
  const double pt = sp.proc_time[j];
  const int incap = sp.store_cap[j];
  const int vcap = sp.vehicle_cap[j];
  const int ss = sp.safety_stock[j];

  if (static_cast<int>(plan.periods.size()) > horizon)
    fail("plan spans " + std::to_string(plan.periods.size()) + " periods, horizon is " +
         std::to_string(horizon));
  if (plan.initial_inventory != ss)
    fail("opening inventory " + std::to_string(plan.initial_inventory) + " differs from safety stock " +
         std::to_string(ss));

  long long produced_total = 0;
  long long shipped_total = 0;
  int prev_inv = plan.initial_inventory;
  int t = 0;
  for (const PeriodRecord& pr : plan.periods) {
    ++t;
    const std::string where = "period " + std::to_string(t);
    if (pr.ordinary < 0 || pr.overtime < 0) fail(where + ": negative production");
    if (pr.ordinary * pt > sp.cap_ord_at(t) + 1e-9) fail(where + ": ordinary capacity exceeded");
    if (pr.overtime * pt > sp.cap_ot_at(t) + 1e-9) fail(where + ": overtime capacity exceeded");
    if (pr.produced() > 0 && !pr.setup) fail(where + ": production without setup");
    if (pr.produced() > qty) fail(where + ": production exceeds lot size");

    if (static_cast<int>(pr.sends.size()) > sp.vehicle_count)
      fail(where + ": more sends than vehicles");
    int shipped = 0;
    for (std::size_t v = 0; v < pr.sends.size(); ++v) {
      const int s = pr.sends[v];
      if (s < 0) fail(where + ": negative send");
      if (s > vcap) fail(where + ": vehicle " + std::to_string(v) + " over vehicle capacity");
      if (s > incap) fail(where + ": vehicle " + std::to_string(v) + " over store capacity");
      shipped += s;
    }

    const long long balance = static_cast<long long>(prev_inv) + pr.produced() - shipped;
    if (balance != pr.inventory) fail(where + ": inventory balance broken");
    if (pr.inventory < 0) fail(where + ": negative inventory");
    if (pr.inventory > incap) fail(where + ": inventory over store capacity");

    produced_total += pr.produced();
    shipped_total += shipped;
    prev_inv = pr.inventory;
  }

  if (shipped_total != qty)
    fail("total shipped " + std::to_string(shipped_total) + " differs from lot size " +
         std::to_string(qty));
  const bool warehouse_covered = produced_total == 0 && qty <= plan.initial_inventory;
  if (!warehouse_covered && produced_total != qty)
    fail("total production " + std::to_string(produced_total) + " differs from lot size " +
         std::to_string(qty));

  return out;
}

}  // namespace bilevel
