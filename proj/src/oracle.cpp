#include "bilevel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bilevel::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Everything the enumeration needs about one (supplier, item) cell. Kept
// deliberately separate from the planner's working set: this file re-derives
// the loading arithmetic on its own.
struct Cell {
  const SupplierParams* sp = nullptr;
  int item = 0;
  int qty = 0;
  int horizon = 1;
  int lt_lower = 1;
  int reserve = 0;

  double cor() const { return sp->prod_cost_ord[idx()]; }
  double cov() const { return sp->prod_cost_ot[idx()]; }
  double pt() const { return sp->proc_time[idx()]; }
  double hold() const { return sp->hold_cost[idx()]; }
  double hold_iv() const { return sp->hold_cost_interval[idx()]; }
  double setup() const { return sp->setup_cost[idx()]; }
  int ss() const { return sp->safety_stock[idx()]; }
  int vcap() const { return sp->vehicle_cap[idx()]; }
  int incap() const { return sp->store_cap[idx()]; }
  int vehicles() const { return sp->vehicle_count; }
  double alpha() const { return sp->vehicle_fixed_cost; }
  double beta() const { return sp->vehicle_unit_cost; }
  double gamma() const { return sp->delay_factor; }

  int prod_units_ord(int t) const { return time_to_units(sp->cap_ord_at(t)); }
  int prod_units_ot(int t) const { return time_to_units(sp->cap_ot_at(t)); }

 private:
  std::size_t idx() const { return static_cast<std::size_t>(item); }
  int time_to_units(double time) const {
    if (time <= 0) return 0;
    return static_cast<int>(std::floor(time / pt() + 1e-9));
  }
};

Cell make_cell(const SupplierParams& sp, int item, int qty, int horizon, int lt_lower) {
  Cell c;
  c.sp = &sp;
  c.item = item;
  c.qty = qty;
  c.horizon = horizon;
  c.lt_lower = lt_lower;
  c.reserve = qty <= c.ss() ? c.ss() - qty : c.ss();
  return c;
}

struct Loading {
  std::vector<int> sends;
  int shipped = 0;
  int end_inventory = 0;
};

// The per-period loading rule, written out again from scratch. Base load per
// vehicle balances the in-period holding rate against the vehicle charges;
// the dispatched vehicles then take extra units while the quadratic
// holding-versus-shipping balance of the leftover stock says to.
Loading resolve_loading(const Cell& c, int prev_inv, int production, int remaining) {
  Loading out;
  out.sends.assign(static_cast<std::size_t>(c.vehicles()), 0);

  const long long stock = static_cast<long long>(prev_inv) + production;
  out.end_inventory = static_cast<int>(stock);
  const long long shippable = std::min<long long>(stock - c.reserve, std::max(remaining, 0));
  if (shippable <= 0) return out;

  const double hpt = c.hold() * c.pt();
  long long base = std::min<long long>({c.vcap(), c.incap(), remaining});
  if (hpt > 0) {
    const double econ = (c.beta() + std::sqrt(c.beta() * c.beta() + 2.0 * c.alpha() * hpt)) / hpt;
    base = std::min(base, static_cast<long long>(std::floor(econ + 1e-9)));
  }
  if (base < 1) base = 1;

  const long long loads_needed =
      ((production > 0 ? production : shippable) + base - 1) / base;
  const int nv = static_cast<int>(std::min<long long>(c.vehicles(), loads_needed));
  if (nv <= 0) return out;

  const long long leftover = stock - nv * base;
  long long extra = 0;
  if (leftover > 0 && shippable > nv * base) {
    const double nvd = nv;
    const double lo = static_cast<double>(leftover);
    const double a2 = 0.5 * hpt * (nvd + nvd * nvd);
    const double a1 = nvd * (hpt * base - hpt * lo - c.hold_iv() - c.beta());
    const double a0 = 0.5 * hpt * (nvd * base * base + lo * lo) + c.hold_iv() * lo -
                      0.5 * hpt * static_cast<double>(prev_inv) * prev_inv - c.alpha() * nvd -
                      c.beta() * nvd * base;
    // smallest non-negative root of a2 x^2 + a1 x + a0
    double root = -1.0;
    if (std::abs(a2) < 1e-12) {
      if (std::abs(a1) >= 1e-12) {
        const double x = -a0 / a1;
        if (x >= -1e-9) root = std::max(0.0, x);
      }
    } else {
      const double disc = a1 * a1 - 4.0 * a2 * a0;
      if (disc >= 0) {
        const double s = std::sqrt(disc);
        const double lo_r = (-a1 - s) / (2.0 * a2);
        const double hi_r = (-a1 + s) / (2.0 * a2);
        const double first = std::min(lo_r, hi_r);
        const double second = std::max(lo_r, hi_r);
        if (first >= -1e-9)
          root = std::max(0.0, first);
        else if (second >= -1e-9)
          root = std::max(0.0, second);
      }
    }
    if (root >= 0) extra = static_cast<long long>(std::floor(root + 1e-9));
    if (extra < 0) extra = 0;
  }

  const long long per_vehicle = std::min(c.vcap(), c.incap());
  long long total = std::min<long long>({shippable, nv * per_vehicle, nv * (base + extra)});
  if (total <= 0) return out;

  const long long each = total / nv;
  long long spare = total % nv;
  for (int v = 0; v < nv; ++v) {
    long long load = each + (spare > 0 ? 1 : 0);
    if (spare > 0) --spare;
    out.sends[static_cast<std::size_t>(v)] = static_cast<int>(load);
  }
  out.shipped = static_cast<int>(total);
  out.end_inventory = static_cast<int>(stock - total);
  return out;
}

PeriodRecord to_record(const Cell& c, int t, int yr, int yn, const Loading& load) {
  PeriodRecord r;
  r.ordinary = yr;
  r.overtime = yn;
  r.sends = load.sends;
  r.setup = (yr + yn) > 0;
  r.inventory = load.end_inventory;
  r.delay_penalty = supplier_delay_penalty(load.shipped, t, c.lt_lower, c.gamma());
  return r;
}

// Walks every action sequence; keeps the cheapest complete plan under the
// full cost law. Returns false once the budget trips.
struct Enumerator {
  const Cell& c;
  const EnumerationBudget& budget;
  std::uint64_t states = 0;
  bool tripped = false;
  double best_cost = kInf;
  std::vector<PeriodRecord> best_periods;
  std::vector<PeriodRecord> trail;

  Enumerator(const Cell& cell, const EnumerationBudget& b) : c(cell), budget(b) {}

  void finish_candidate() {
    ItemPlan plan;
    plan.item = c.item;
    plan.order_qty = c.qty;
    plan.initial_inventory = c.ss();
    plan.periods = trail;
    const double cost = item_cost(plan, *c.sp, c.item).total();
    if (cost < best_cost) {
      best_cost = cost;
      best_periods = trail;
    }
  }

  void walk(int t, int inv, int remaining) {
    if (tripped) return;
    if (++states > budget.max_states) {
      tripped = true;
      return;
    }
    if (remaining == 0) {
      finish_candidate();
      return;
    }
    if (t == c.horizon) return;

    const int next = t + 1;
    const int owed = std::max(0, remaining + c.reserve - inv);
    const int cap_or = c.prod_units_ord(next);
    const int cap_ot = c.prod_units_ot(next);
    const int yr_top = std::min(owed, cap_or);

    auto descend = [&](int yr, int yn) {
      const Loading load = resolve_loading(c, inv, yr + yn, remaining);
      if (load.end_inventory > c.incap()) return;  // store overflow is illegal
      trail.push_back(to_record(c, next, yr, yn, load));
      walk(next, load.end_inventory, remaining - load.shipped);
      trail.pop_back();
    };

    for (int yr = 0; yr <= yr_top && !tripped; ++yr) descend(yr, 0);
    if (yr_top == cap_or && owed > yr_top && cap_ot > 0) {
      const int yn_top = std::min(owed - yr_top, cap_ot);
      for (int yn = 1; yn <= yn_top && !tripped; ++yn) descend(yr_top, yn);
    }
  }
};

}  // namespace

SubproblemResult brute_force_subproblem(const SupplierParams& sp, int item, int qty, int horizon,
                                        int lt_lower, const EnumerationBudget& budget) {
  if (qty < 0) throw std::invalid_argument("enumeration: negative lot size");
  const Cell cell = make_cell(sp, item, qty, horizon, lt_lower);

  Enumerator en(cell, budget);
  en.walk(0, cell.ss(), qty);

  SubproblemResult res;
  res.states = en.states;
  if (en.tripped) {
    res.status = Status::budget_exceeded;
    return res;
  }
  if (en.best_cost == kInf) {
    res.status = Status::infeasible;
    return res;
  }
  res.status = Status::optimal;
  ItemPlan plan;
  plan.item = item;
  plan.order_qty = qty;
  plan.initial_inventory = cell.ss();
  plan.periods = std::move(en.best_periods);
  const CostBreakdown cb = item_cost(plan, sp, item);
  plan.total_cost = cb.total();
  plan.delay_sum = cb.delay;
  plan.price = qty > 0 ? bid_price(plan.total_cost, plan.delay_sum, qty, sp.profit_rate) : 0.0;
  res.plan = std::move(plan);
  return res;
}

CompletionTable completion_cost_table(const SupplierParams& sp, int item, int qty, int horizon,
                                      int lt_lower, const EnumerationBudget& budget) {
  const Cell cell = make_cell(sp, item, qty, horizon, lt_lower);
  CompletionTable table;
  std::uint64_t states = 0;

  // Additive per-period cost as the search books it: no inventory-squared
  // telescope, everything else as in the full law.
  auto period_cost = [&cell](int t, int yr, int yn, const Loading& load) {
    double sq = 0.0;
    int used = 0;
    for (int s : load.sends) {
      sq += static_cast<double>(s) * s;
      if (s > 0) ++used;
    }
    double cost = cell.cor() * yr + cell.cov() * yn + 0.5 * cell.hold() * cell.pt() * sq +
                  cell.hold_iv() * load.end_inventory + cell.alpha() * used +
                  cell.beta() * load.shipped +
                  supplier_delay_penalty(load.shipped, t, cell.lt_lower, cell.gamma());
    if (yr + yn > 0) cost += cell.setup();
    return cost;
  };

  auto solve = [&](auto&& self, int t, int inv, int remaining) -> double {
    const StateKey key{t, inv, remaining};
    if (const auto it = table.find(key); it != table.end()) return it->second;
    if (++states > budget.max_states)
      throw std::length_error("completion table: state budget exceeded (" +
                              std::to_string(budget.max_states) + ")");

    double value = kInf;
    if (remaining == 0) {
      value = 0.0;
    } else if (t < cell.horizon) {
      const int next = t + 1;
      const int owed = std::max(0, remaining + cell.reserve - inv);
      const int cap_or = cell.prod_units_ord(next);
      const int cap_ot = cell.prod_units_ot(next);
      const int yr_top = std::min(owed, cap_or);

      auto consider = [&](int yr, int yn) {
        const Loading load = resolve_loading(cell, inv, yr + yn, remaining);
        if (load.end_inventory > cell.incap()) return;
        const double tail =
            self(self, next, load.end_inventory, remaining - load.shipped);
        if (tail == kInf) return;
        value = std::min(value, period_cost(next, yr, yn, load) + tail);
      };

      for (int yr = 0; yr <= yr_top; ++yr) consider(yr, 0);
      if (yr_top == cap_or && owed > yr_top && cap_ot > 0) {
        const int yn_top = std::min(owed - yr_top, cap_ot);
        for (int yn = 1; yn <= yn_top; ++yn) consider(yr_top, yn);
      }
    }
    table.emplace(key, value);
    return value;
  };

  solve(solve, 0, cell.ss(), qty);
  return table;
}

namespace {

// All ways to spread one item's demand over the suppliers. A cell is either
// skipped (zero) or takes a lot inside its bounds.
void splits_for_item(const ProcurementInstance& inst, int item, std::vector<int>& cur,
                     int supplier, int left, std::vector<std::vector<int>>& out,
                     std::uint64_t limit) {
  const int n = inst.supplier_count();
  if (supplier == n) {
    if (left == 0) {
      if (out.size() >= limit)
        throw std::length_error("demand split enumeration: budget exceeded");
      out.push_back(cur);
    }
    return;
  }
  // zero first, then every admissible lot
  cur[static_cast<std::size_t>(supplier)] = 0;
  splits_for_item(inst, item, cur, supplier + 1, left, out, limit);

  const int lo = std::max(1, inst.buyer.alloc_min(supplier, item));
  const int hi = std::min(left, inst.buyer.alloc_max(supplier, item));
  for (int q = lo; q <= hi; ++q) {
    cur[static_cast<std::size_t>(supplier)] = q;
    splits_for_item(inst, item, cur, supplier + 1, left - q, out, limit);
  }
  cur[static_cast<std::size_t>(supplier)] = 0;
}

std::vector<std::vector<int>> item_splits(const ProcurementInstance& inst, int item,
                                          std::uint64_t limit) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(inst.supplier_count()), 0);
  splits_for_item(inst, item, cur, 0, inst.buyer.demand[static_cast<std::size_t>(item)], out,
                  limit);
  return out;
}

}  // namespace

std::vector<AllocationMatrix> candidate_allocations(const ProcurementInstance& inst,
                                                    const EnumerationBudget& budget) {
  const int n = inst.supplier_count();
  const int m = inst.item_count();

  std::vector<std::vector<std::vector<int>>> per_item;
  per_item.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) per_item.push_back(item_splits(inst, j, budget.max_states));

  std::uint64_t combos = 1;
  for (const auto& s : per_item) {
    combos *= s.empty() ? 0 : s.size();
    if (combos > budget.max_states)
      throw std::length_error("allocation enumeration: budget exceeded");
  }

  std::vector<AllocationMatrix> out;
  if (combos == 0) return out;
  out.reserve(static_cast<std::size_t>(combos));

  std::vector<std::size_t> pick(static_cast<std::size_t>(m), 0);
  for (;;) {
    AllocationMatrix alloc(n, m, 0);
    for (int j = 0; j < m; ++j) {
      const auto& split = per_item[static_cast<std::size_t>(j)][pick[static_cast<std::size_t>(j)]];
      for (int i = 0; i < n; ++i) alloc(i, j) = split[static_cast<std::size_t>(i)];
    }
    out.push_back(std::move(alloc));

    int j = m - 1;
    while (j >= 0) {
      auto& p = pick[static_cast<std::size_t>(j)];
      if (++p < per_item[static_cast<std::size_t>(j)].size()) break;
      p = 0;
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

BilevelResult brute_force_bilevel(const ProcurementInstance& inst,
                                  const EnumerationBudget& budget) {
  const int n = inst.supplier_count();
  const int m = inst.item_count();
  BilevelResult res;

  // cell -> (w1-weighted procurement + w2-weighted shortage), or nothing when
  // the supplier has no plan for that lot
  std::unordered_map<std::uint64_t, std::optional<double>> cell_cost;
  auto cell_key = [m](int i, int j, int q) {
    return (static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(m) + j) * 1000003ull + q;
  };

  bool budget_hit = false;
  auto weighted_cell = [&](int i, int j, int q) -> std::optional<double> {
    const std::uint64_t key = cell_key(i, j, q);
    if (const auto it = cell_cost.find(key); it != cell_cost.end()) return it->second;

    const SubproblemResult sub = brute_force_subproblem(
        inst.suppliers[static_cast<std::size_t>(i)], j, q, inst.horizon, inst.buyer.lt_lower,
        budget);
    ++res.evaluations;
    std::optional<double> cost;
    if (sub.status == Status::budget_exceeded) {
      budget_hit = true;
    } else if (sub.status == Status::optimal) {
      double shortage = 0.0;
      for (std::size_t t = 0; t < sub.plan->periods.size(); ++t)
        shortage += buyer_shortage_cost(sub.plan->periods[t].shipped(), static_cast<int>(t) + 1,
                                        inst.buyer.lt_upper, inst.buyer.delay_factor);
      cost = inst.buyer.w1 * (sub.plan->price * q + inst.buyer.ordering_cost(i, j)) +
             inst.buyer.w2 * shortage;
    }
    cell_cost.emplace(key, cost);
    return cost;
  };

  AllocationMatrix best(n, m, 0);
  double total = 0.0;
  for (int j = 0; j < m && !budget_hit; ++j) {
    const auto splits = item_splits(inst, j, budget.max_states);
    double best_cost = kInf;
    const std::vector<int>* best_split = nullptr;
    for (const auto& split : splits) {
      double cost = 0.0;
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const int q = split[static_cast<std::size_t>(i)];
        if (q == 0) continue;
        const auto cell = weighted_cell(i, j, q);
        if (budget_hit) return BilevelResult{Status::budget_exceeded, 0.0, std::nullopt,
                                             res.evaluations};
        if (!cell) {
          ok = false;
          break;
        }
        cost += *cell;
      }
      if (ok && cost < best_cost) {
        best_cost = cost;
        best_split = &split;
      }
    }
    if (best_split == nullptr) {
      res.status = Status::infeasible;
      return res;
    }
    for (int i = 0; i < n; ++i) best(i, j) = (*best_split)[static_cast<std::size_t>(i)];
    total += best_cost;
  }

  if (budget_hit) {
    res.status = Status::budget_exceeded;
    return res;
  }
  res.status = Status::optimal;
  res.best_value = total;
  res.best_alloc = std::move(best);
  return res;
}

}  // namespace bilevel::oracle
