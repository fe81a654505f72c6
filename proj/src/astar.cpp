#include "bilevel/astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bilevel::astar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double at_or_last(const std::vector<double>& v, int period) {
  if (v.empty()) return 0.0;
  int idx = period - 1;
  if (idx < 0) idx = 0;
  if (idx >= static_cast<int>(v.size())) idx = static_cast<int>(v.size()) - 1;
  return v[static_cast<std::size_t>(idx)];
}

int units_of(double time_cap, double pt) {
  if (time_cap <= 0) return 0;
  return static_cast<int>(std::floor(time_cap / pt + 1e-9));
}

// Smallest non-negative real root of A x^2 + B x + C = 0, if any.
std::optional<double> smallest_nonneg_root(double A, double B, double C) {
  constexpr double eps = 1e-12;
  if (std::abs(A) < eps) {
    if (std::abs(B) < eps) return std::nullopt;
    const double x = -C / B;
    if (x >= -eps) return std::max(0.0, x);
    return std::nullopt;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double r1 = (-B - sq) / (2.0 * A);
  double r2 = (-B + sq) / (2.0 * A);
  if (r1 > r2) std::swap(r1, r2);
  if (r1 >= -eps) return std::max(0.0, r1);
  if (r2 >= -eps) return std::max(0.0, r2);
  return std::nullopt;
}

// Per-vehicle augmentation solving the holding-versus-delivery balance for the
// stock left over after the base loads. `pend` is that leftover (end inventory
// if only base loads ship).
int augmentation_units(const PlannerContext& c, int aq, int nv, long long pend, int prev_inv) {
  const double hpt = c.hold * c.pt;
  const double nvd = static_cast<double>(nv);
  const double pendd = static_cast<double>(pend);
  const double prevd = static_cast<double>(prev_inv);

  const double A = 0.5 * hpt * (nvd + nvd * nvd);
  const double B = nvd * (hpt * aq - hpt * pendd - c.hold_interval - c.beta);
  const double C = 0.5 * hpt * (nvd * aq * aq + pendd * pendd) + c.hold_interval * pendd -
                   0.5 * hpt * prevd * prevd - c.alpha * nvd - c.beta * nvd * aq;

  const auto root = smallest_nonneg_root(A, B, C);
  if (!root) return 0;
  const double x = std::floor(*root + 1e-9);
  if (x <= 0) return 0;
  if (x > 2.0e9) return 2000000000;
  return static_cast<int>(x);
}

}  // namespace

PlannerContext PlannerContext::make(const SupplierParams& sp, int item, int qty, int horizon,
                                    int lt_lower, int stride) {
  if (horizon < 1) throw std::invalid_argument("planner: horizon must be at least 1");
  if (qty < 0) throw std::invalid_argument("planner: negative lot size");

  PlannerContext c;
  const std::size_t j = static_cast<std::size_t>(item);
  c.cor = sp.prod_cost_ord[j];
  c.cov = sp.prod_cost_ot[j];
  c.pt = sp.proc_time[j];
  c.hold = sp.hold_cost[j];
  c.hold_interval = sp.hold_cost_interval[j];
  c.setup = sp.setup_cost[j];
  c.ss = sp.safety_stock[j];
  c.vcap = sp.vehicle_cap[j];
  c.incap = sp.store_cap[j];
  c.vehicles = sp.vehicle_count;
  c.alpha = sp.vehicle_fixed_cost;
  c.beta = sp.vehicle_unit_cost;
  c.gamma = sp.delay_factor;
  c.cap_ord = sp.cap_ord;
  c.cap_ot = sp.cap_ot;
  c.order_qty = qty;
  c.horizon = horizon;
  c.lt_lower = lt_lower;
  c.reserve = (qty <= c.ss) ? c.ss - qty : c.ss;

  if (stride < 0) throw std::invalid_argument("planner: negative stride");
  if (stride == 0) {
    // Coarse enumeration for wide shifts; exactness callers pass stride 1.
    // The divisor is deliberately gentle: the loading rule refuses to clear
    // arbitrarily large stocks, so too coarse a lattice can miss every
    // deliverable production schedule, not merely the cheapest one.
    stride = std::max(1, units_of(c.cap_ord_time(1), c.pt) / 32);
  }
  c.stride = stride;
  return c;
}

double PlannerContext::cap_ord_time(int period) const { return at_or_last(cap_ord, period); }
double PlannerContext::cap_ot_time(int period) const { return at_or_last(cap_ot, period); }
int PlannerContext::cap_ord_units(int period) const { return units_of(cap_ord_time(period), pt); }
int PlannerContext::cap_ot_units(int period) const { return units_of(cap_ot_time(period), pt); }

double PlannerContext::best_future_time_cap(int period) const {
  double best = 0.0;
  for (int t = period + 1; t <= horizon; ++t)
    best = std::max(best, cap_ord_time(t) + cap_ot_time(t));
  return best;
}

int base_delivery_quantity(double alpha, double beta, double hold, double pt, int vcap,
                           int incap, int remaining) {
  const double hpt = hold * pt;
  long long aq = std::min<long long>({vcap, incap, std::max(remaining, 0)});
  if (hpt > 0) {
    const double root = (beta + std::sqrt(beta * beta + 2.0 * alpha * hpt)) / hpt;
    const long long econ = static_cast<long long>(std::floor(root + 1e-9));
    aq = std::min(aq, econ);
  }
  return static_cast<int>(std::max<long long>(1, aq));
}

int delivery_count(int basis, int allowed_qty, int vehicles) {
  if (basis <= 0) return 0;
  if (allowed_qty < 1) throw std::invalid_argument("delivery_count: allowed quantity must be positive");
  const long long loads = (static_cast<long long>(basis) + allowed_qty - 1) / allowed_qty;
  return static_cast<int>(std::min<long long>(vehicles, loads));
}

DeliveryOutcome augmented_delivery(const PlannerContext& ctx, int prev_inventory, int production,
                                   int remaining) {
  DeliveryOutcome out;
  out.sends.assign(static_cast<std::size_t>(ctx.vehicles), 0);
  const long long stock = static_cast<long long>(prev_inventory) + production;
  const long long shippable =
      std::min<long long>(stock - ctx.reserve, std::max(remaining, 0));
  out.end_inventory = static_cast<int>(stock);
  if (shippable <= 0) return out;

  const int aq = base_delivery_quantity(ctx.alpha, ctx.beta, ctx.hold, ctx.pt, ctx.vcap,
                                        ctx.incap, remaining);
  const int basis = production > 0 ? production : static_cast<int>(shippable);
  const int nv = delivery_count(basis, aq, ctx.vehicles);
  if (nv == 0) return out;

  const long long pend = stock - static_cast<long long>(nv) * aq;  // leftover after base loads
  int x = 0;
  if (pend > 0 && shippable > static_cast<long long>(nv) * aq)
    x = augmentation_units(ctx, aq, nv, pend, prev_inventory);

  const long long per_vehicle = std::min(ctx.vcap, ctx.incap);
  const long long total = std::min<long long>(
      {shippable, static_cast<long long>(nv) * per_vehicle,
       static_cast<long long>(nv) * (static_cast<long long>(aq) + x)});
  if (total <= 0) return out;

  const int quot = static_cast<int>(total / nv);
  const int rem = static_cast<int>(total % nv);
  for (int v = 0; v < nv; ++v) out.sends[static_cast<std::size_t>(v)] = quot + (v < rem ? 1 : 0);
  out.shipped = static_cast<int>(total);
  out.end_inventory = static_cast<int>(stock - total);
  return out;
}

double heuristic_cost(const PlannerState& state, const PlannerContext& ctx) {
  const int R = state.remaining;
  if (R <= 0) return 0.0;

  const int t = state.period;
  const int I = state.inventory;

  const int tfs = R;  // everything still undelivered has to ship
  auto ceil_div = [](long long a, long long b) { return (a + b - 1) / b; };
  const int tfv = static_cast<int>(
      std::min(ceil_div(tfs, ctx.vcap), ceil_div(tfs, ctx.incap)));

  const int fp = std::max(0, R - I);  // production the stock cannot cover
  int prod_days = 0;
  if (fp > 0) {
    const double cap = ctx.best_future_time_cap(t);
    if (cap <= 0) return kInf;  // nothing can be produced any more
    prod_days = static_cast<int>(std::ceil(ctx.pt * fp / cap - 1e-9));
    prod_days = std::max(prod_days, 1);
  }
  const double fas = static_cast<double>(tfs) / std::max(tfv, 1);

  // Cheapest possible lateness: ship as much as physically fits per period,
  // starting immediately. Any real schedule moves at most this much this
  // early, so its lateness can only be higher.
  double delay = 0.0;
  if (ctx.gamma > 0) {
    const int per_period = std::max(1, ctx.vehicles * std::min(ctx.vcap, ctx.incap));
    int rem = tfs;
    for (int p = t + 1; rem > 0; ++p) {
      const int moved = std::min(per_period, rem);
      if (p > ctx.lt_lower) delay += ctx.gamma * (p - ctx.lt_lower) * moved;
      rem -= moved;
    }
  }

  double h = ctx.cor * fp + ctx.alpha * tfv + ctx.beta * tfs +
             tfv * ctx.pt * ctx.hold * fas / 2.0 + delay;
  if (fp > 0) h += prod_days * ctx.setup;
  return h;
}

std::vector<SearchNode> expand_node(const SearchNode& node, const PlannerContext& ctx,
                                    std::uint64_t* pruned) {
  std::vector<SearchNode> kids;
  const PlannerState& s = node.state;
  if (s.remaining <= 0 || s.period >= ctx.horizon) return kids;

  const int t = s.period + 1;
  const int owed = std::max(0, s.remaining + ctx.reserve - s.inventory);
  const int cap_or = ctx.cap_ord_units(t);
  const int cap_ot = ctx.cap_ot_units(t);
  const int yr_max = std::min(owed, cap_or);

  auto drop = [&] {
    if (pruned) ++*pruned;
  };
  auto add_child = [&](int yr, int yn) {
    const int produced = yr + yn;
    DeliveryOutcome d = augmented_delivery(ctx, s.inventory, produced, s.remaining);
    if (d.end_inventory > ctx.incap) return drop();  // warehouse overflow

    SearchNode child;
    child.state.period = t;
    child.state.inventory = d.end_inventory;
    child.state.remaining = s.remaining - d.shipped;

    // Drop children that can no longer finish in the leftover periods.
    const int periods_left = ctx.horizon - t;
    const int still_owed =
        std::max(0, child.state.remaining + ctx.reserve - child.state.inventory);
    long long prod_room = 0;
    long long ship_room = 0;
    for (int p = t + 1; p <= ctx.horizon; ++p)
      prod_room += ctx.cap_ord_units(p) + ctx.cap_ot_units(p);
    ship_room = static_cast<long long>(periods_left) * ctx.vehicles *
                std::min(ctx.vcap, ctx.incap);
    if (still_owed > prod_room) return drop();
    if (child.state.remaining > ship_room) return drop();

    const double hh = heuristic_cost(child.state, ctx);
    if (hh == kInf) return drop();

    double sq = 0.0;
    int nv_used = 0;
    for (int sv : d.sends) {
      sq += static_cast<double>(sv) * sv;
      if (sv > 0) ++nv_used;
    }
    // Period cost in the search's accounting: the inventory-squared telescope
    // is dropped (it cancels over any complete plan that restores its opening
    // stock), which keeps partial costs non-negative and h comparable.
    double inc = ctx.cor * yr + ctx.cov * yn + 0.5 * ctx.hold * ctx.pt * sq +
                 ctx.hold_interval * d.end_inventory + ctx.alpha * nv_used +
                 ctx.beta * d.shipped +
                 supplier_delay_penalty(d.shipped, t, ctx.lt_lower, ctx.gamma);
    if (produced > 0) inc += ctx.setup;

    child.g = node.g + inc;
    child.h = hh;
    child.f = child.g + child.h;
    child.action.ordinary = yr;
    child.action.overtime = yn;
    child.action.sends = std::move(d.sends);
    kids.push_back(std::move(child));
  };

  for (int yr = 0;; yr += ctx.stride) {
    if (yr >= yr_max) {
      add_child(yr_max, 0);
      break;
    }
    add_child(yr, 0);
  }
  if (yr_max == cap_or && owed > yr_max && cap_ot > 0) {
    const int yn_max = std::min(owed - yr_max, cap_ot);
    for (int yn = ctx.stride;; yn += ctx.stride) {
      if (yn >= yn_max) {
        add_child(yr_max, yn_max);
        break;
      }
      add_child(yr_max, yn);
    }
  }
  return kids;
}

OpenList::OpenList(std::size_t capacity) : capacity_(capacity) {}

void OpenList::push(int node_index, double f) {
  entries_.insert(Key{f, next_seq_++, node_index});
}

std::optional<int> OpenList::pop_lowest() {
  if (entries_.empty()) return std::nullopt;
  const auto it = entries_.begin();
  const int node = it->node;
  entries_.erase(it);
  return node;
}

void OpenList::truncate() {
  if (capacity_ == 0) return;
  while (entries_.size() > capacity_) entries_.erase(std::prev(entries_.end()));
}

std::vector<int> OpenList::contents() const {
  std::vector<int> out;
  out.reserve(entries_.size());
  for (const Key& k : entries_) out.push_back(k.node);
  return out;
}

namespace {

ItemPlan finish_plan(ItemPlan plan, const SupplierParams& sp, int item) {
  const CostBreakdown cb = item_cost(plan, sp, item);
  plan.total_cost = cb.total();
  plan.delay_sum = cb.delay;
  plan.price = plan.order_qty > 0
                   ? bid_price(plan.total_cost, plan.delay_sum, plan.order_qty, sp.profit_rate)
                   : 0.0;
  return plan;
}

ItemPlan reconstruct_plan(const std::vector<SearchNode>& arena, int goal, const PlannerContext& ctx,
                          const SupplierParams& sp, int item) {
  std::vector<int> chain;
  for (int at = goal; at >= 0; at = arena[static_cast<std::size_t>(at)].parent)
    chain.push_back(at);
  std::reverse(chain.begin(), chain.end());

  ItemPlan plan;
  plan.item = item;
  plan.order_qty = ctx.order_qty;
  plan.initial_inventory = ctx.ss;
  for (std::size_t k = 1; k < chain.size(); ++k) {  // chain[0] is the root
    const SearchNode& n = arena[static_cast<std::size_t>(chain[k])];
    PeriodRecord r;
    r.ordinary = n.action.ordinary;
    r.overtime = n.action.overtime;
    r.sends = n.action.sends;
    r.setup = r.produced() > 0;
    r.inventory = n.state.inventory;
    r.delay_penalty =
        supplier_delay_penalty(r.shipped(), n.state.period, ctx.lt_lower, ctx.gamma);
    plan.periods.push_back(std::move(r));
  }
  return finish_plan(std::move(plan), sp, item);
}

// Lot covered by opening stock: no production, the loading rule walks the
// stock down period by period.
std::optional<ItemPlan> warehouse_chain(const PlannerContext& ctx, const SupplierParams& sp,
                                        int item) {
  ItemPlan plan;
  plan.item = item;
  plan.order_qty = ctx.order_qty;
  plan.initial_inventory = ctx.ss;

  int inv = ctx.ss;
  int remaining = ctx.order_qty;
  for (int t = 1; t <= ctx.horizon && remaining > 0; ++t) {
    DeliveryOutcome d = augmented_delivery(ctx, inv, 0, remaining);
    if (d.shipped <= 0) return std::nullopt;
    if (d.end_inventory > ctx.incap) return std::nullopt;
    PeriodRecord r;
    r.sends = std::move(d.sends);
    r.inventory = d.end_inventory;
    r.delay_penalty = supplier_delay_penalty(d.shipped, t, ctx.lt_lower, ctx.gamma);
    plan.periods.push_back(std::move(r));
    inv = d.end_inventory;
    remaining -= d.shipped;
  }
  if (remaining > 0) return std::nullopt;
  return finish_plan(std::move(plan), sp, item);
}

}  // namespace

std::optional<ItemPlan> solve_subproblem(const SupplierParams& sp, int item, int qty, int horizon,
                                         int lt_lower, const PlannerOptions& opts,
                                         SearchStats* stats) {
  PlannerContext ctx = PlannerContext::make(sp, item, qty, horizon, lt_lower, opts.stride);

  if (qty == 0) {
    ItemPlan plan;
    plan.item = item;
    plan.order_qty = 0;
    plan.initial_inventory = ctx.ss;
    return finish_plan(std::move(plan), sp, item);
  }
  if (qty <= ctx.ss) return warehouse_chain(ctx, sp, item);

  std::vector<SearchNode> arena;
  SearchNode root;
  root.state = PlannerState{0, ctx.ss, qty};
  root.h = heuristic_cost(root.state, ctx);
  root.f = root.h;
  if (root.f == kInf) return std::nullopt;
  arena.push_back(root);

  OpenList open(opts.beam);
  open.push(0, root.f);
  open.truncate();

  while (auto popped = open.pop_lowest()) {
    const int at = *popped;
    if (arena[static_cast<std::size_t>(at)].state.remaining == 0)
      return reconstruct_plan(arena, at, ctx, sp, item);

    const SearchNode snapshot = arena[static_cast<std::size_t>(at)];
    std::vector<SearchNode> kids = expand_node(snapshot, ctx, stats ? &stats->pruned : nullptr);
    if (stats) {
      ++stats->expanded;
      stats->generated += kids.size();
    }
    const std::size_t before = open.size();
    for (SearchNode& k : kids) {
      k.parent = at;
      arena.push_back(std::move(k));
      open.push(static_cast<int>(arena.size()) - 1, arena.back().f);
    }
    open.truncate();
    if (stats) {
      if (before + kids.size() > open.size())
        stats->truncated += before + kids.size() - open.size();
      stats->open_peak = std::max(stats->open_peak, open.size());
    }
  }
  return std::nullopt;
}

}  // namespace bilevel::astar
