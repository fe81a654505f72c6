#include "bilevel/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

#include "bilevel/astar.hpp"
#include "bilevel/rng.hpp"

namespace bilevel::baselines {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ItemPlan finish(ItemPlan plan, const SupplierParams& sp, int item) {
  const CostBreakdown cb = item_cost(plan, sp, item);
  plan.total_cost = cb.total();
  plan.delay_sum = cb.delay;
  plan.price = plan.order_qty > 0
                   ? bid_price(plan.total_cost, plan.delay_sum, plan.order_qty, sp.profit_rate)
                   : 0.0;
  return plan;
}

PeriodRecord record_from(const astar::SearchNode& n, const astar::PlannerContext& ctx) {
  PeriodRecord r;
  r.ordinary = n.action.ordinary;
  r.overtime = n.action.overtime;
  r.sends = n.action.sends;
  r.setup = r.produced() > 0;
  r.inventory = n.state.inventory;
  r.delay_penalty =
      supplier_delay_penalty(r.shipped(), n.state.period, ctx.lt_lower, ctx.gamma);
  return r;
}

}  // namespace

std::optional<ItemPlan> greedy_solve_subproblem(const SupplierParams& sp, int item, int qty,
                                                int horizon, int lt_lower, int stride) {
  const astar::PlannerContext ctx =
      astar::PlannerContext::make(sp, item, qty, horizon, lt_lower, stride);

  // no production decisions to rank: the empty lot and the stock-covered lot
  // follow the same forced chain the exact search uses
  if (qty == 0 || qty <= ctx.ss)
    return astar::solve_subproblem(sp, item, qty, horizon, lt_lower,
                                   astar::PlannerOptions{0, stride});

  astar::SearchNode node;
  node.state = astar::PlannerState{0, ctx.ss, qty};
  node.g = 0.0;
  node.h = astar::heuristic_cost(node.state, ctx);
  node.f = node.h;

  ItemPlan plan;
  plan.item = item;
  plan.order_qty = qty;
  plan.initial_inventory = ctx.ss;

  while (node.state.remaining > 0) {
    const auto children = astar::expand_node(node, ctx);
    if (children.empty()) return std::nullopt;  // dead end, no backtracking
    const auto best = std::min_element(
        children.begin(), children.end(),
        [](const astar::SearchNode& a, const astar::SearchNode& b) { return a.h < b.h; });
    node = *best;
    plan.periods.push_back(record_from(node, ctx));
  }
  return finish(std::move(plan), sp, item);
}

namespace {

// Rolls a fixed production schedule through the loading rule. Infeasible
// (storage burst or unshipped remainder) -> nullopt.
std::optional<ItemPlan> roll_out(const std::vector<int>& ord, const std::vector<int>& ot,
                                 const astar::PlannerContext& ctx, const SupplierParams& sp,
                                 int item) {
  ItemPlan plan;
  plan.item = item;
  plan.order_qty = ctx.order_qty;
  plan.initial_inventory = ctx.ss;

  int inv = ctx.ss;
  int remaining = ctx.order_qty;
  for (int t = 1; t <= ctx.horizon; ++t) {
    const int yr = ord[static_cast<std::size_t>(t - 1)];
    const int yn = ot[static_cast<std::size_t>(t - 1)];
    const astar::DeliveryOutcome d = astar::augmented_delivery(ctx, inv, yr + yn, remaining);
    if (d.end_inventory > ctx.incap) return std::nullopt;
    PeriodRecord r;
    r.ordinary = yr;
    r.overtime = yn;
    r.sends = d.sends;
    r.setup = yr + yn > 0;
    r.inventory = d.end_inventory;
    r.delay_penalty = supplier_delay_penalty(d.shipped, t, ctx.lt_lower, ctx.gamma);
    plan.periods.push_back(std::move(r));
    inv = d.end_inventory;
    remaining -= d.shipped;
  }
  if (remaining > 0) return std::nullopt;
  // drop quiet trailing periods so plans compare like-for-like
  while (!plan.periods.empty() && plan.periods.back().produced() == 0 &&
         plan.periods.back().shipped() == 0)
    plan.periods.pop_back();
  return finish(std::move(plan), sp, item);
}

struct Slot {
  int period = 0;  // 0-based
  bool overtime = false;
};

}  // namespace

std::optional<ItemPlan> sa_solve_subproblem(const SupplierParams& sp, int item, int qty,
                                            int horizon, int lt_lower, const SaConfig& cfg,
                                            SaStats* stats) {
  auto incumbent_plan = greedy_solve_subproblem(sp, item, qty, horizon, lt_lower, 1);
  if (!incumbent_plan) return std::nullopt;

  const astar::PlannerContext ctx =
      astar::PlannerContext::make(sp, item, qty, horizon, lt_lower, 1);

  // nothing to perturb when the lot ships from stock
  if (qty <= ctx.ss || cfg.moves <= 0) return incumbent_plan;

  std::vector<int> ord(static_cast<std::size_t>(horizon), 0);
  std::vector<int> ot(static_cast<std::size_t>(horizon), 0);
  for (std::size_t t = 0; t < incumbent_plan->periods.size(); ++t) {
    ord[t] = incumbent_plan->periods[t].ordinary;
    ot[t] = incumbent_plan->periods[t].overtime;
  }

  double current = incumbent_plan->total_cost;
  ItemPlan best = *incumbent_plan;
  double best_cost = current;

  auto rng = make_rng(substream_seed(cfg.seed, 0xba5e));
  double temperature = cfg.initial_temperature;
  const bool calibrate = cfg.initial_temperature <= 0.0;
  double worst_uphill = 0.0;

  SaStats local;
  local.start_temperature = temperature;

  for (int step = 1; step <= cfg.moves; ++step) {
    // propose: shift one production unit between (period, shift) slots
    const int src_period = uniform_int(rng, 0, horizon - 1);
    const bool src_ot = uniform_int(rng, 0, 1) == 1;
    const int dst_period = uniform_int(rng, 0, horizon - 1);
    const bool dst_ot = uniform_int(rng, 0, 1) == 1;
    ++local.proposed;

    if (src_period == dst_period && src_ot == dst_ot) continue;
    int& src = src_ot ? ot[static_cast<std::size_t>(src_period)]
                      : ord[static_cast<std::size_t>(src_period)];
    int& dst = dst_ot ? ot[static_cast<std::size_t>(dst_period)]
                      : ord[static_cast<std::size_t>(dst_period)];
    const int dst_cap = dst_ot ? ctx.cap_ot_units(dst_period + 1)
                               : ctx.cap_ord_units(dst_period + 1);
    if (src <= 0 || dst >= dst_cap) continue;

    --src;
    ++dst;
    const auto candidate = roll_out(ord, ot, ctx, sp, item);
    bool accept = false;
    double delta = 0.0;
    if (candidate) {
      delta = candidate->total_cost - current;
      if (step <= cfg.warmup && calibrate) {
        accept = true;  // calibration phase: everything feasible is taken
        worst_uphill = std::max(worst_uphill, delta);
      } else if (delta <= 0.0) {
        accept = true;
      } else if (temperature > 0.0) {
        accept = uniform_real(rng, 0.0, 1.0) < std::exp(-delta / temperature);
      }
    }

    if (accept) {
      ++local.accepted;
      if (delta > 0.0 && !(calibrate && step <= cfg.warmup)) ++local.accepted_worse;
      current = candidate->total_cost;
      if (current < best_cost) {
        best = *candidate;
        best_cost = current;
      }
    } else {
      ++src;  // revert the tentative move
      --dst;
    }

    if (calibrate && step == cfg.warmup) {
      // hottest uphill move from the calibration walk accepts with the target
      // rate; no uphill moves seen means any positive temperature will do
      temperature = worst_uphill > 0.0
                        ? worst_uphill / -std::log(cfg.accept_target)
                        : 1.0;
      local.start_temperature = temperature;
    }
    if (step > cfg.warmup && cfg.cooling_interval > 0 &&
        (step - cfg.warmup) % cfg.cooling_interval == 0)
      temperature *= cfg.cooling;
  }

  if (stats) *stats = local;
  return best;
}

double deviation(double sol, double best_found) {
  if (!(best_found > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (sol < best_found - 1e-9 * std::max(1.0, best_found))
    throw std::logic_error("deviation: solution beats the best found, set is inconsistent");
  return (sol - best_found) / best_found;
}

pso::LowerSolver make_greedy_solver(int stride) {
  return pso::LowerSolver{
      "greedy", [stride](const SupplierParams& sp, int item, int qty, int horizon,
                         int lt_lower) {
        return greedy_solve_subproblem(sp, item, qty, horizon, lt_lower, stride);
      }};
}

pso::LowerSolver make_sa_solver(const SaConfig& cfg, int stride) {
  (void)stride;  // the annealer's start plan always uses the unit grid
  return pso::LowerSolver{
      "sa", [cfg](const SupplierParams& sp, int item, int qty, int horizon, int lt_lower) {
        SaConfig local = cfg;
        local.seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(item),
                                    static_cast<std::uint64_t>(qty));
        return sa_solve_subproblem(sp, item, qty, horizon, lt_lower, local);
      }};
}

AlgorithmSpec pso_astar_algorithm(pso::SwarmConfig base, int beam, int stride) {
  return AlgorithmSpec{"pso-astar",
                       [base, beam, stride](const ProcurementInstance& inst, std::uint64_t seed) {
                         pso::SwarmConfig cfg = base;
                         cfg.seed = seed;
                         return pso::run(inst, cfg, pso::make_astar_solver(beam, stride));
                       }};
}

AlgorithmSpec pso_greedy_algorithm(pso::SwarmConfig base, int stride) {
  return AlgorithmSpec{"pso-greedy",
                       [base, stride](const ProcurementInstance& inst, std::uint64_t seed) {
                         pso::SwarmConfig cfg = base;
                         cfg.seed = seed;
                         return pso::run(inst, cfg, make_greedy_solver(stride));
                       }};
}

AlgorithmSpec pso_sa_algorithm(pso::SwarmConfig base, SaConfig sa, int stride) {
  return AlgorithmSpec{"pso-sa",
                       [base, sa, stride](const ProcurementInstance& inst, std::uint64_t seed) {
                         pso::SwarmConfig cfg = base;
                         cfg.seed = seed;
                         SaConfig cell = sa;
                         cell.seed = substream_seed(seed, 0x5aULL);
                         return pso::run(inst, cfg, make_sa_solver(cell, stride));
                       }};
}

std::vector<ComparisonRow> compare_suite(const std::vector<ProcurementInstance>& problems,
                                         const std::vector<AlgorithmSpec>& algorithms,
                                         int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw std::invalid_argument("compare_suite: repetitions must be >= 1");
  const std::size_t np = problems.size();
  const std::size_t na = algorithms.size();
  const std::size_t cells = np * na * static_cast<std::size_t>(repetitions);

  struct CellResult {
    double objective = kInf;
    double seconds = 0.0;
  };
  std::vector<CellResult> grid(cells);

  // fan the independent cells over a small pool; substream seeding makes the
  // outcome identical no matter who runs what
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t at = next.fetch_add(1);
      if (at >= cells) return;
      const std::size_t p = at / (na * repetitions);
      const std::size_t a = (at / repetitions) % na;
      const std::size_t r = at % repetitions;
      const std::uint64_t cell_seed = substream_seed(seed, p, a, r);
      const auto report = algorithms[a].run(problems[p], cell_seed);
      grid[at] = CellResult{report.best_value, report.wall_seconds};
    }
  };
  const unsigned pool = std::max(1u, std::thread::hardware_concurrency());
  if (pool <= 1 || cells <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(pool, cells));
    threads.reserve(spawn);
    for (unsigned i = 0; i < spawn; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::vector<ComparisonRow> rows;
  rows.reserve(np);
  for (std::size_t p = 0; p < np; ++p) {
    ComparisonRow row;
    row.problem = problems[p].name;
    row.supplier_count = problems[p].supplier_count();
    row.item_count = problems[p].item_count();
    row.repetitions = repetitions;

    double best = kInf;
    for (std::size_t a = 0; a < na; ++a)
      for (int r = 0; r < repetitions; ++r)
        best = std::min(best, grid[(p * na + a) * repetitions + r].objective);
    row.best_found = best;

    for (std::size_t a = 0; a < na; ++a) {
      double dev_sum = 0.0, sec_sum = 0.0;
      for (int r = 0; r < repetitions; ++r) {
        const CellResult& c = grid[(p * na + a) * repetitions + r];
        dev_sum += deviation(c.objective, best);
        sec_sum += c.seconds;
      }
      row.mean_deviation.push_back(dev_sum / repetitions);
      row.mean_runtime.push_back(sec_sum / repetitions);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace bilevel::baselines
