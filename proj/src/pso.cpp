#include "bilevel/pso.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bilevel/astar.hpp"
#include "bilevel/baselines.hpp"
#include "bilevel/rng.hpp"

namespace bilevel::pso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// steps the balancing walk may spend on one item before giving up
constexpr int kRepairBudget = 100000;

// whole-population restarts allowed while seeding one particle
constexpr int kInitRetries = 200;

}  // namespace

LowerSolver make_astar_solver(int beam, int stride) {
  astar::PlannerOptions opts;
  opts.beam = static_cast<std::size_t>(beam);
  opts.stride = stride;
  return LowerSolver{
      "astar",
      [opts](const SupplierParams& sp, int item, int qty, int horizon, int lt_lower) {
        auto plan = astar::solve_subproblem(sp, item, qty, horizon, lt_lower, opts);
        if (!plan && opts.beam != 0) {
          // a finite beam can truncate every path to the goal on wide lots;
          // the single-descent fallback keeps the solver usable at that scale
          // and never fires in the unbounded configurations the audits use
          plan = baselines::greedy_solve_subproblem(sp, item, qty, horizon, lt_lower,
                                                    opts.stride);
        }
        return plan;
      }};
}

double inertia(int iter, const SwarmConfig& cfg) {
  if (cfg.iterations <= 0 || iter <= 0) return cfg.w_max;
  // the affine form lands an ulp off w_min at the last step (0.9 - 0.7 != 0.2
  // in binary), so both endpoints are returned verbatim
  if (iter >= cfg.iterations) return cfg.w_min;
  return cfg.w_max -
         (cfg.w_max - cfg.w_min) * static_cast<double>(iter) / cfg.iterations;
}

RealMatrix velocity_limits(const ProcurementInstance& inst, const SwarmConfig& cfg) {
  const int n = inst.supplier_count();
  const int m = inst.item_count();
  RealMatrix lim(n, m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      lim(i, j) = cfg.velocity_coeff *
                  (inst.buyer.alloc_max(i, j) - inst.buyer.alloc_min(i, j));
  return lim;
}

int update_velocity(Particle& p, const RealMatrix& gbest, double w, const SwarmConfig& cfg,
                    const ProcurementInstance& inst, const RealMatrix& limits,
                    std::mt19937_64& rng) {
  int clamped = 0;
  for (int i = 0; i < p.position.rows(); ++i) {
    for (int j = 0; j < p.position.cols(); ++j) {
      // an exactly-zero coordinate marks an idle supplier; it joins the
      // difference terms just below the feasible band so it can be recruited
      const double stand_in = inst.buyer.alloc_min(i, j) - cfg.epsilon;
      const double x = p.position(i, j) == 0.0 ? stand_in : p.position(i, j);
      const double pb = p.pbest_position(i, j) == 0.0 ? stand_in : p.pbest_position(i, j);
      const double gb = gbest(i, j) == 0.0 ? stand_in : gbest(i, j);
      const double r1 = uniform_real(rng, 0.0, 1.0);
      const double r2 = uniform_real(rng, 0.0, 1.0);
      double v = w * p.velocity(i, j) + cfg.c1 * r1 * (pb - x) + cfg.c2 * r2 * (gb - x);
      const double lim = limits(i, j);
      if (v > lim) {
        v = lim;
        ++clamped;
      } else if (v < -lim) {
        v = -lim;
        ++clamped;
      }
      p.velocity(i, j) = v;
    }
  }
  return clamped;
}

void update_position(Particle& p) {
  for (int i = 0; i < p.position.rows(); ++i)
    for (int j = 0; j < p.position.cols(); ++j) p.position(i, j) += p.velocity(i, j);
}

std::optional<AllocationMatrix> repair_demand(RealMatrix& position,
                                              const ProcurementInstance& inst,
                                              std::mt19937_64& rng) {
  const int n = inst.supplier_count();
  const int m = inst.item_count();
  const BuyerParams& b = inst.buyer;

  AllocationMatrix q(n, m, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      int v = static_cast<int>(std::floor(position(i, j)));
      if (v < b.alloc_min(i, j)) v = 0;  // below the band: supplier sits out
      if (v > b.alloc_max(i, j)) v = b.alloc_max(i, j);
      q(i, j) = v;
    }
  }

  for (int j = 0; j < m; ++j) {
    int sum = 0;
    for (int i = 0; i < n; ++i) sum += q(i, j);
    int steps = 0;
    while (sum != b.demand[j]) {
      if (++steps > kRepairBudget) return std::nullopt;
      const int i = uniform_int(rng, 0, n - 1);
      int& cell = q(i, j);
      const int lo = b.alloc_min(i, j);
      const int hi = b.alloc_max(i, j);
      if (sum < b.demand[j]) {
        if (cell == 0) {
          const int entry = std::max(lo, 1);
          if (entry <= hi) {
            cell = entry;  // re-entry jumps straight to the smallest legal lot
            sum += entry;
          }
        } else if (cell < hi) {
          ++cell;
          ++sum;
        }
      } else {
        if (cell == 0) continue;
        if (cell <= std::max(lo, 1)) {
          sum -= cell;  // leaving the band collapses to zero
          cell = 0;
        } else {
          --cell;
          --sum;
        }
      }
    }
  }

  // keep the fractional residue so momentum is not quantized away
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      position(i, j) = q(i, j) + (position(i, j) - std::floor(position(i, j)));
  return q;
}

namespace {

// one random demand-covering row-set for every item; nullopt when the bounds
// refuse to cover some demand within the retry budget
std::optional<AllocationMatrix> seed_allocation(const ProcurementInstance& inst,
                                                std::mt19937_64& rng) {
  const int n = inst.supplier_count();
  const int m = inst.item_count();
  const BuyerParams& b = inst.buyer;
  for (int attempt = 0; attempt < kInitRetries; ++attempt) {
    AllocationMatrix q(n, m, 0);
    for (int j = 0; j < m; ++j) {
      int remaining = b.demand[j];
      std::vector<int> unpicked(n);
      for (int i = 0; i < n; ++i) unpicked[i] = i;
      while (remaining > 0 && !unpicked.empty()) {
        const int slot = uniform_int(rng, 0, static_cast<int>(unpicked.size()) - 1);
        const int i = unpicked[slot];
        unpicked.erase(unpicked.begin() + slot);
        const int lo = b.alloc_min(i, j);
        const int hi = std::min(b.alloc_max(i, j), remaining);
        if (hi < lo) continue;
        q(i, j) = uniform_int(rng, lo, hi);
        remaining -= q(i, j);
      }
      // a uniform draw rarely lands on the remainder exactly; any leftover is
      // absorbed by the same one-unit adjustment walk the outer loop uses
    }
    RealMatrix shadow(n, m, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) shadow(i, j) = q(i, j);
    if (auto fixed = repair_demand(shadow, inst, rng)) return fixed;
  }
  return std::nullopt;
}

Particle seed_particle(const ProcurementInstance& inst, std::mt19937_64& rng) {
  const auto alloc = seed_allocation(inst, rng);
  if (!alloc)
    throw std::runtime_error("init_population: demand not coverable within the allocation bounds");
  const int n = inst.supplier_count();
  const int m = inst.item_count();
  Particle p;
  p.position = RealMatrix(n, m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) p.position(i, j) = (*alloc)(i, j);
  p.velocity = RealMatrix(n, m, 0.0);
  p.pbest_position = p.position;
  p.pbest_value = kInf;
  p.last_feasible_alloc = *alloc;
  return p;
}

}  // namespace

std::vector<Particle> init_population(const ProcurementInstance& inst, const SwarmConfig& cfg) {
  std::vector<Particle> swarm;
  swarm.reserve(cfg.particles);
  for (int k = 0; k < cfg.particles; ++k) {
    auto rng = make_rng(substream_seed(cfg.seed, 0, static_cast<std::uint64_t>(k)));
    swarm.push_back(seed_particle(inst, rng));
  }
  return swarm;
}

const std::optional<ItemPlan>* SubproblemCache::find(int supplier, int item, int qty) const {
  const auto it = map_.find(key(supplier, item, qty));
  return it == map_.end() ? nullptr : &it->second;
}

void SubproblemCache::store(int supplier, int item, int qty, std::optional<ItemPlan> plan) {
  map_.emplace(key(supplier, item, qty), std::move(plan));
}

std::uint64_t SubproblemCache::key(int supplier, int item, int qty) {
  return (static_cast<std::uint64_t>(supplier) << 42) ^
         (static_cast<std::uint64_t>(item) << 21) ^ static_cast<std::uint64_t>(qty);
}

EvalResult evaluate(const AllocationMatrix& alloc, const ProcurementInstance& inst,
                    const LowerSolver& solver, SubproblemCache* cache) {
  EvalResult out;
  out.plans.reserve(inst.supplier_count());
  for (int i = 0; i < inst.supplier_count(); ++i) {
    SupplierPlan sp;
    sp.supplier = i;
    for (int j = 0; j < inst.item_count(); ++j) {
      const int q = alloc(i, j);
      if (q <= 0) continue;
      std::optional<ItemPlan> plan;
      if (const auto* hit = cache ? cache->find(i, j, q) : nullptr) {
        plan = *hit;
      } else {
        plan = solver.solve(inst.suppliers[i], j, q, inst.horizon, inst.buyer.lt_lower);
        if (cache) cache->store(i, j, q, plan);
      }
      if (!plan) {
        out.objective = kInf;
        out.plans.clear();
        return out;
      }
      sp.items.emplace(j, std::move(*plan));
    }
    if (!sp.items.empty()) out.plans.push_back(std::move(sp));
  }
  out.objective = buyer_objective(alloc, out.plans, inst).value;
  return out;
}

SolveReport run(const ProcurementInstance& inst, const SwarmConfig& cfg,
                const LowerSolver& solver) {
  if (const auto problems = validate_instance(inst); !problems.empty())
    throw std::invalid_argument("run: " + problems.front());
  if (cfg.particles <= 0 || cfg.iterations < 0)
    throw std::invalid_argument("run: particles must be positive and iterations non-negative");

  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report;
  report.seed = cfg.seed;

  const RealMatrix limits = velocity_limits(inst, cfg);
  SubproblemCache cache;
  std::vector<Particle> swarm = init_population(inst, cfg);

  // stand-ins keep the velocity update well-formed even if nothing evaluates
  // to a finite objective
  RealMatrix gbest_position = swarm.front().position;
  double gbest_value = kInf;
  AllocationMatrix gbest_alloc = swarm.front().last_feasible_alloc;
  std::vector<SupplierPlan> gbest_plans;

  auto score = [&](Particle& p, const AllocationMatrix& alloc) {
    const std::size_t before = cache.size();
    EvalResult ev = evaluate(alloc, inst, solver, &cache);
    report.subproblems_solved += cache.size() - before;
    std::uint64_t dispatched = 0;
    for (int i = 0; i < alloc.rows(); ++i)
      for (int j = 0; j < alloc.cols(); ++j) dispatched += alloc(i, j) > 0 ? 1 : 0;
    report.cache_hits += dispatched - (cache.size() - before);
    if (ev.objective < p.pbest_value) {
      p.pbest_value = ev.objective;
      p.pbest_position = p.position;
    }
    if (ev.objective < gbest_value) {
      gbest_value = ev.objective;
      gbest_position = p.position;
      gbest_alloc = alloc;
      gbest_plans = std::move(ev.plans);
    }
  };

  for (Particle& p : swarm) score(p, p.last_feasible_alloc);
  report.trace.push_back(gbest_value);

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    const double w = inertia(iter - 1, cfg);
    for (int k = 0; k < cfg.particles; ++k) {
      Particle& p = swarm[k];
      auto rng = make_rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(iter),
                                         static_cast<std::uint64_t>(k)));
      report.clamp_events += update_velocity(p, gbest_position, w, cfg, inst, limits, rng);
      update_position(p);
      auto alloc = repair_demand(p.position, inst, rng);
      if (!alloc) {
        ++report.reinitialized;
        p = seed_particle(inst, rng);
        alloc = p.last_feasible_alloc;
      } else {
        p.last_feasible_alloc = *alloc;
      }
      score(p, *alloc);
    }
    report.trace.push_back(gbest_value);
  }

  report.best_alloc = gbest_alloc;
  report.best_value = gbest_value;
  report.best_plans = std::move(gbest_plans);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace bilevel::pso
