#include "bilevel/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bilevel/astar.hpp"
#include "bilevel/generator.hpp"
#include "bilevel/micro.hpp"
#include "bilevel/oracle.hpp"
#include "bilevel/rng.hpp"

namespace bilevel::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* k) { return key == k; }) == allowed.end())
      fail(where, "unknown key '" + key + "'");
  }
}

const json& field(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

double get_real(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::vector<int> get_int_vec(const json& v, const std::string& where, int want_len) {
  if (!v.is_array()) fail(where, "expected an array");
  if (want_len >= 0 && static_cast<int>(v.size()) != want_len)
    fail(where, "expected " + std::to_string(want_len) + " entries, found " +
                    std::to_string(v.size()));
  std::vector<int> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    out.push_back(get_int(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<double> get_real_vec(const json& v, const std::string& where, int want_len) {
  if (!v.is_array()) fail(where, "expected an array");
  if (want_len >= 0 && static_cast<int>(v.size()) != want_len)
    fail(where, "expected " + std::to_string(want_len) + " entries, found " +
                    std::to_string(v.size()));
  if (v.empty()) fail(where, "array must not be empty");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    out.push_back(get_real(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

Grid<int> get_int_grid(const json& v, const std::string& where, int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    fail(where, "expected " + std::to_string(rows) + " rows");
  Grid<int> g(rows, cols, 0);
  for (int i = 0; i < rows; ++i) {
    const auto row = get_int_vec(v[static_cast<std::size_t>(i)],
                                 where + "[" + std::to_string(i) + "]", cols);
    for (int j = 0; j < cols; ++j) g(i, j) = row[static_cast<std::size_t>(j)];
  }
  return g;
}

Grid<double> get_real_grid(const json& v, const std::string& where, int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    fail(where, "expected " + std::to_string(rows) + " rows");
  Grid<double> g(rows, cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    const auto row = get_real_vec(v[static_cast<std::size_t>(i)],
                                  where + "[" + std::to_string(i) + "]", cols);
    for (int j = 0; j < cols; ++j) g(i, j) = row[static_cast<std::size_t>(j)];
  }
  return g;
}

SupplierParams parse_supplier(const json& v, const std::string& where, int items) {
  if (!v.is_object()) fail(where, "expected an object");
  reject_unknown_keys(v, where,
                      {"cor", "cov", "orc", "ovc", "pt", "h", "h_prime", "sc", "ss", "vcap",
                       "incap", "vehicles", "alpha", "beta", "gamma", "profit_rate"});
  SupplierParams sp;
  sp.prod_cost_ord = get_real_vec(field(v, where, "cor"), where + ".cor", items);
  sp.prod_cost_ot = get_real_vec(field(v, where, "cov"), where + ".cov", items);
  sp.cap_ord = get_real_vec(field(v, where, "orc"), where + ".orc", -1);
  sp.cap_ot = get_real_vec(field(v, where, "ovc"), where + ".ovc", -1);
  sp.proc_time = get_real_vec(field(v, where, "pt"), where + ".pt", items);
  sp.hold_cost = get_real_vec(field(v, where, "h"), where + ".h", items);
  sp.hold_cost_interval = get_real_vec(field(v, where, "h_prime"), where + ".h_prime", items);
  sp.setup_cost = get_real_vec(field(v, where, "sc"), where + ".sc", items);
  sp.safety_stock = get_int_vec(field(v, where, "ss"), where + ".ss", items);
  sp.vehicle_cap = get_int_vec(field(v, where, "vcap"), where + ".vcap", items);
  sp.store_cap = get_int_vec(field(v, where, "incap"), where + ".incap", items);
  sp.vehicle_count = get_int(field(v, where, "vehicles"), where + ".vehicles");
  sp.vehicle_fixed_cost = get_real(field(v, where, "alpha"), where + ".alpha");
  sp.vehicle_unit_cost = get_real(field(v, where, "beta"), where + ".beta");
  sp.delay_factor = get_real(field(v, where, "gamma"), where + ".gamma");
  sp.profit_rate = get_real(field(v, where, "profit_rate"), where + ".profit_rate");
  return sp;
}

json supplier_to_json(const SupplierParams& sp) {
  json v;
  v["cor"] = sp.prod_cost_ord;
  v["cov"] = sp.prod_cost_ot;
  v["orc"] = sp.cap_ord;
  v["ovc"] = sp.cap_ot;
  v["pt"] = sp.proc_time;
  v["h"] = sp.hold_cost;
  v["h_prime"] = sp.hold_cost_interval;
  v["sc"] = sp.setup_cost;
  v["ss"] = sp.safety_stock;
  v["vcap"] = sp.vehicle_cap;
  v["incap"] = sp.store_cap;
  v["vehicles"] = sp.vehicle_count;
  v["alpha"] = sp.vehicle_fixed_cost;
  v["beta"] = sp.vehicle_unit_cost;
  v["gamma"] = sp.delay_factor;
  v["profit_rate"] = sp.profit_rate;
  return v;
}

template <typename T>
json grid_to_json(const Grid<T>& g) {
  json rows = json::array();
  for (int i = 0; i < g.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

ProcurementInstance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance document: ") + e.what());
  }
  if (!j.is_object()) fail("top level", "expected an object");
  reject_unknown_keys(j, "top level", {"meta", "buyer", "suppliers", "horizon"});

  ProcurementInstance inst;

  const json& meta = field(j, "top level", "meta");
  if (!meta.is_object()) fail("meta", "expected an object");
  reject_unknown_keys(meta, "meta", {"name", "seed"});
  const json& name = field(meta, "meta", "name");
  if (!name.is_string()) fail("meta.name", "expected a string");
  inst.name = name.get<std::string>();
  const json& seed = field(meta, "meta", "seed");
  if (!seed.is_number_integer()) fail("meta.seed", "expected an integer");
  inst.seed = seed.get<std::uint64_t>();

  const json& buyer = field(j, "top level", "buyer");
  if (!buyer.is_object()) fail("buyer", "expected an object");
  reject_unknown_keys(buyer, "buyer",
                      {"demand", "lt_lower", "lt_upper", "lambda", "weights", "q_min", "q_max",
                       "ordering_cost"});
  BuyerParams& b = inst.buyer;
  b.demand = get_int_vec(field(buyer, "buyer", "demand"), "buyer.demand", -1);
  if (b.demand.empty()) fail("buyer.demand", "at least one item required");
  const int m = static_cast<int>(b.demand.size());
  b.lt_lower = get_int(field(buyer, "buyer", "lt_lower"), "buyer.lt_lower");
  b.lt_upper = get_int(field(buyer, "buyer", "lt_upper"), "buyer.lt_upper");
  b.delay_factor = get_real(field(buyer, "buyer", "lambda"), "buyer.lambda");
  const auto weights = get_real_vec(field(buyer, "buyer", "weights"), "buyer.weights", 2);
  b.w1 = weights[0];
  b.w2 = weights[1];

  const json& suppliers = field(j, "top level", "suppliers");
  if (!suppliers.is_array() || suppliers.empty())
    fail("suppliers", "expected a non-empty array");
  const int n = static_cast<int>(suppliers.size());
  for (int i = 0; i < n; ++i)
    inst.suppliers.push_back(parse_supplier(suppliers[static_cast<std::size_t>(i)],
                                            "suppliers[" + std::to_string(i) + "]", m));

  b.alloc_min = get_int_grid(field(buyer, "buyer", "q_min"), "buyer.q_min", n, m);
  b.alloc_max = get_int_grid(field(buyer, "buyer", "q_max"), "buyer.q_max", n, m);
  b.ordering_cost =
      get_real_grid(field(buyer, "buyer", "ordering_cost"), "buyer.ordering_cost", n, m);

  if (const auto it = j.find("horizon"); it != j.end()) {
    inst.horizon = get_int(*it, "horizon");
  } else {
    try {
      inst.horizon = estimate_horizon(inst);
    } catch (const UnboundedHorizonError& e) {
      fail("horizon", std::string("cannot be derived: ") + e.what());
    }
  }
  return inst;
}

ProcurementInstance read_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string instance_to_text(const ProcurementInstance& inst) {
  json j;
  j["meta"] = {{"name", inst.name}, {"seed", inst.seed}};
  json buyer;
  buyer["demand"] = inst.buyer.demand;
  buyer["lt_lower"] = inst.buyer.lt_lower;
  buyer["lt_upper"] = inst.buyer.lt_upper;
  buyer["lambda"] = inst.buyer.delay_factor;
  buyer["weights"] = {inst.buyer.w1, inst.buyer.w2};
  buyer["q_min"] = grid_to_json(inst.buyer.alloc_min);
  buyer["q_max"] = grid_to_json(inst.buyer.alloc_max);
  buyer["ordering_cost"] = grid_to_json(inst.buyer.ordering_cost);
  j["buyer"] = std::move(buyer);
  json sups = json::array();
  for (const SupplierParams& sp : inst.suppliers) sups.push_back(supplier_to_json(sp));
  j["suppliers"] = std::move(sups);
  j["horizon"] = inst.horizon;
  return j.dump(2) + "\n";
}

void write_instance(const ProcurementInstance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << instance_to_text(inst);
}

std::vector<double> parse_range(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char tail = '\0';
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &tail) != 3)
    throw ParseError("range '" + spec + "': expected lo:hi:step");
  if (step <= 0.0) throw ParseError("range '" + spec + "': step must be positive");
  if (hi < lo) throw ParseError("range '" + spec + "': upper end below lower end");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-6)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(lo + k * step);
  return out;
}

std::string solve_report_csv(const pso::SolveReport& report, const ProcurementInstance& inst) {
  std::ostringstream out;
  out << "kind,iteration,supplier,item,value\n";
  for (std::size_t t = 0; t < report.trace.size(); ++t)
    out << "trace," << t << ",,," << fmt6(report.trace[t]) << "\n";
  for (int i = 0; i < report.best_alloc.rows(); ++i)
    for (int j = 0; j < report.best_alloc.cols(); ++j)
      if (report.best_alloc(i, j) > 0)
        out << "alloc,," << i << "," << j << "," << report.best_alloc(i, j) << "\n";
  for (const SupplierPlan& sp : report.best_plans)
    for (const auto& [item, plan] : sp.items)
      out << "price,," << sp.supplier << "," << item << "," << fmt6(plan.price) << "\n";
  const BuyerObjective obj = buyer_objective(report.best_alloc, report.best_plans, inst);
  out << "objective,,,," << fmt6(obj.value) << "\n";
  out << "procurement,,,," << fmt6(obj.procurement) << "\n";
  out << "delay,,,," << fmt6(obj.delay) << "\n";
  return out.str();
}

std::string comparison_csv(const std::vector<baselines::ComparisonRow>& rows,
                           const std::vector<std::string>& algorithm_names) {
  std::ostringstream out;
  out << "problem,suppliers,items,repetitions,best_found";
  for (const std::string& name : algorithm_names)
    out << "," << name << "_mean_deviation," << name << "_mean_runtime";
  out << "\n";
  for (const baselines::ComparisonRow& row : rows) {
    out << row.problem << "," << row.supplier_count << "," << row.item_count << ","
        << row.repetitions << "," << fmt6(row.best_found);
    for (std::size_t a = 0; a < algorithm_names.size(); ++a)
      out << "," << fmt6(row.mean_deviation[a]) << "," << fmt6(row.mean_runtime[a]);
    out << "\n";
  }
  return out.str();
}

std::vector<SweepRow> sensitivity_sweep(const ProcurementInstance& base,
                                        const std::vector<double>& w1_grid,
                                        const std::vector<double>& gamma_grid,
                                        const pso::SwarmConfig& cfg, int beam, int stride) {
  std::vector<SweepRow> rows;
  rows.reserve(w1_grid.size() * gamma_grid.size());
  const pso::LowerSolver solver = pso::make_astar_solver(beam, stride);
  for (std::size_t a = 0; a < w1_grid.size(); ++a) {
    for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
      ProcurementInstance inst = base;
      inst.buyer.w1 = w1_grid[a];
      inst.buyer.w2 = 1.0 - w1_grid[a];
      for (SupplierParams& sp : inst.suppliers) sp.delay_factor = gamma_grid[g];
      pso::SwarmConfig cell = cfg;
      cell.seed = substream_seed(cfg.seed, a, g);
      const pso::SolveReport report = pso::run(inst, cell, solver);
      SweepRow row;
      row.w1 = w1_grid[a];
      row.gamma = gamma_grid[g];
      row.objective = report.best_value;
      if (std::isfinite(report.best_value)) {
        const BuyerObjective obj = buyer_objective(report.best_alloc, report.best_plans, inst);
        row.procurement = obj.procurement;
        row.delay = obj.delay;
      } else {
        row.procurement = std::numeric_limits<double>::infinity();
        row.delay = std::numeric_limits<double>::infinity();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "w1,gamma,objective,procurement_component,delay_component\n";
  for (const SweepRow& row : rows)
    out << fmt6(row.w1) << "," << fmt6(row.gamma) << "," << fmt6(row.objective) << ","
        << fmt6(row.procurement) << "," << fmt6(row.delay) << "\n";
  return out.str();
}

namespace {

std::uint64_t env_seed_default() {
  if (const char* env = std::getenv("BILEVEL_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::uint64_t>(v);
  }
  return 0;
}

bool parse_beam(const std::string& text, int& beam_out) {
  if (text == "unbounded") {
    beam_out = 0;
    return true;
  }
  try {
    const int v = std::stoi(text);
    if (v < 0) return false;
    beam_out = v;
    return true;
  } catch (...) {
    return false;
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ParseError(out_path + ": cannot open for writing");
  out << text;
}

int run_solve(const std::string& instance_path, const std::string& solver_name,
              std::uint64_t seed, const std::string& beam_text, int particles, int iters,
              double w1, bool has_w1, double gamma, bool has_gamma,
              const std::string& out_path) {
  int beam = 0;
  if (!parse_beam(beam_text, beam)) {
    std::cerr << "solve: --beam expects a non-negative integer or 'unbounded'\n";
    return kExitUsage;
  }

  ProcurementInstance inst;
  try {
    inst = read_instance(instance_path);
  } catch (const ParseError& e) {
    std::cerr << "solve: " << e.what() << "\n";
    return kExitValidation;
  }
  if (has_w1) {
    inst.buyer.w1 = w1;
    inst.buyer.w2 = 1.0 - w1;
  }
  if (has_gamma)
    for (SupplierParams& sp : inst.suppliers) sp.delay_factor = gamma;

  if (const auto problems = validate_instance(inst); !problems.empty()) {
    for (const std::string& p : problems) std::cerr << "solve: " << p << "\n";
    return kExitValidation;
  }

  pso::SwarmConfig cfg;
  cfg.particles = particles;
  cfg.iterations = iters;
  cfg.seed = seed;

  pso::LowerSolver solver;
  if (solver_name == "astar") {
    solver = pso::make_astar_solver(beam, 0);
  } else if (solver_name == "greedy") {
    solver = baselines::make_greedy_solver(0);
  } else if (solver_name == "sa") {
    baselines::SaConfig sa;
    sa.seed = substream_seed(seed, 0x5aULL);
    solver = baselines::make_sa_solver(sa, 0);
  } else {
    std::cerr << "solve: unknown solver '" << solver_name << "'\n";
    return kExitUsage;
  }

  const pso::SolveReport report = pso::run(inst, cfg, solver);
  if (!std::isfinite(report.best_value)) {
    std::cerr << "solve: no feasible allocation found\n";
    return kExitInfeasible;
  }
  emit(solve_report_csv(report, inst), out_path);
  return kExitOk;
}

int run_generate(int suppliers, int items, std::uint64_t seed, const std::string& out_path) {
  const ProcurementInstance inst = gen::generate_instance(suppliers, items, seed);
  emit(instance_to_text(inst), out_path);
  return kExitOk;
}

int run_compare(const std::string& suite_dir, int reps, std::uint64_t seed,
                const std::string& out_path) {
  std::vector<std::filesystem::path> paths;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(suite_dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      paths.push_back(entry.path());
  if (ec) {
    std::cerr << "compare: " << suite_dir << ": " << ec.message() << "\n";
    return kExitValidation;
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    std::cerr << "compare: no .json instances under " << suite_dir << "\n";
    return kExitValidation;
  }

  std::vector<ProcurementInstance> problems;
  for (const auto& path : paths) {
    try {
      problems.push_back(read_instance(path.string()));
    } catch (const ParseError& e) {
      std::cerr << "compare: " << e.what() << "\n";
      return kExitValidation;
    }
    if (const auto msgs = validate_instance(problems.back()); !msgs.empty()) {
      std::cerr << "compare: " << path.string() << ": " << msgs.front() << "\n";
      return kExitValidation;
    }
  }

  pso::SwarmConfig base;
  base.particles = 8;
  base.iterations = 12;
  baselines::SaConfig sa;
  sa.moves = 80;
  sa.warmup = 20;
  const std::vector<baselines::AlgorithmSpec> algorithms = {
      baselines::pso_astar_algorithm(base, /*beam=*/1000, /*stride=*/0),
      baselines::pso_greedy_algorithm(base, /*stride=*/0),
      baselines::pso_sa_algorithm(base, sa, /*stride=*/0)};

  const auto rows = baselines::compare_suite(problems, algorithms, reps, seed);
  emit(comparison_csv(rows, {"pso_astar", "pso_greedy", "pso_sa"}), out_path);
  return kExitOk;
}

int run_sweep(const std::string& instance_path, const std::string& w1_spec,
              const std::string& gamma_spec, std::uint64_t seed, const std::string& out_path) {
  ProcurementInstance inst;
  std::vector<double> w1_grid, gamma_grid;
  try {
    inst = read_instance(instance_path);
    w1_grid = parse_range(w1_spec);
    gamma_grid = parse_range(gamma_spec);
  } catch (const ParseError& e) {
    std::cerr << "sweep: " << e.what() << "\n";
    return kExitValidation;
  }
  if (const auto msgs = validate_instance(inst); !msgs.empty()) {
    for (const std::string& p : msgs) std::cerr << "sweep: " << p << "\n";
    return kExitValidation;
  }
  pso::SwarmConfig cfg;
  cfg.particles = 6;
  cfg.iterations = 10;
  cfg.seed = seed;
  const auto rows = sensitivity_sweep(inst, w1_grid, gamma_grid, cfg, /*beam=*/600, /*stride=*/0);
  emit(sweep_csv(rows), out_path);
  return kExitOk;
}

int run_audit(int seeds) {
  const auto cases = micro::subproblem_cases(1755, seeds);
  int agreements = 0;
  std::size_t states_audited = 0;
  std::size_t violations = 0;
  try {
    for (const auto& mc : cases) {
      const auto ref =
          oracle::brute_force_subproblem(mc.sp, mc.item, mc.qty, mc.horizon, mc.lt_lower);
      if (ref.status == oracle::Status::budget_exceeded) {
        std::cerr << "audit: enumeration budget exceeded on " << mc.name << "\n";
        return kExitBudget;
      }
      const auto plan = astar::solve_subproblem(mc.sp, mc.item, mc.qty, mc.horizon,
                                                mc.lt_lower, astar::PlannerOptions{0, 1});
      bool agree = false;
      if (ref.status == oracle::Status::infeasible) {
        agree = !plan.has_value();
      } else if (plan.has_value()) {
        const double want = ref.plan->total_cost;
        const double got = plan->total_cost;
        agree = std::abs(got - want) <=
                1e-9 * std::max({1.0, std::abs(want), std::abs(got)});
      }
      agreements += agree ? 1 : 0;

      const auto table =
          oracle::completion_cost_table(mc.sp, mc.item, mc.qty, mc.horizon, mc.lt_lower);
      const auto ctx =
          astar::PlannerContext::make(mc.sp, mc.item, mc.qty, mc.horizon, mc.lt_lower, 1);
      for (const auto& [key, value] : table) {
        if (value == std::numeric_limits<double>::infinity()) continue;
        ++states_audited;
        const double h = astar::heuristic_cost(
            astar::PlannerState{key.period, key.inventory, key.remaining}, ctx);
        if (h > value + 1e-9) ++violations;
      }
    }
  } catch (const std::length_error&) {
    std::cerr << "audit: completion-table budget exceeded\n";
    return kExitBudget;
  }

  std::cout << "exactness: " << agreements << "/" << cases.size() << " agree\n";
  std::cout << "admissibility: " << states_audited << " states audited, " << violations
            << " violations\n";
  const bool ok = agreements == static_cast<int>(cases.size()) && violations == 0;
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"bi-level procurement toolkit"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "allocate one instance and plan deliveries");
  std::string solve_instance;
  std::string solver_name = "astar";
  std::uint64_t solve_seed = env_seed_default();
  std::string beam_text = "2000";
  int particles = 30;
  int iters = 100;
  double w1 = 0.0, gamma = 0.0;
  std::string solve_out;
  solve->add_option("instance", solve_instance, "instance file")->required();
  solve->add_option("--solver", solver_name, "lower-level solver: astar|greedy|sa");
  solve->add_option("--seed", solve_seed, "outer-loop seed");
  solve->add_option("--beam", beam_text, "beam width or 'unbounded'");
  solve->add_option("--particles", particles, "swarm size");
  solve->add_option("--iters", iters, "outer iterations");
  auto* w1_opt = solve->add_option("--w1", w1, "override the procurement weight");
  auto* gamma_opt = solve->add_option("--gamma", gamma, "override every supplier's lateness rate");
  solve->add_option("--out", solve_out, "report file (stdout when absent)");

  // generate
  auto* generate = app.add_subcommand("generate", "draw a random instance");
  int gen_suppliers = 0, gen_items = 0;
  std::uint64_t gen_seed = env_seed_default();
  std::string gen_out;
  generate->add_option("--suppliers", gen_suppliers, "supplier count")->required();
  generate->add_option("--items", gen_items, "item count")->required();
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--out", gen_out, "instance file (stdout when absent)");

  // compare
  auto* compare = app.add_subcommand("compare", "benchmark the three strategies on a suite");
  std::string suite_dir;
  int reps = 10;
  std::uint64_t compare_seed = env_seed_default();
  std::string compare_out;
  compare->add_option("--suite", suite_dir, "directory of instance files")->required();
  compare->add_option("--reps", reps, "repetitions per problem and algorithm");
  compare->add_option("--seed", compare_seed, "suite seed");
  compare->add_option("--out", compare_out, "report file (stdout when absent)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "objective surface over weight and lateness rate");
  std::string sweep_instance;
  std::string w1_spec = "0:1:0.1";
  std::string gamma_spec = "0.8:0.97:0.01";
  std::uint64_t sweep_seed = env_seed_default();
  std::string sweep_out;
  sweep->add_option("instance", sweep_instance, "instance file")->required();
  sweep->add_option("--w1", w1_spec, "w1 grid as lo:hi:step");
  sweep->add_option("--gamma", gamma_spec, "gamma grid as lo:hi:step");
  sweep->add_option("--seed", sweep_seed, "sweep seed");
  sweep->add_option("--out", sweep_out, "report file (stdout when absent)");

  // audit
  auto* audit = app.add_subcommand("audit", "check the planner against the enumerator");
  bool micro_suite = false;
  int audit_seeds = 200;
  audit->add_flag("--micro-suite", micro_suite, "run the micro-problem audit");
  audit->add_option("--seeds", audit_seeds, "number of audited problems");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("bilevel");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve)
      return run_solve(solve_instance, solver_name, solve_seed, beam_text, particles, iters,
                       w1, w1_opt->count() > 0, gamma, gamma_opt->count() > 0, solve_out);
    if (*generate) return run_generate(gen_suppliers, gen_items, gen_seed, gen_out);
    if (*compare) return run_compare(suite_dir, reps, compare_seed, compare_out);
    if (*sweep)
      return run_sweep(sweep_instance, w1_spec, gamma_spec, sweep_seed, sweep_out);
    if (*audit) {
      if (!micro_suite) {
        std::cerr << "audit: --micro-suite is the only audit available\n";
        return kExitUsage;
      }
      return run_audit(audit_seeds);
    }
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::length_error& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace bilevel::io
