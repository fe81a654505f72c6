#include "bilevel/micro.hpp"

#include <algorithm>

#include "bilevel/rng.hpp"

namespace bilevel::micro {

namespace {

SupplierParams one_item_supplier(double cor, double cov, double pt, double hold, double hold_iv,
                                 double setup, int ss, int vcap, int incap,
                                 std::vector<double> cap_ord, std::vector<double> cap_ot,
                                 int vehicles, double alpha, double beta, double gamma,
                                 double profit) {
  SupplierParams sp;
  sp.prod_cost_ord = {cor};
  sp.prod_cost_ot = {cov};
  sp.proc_time = {pt};
  sp.hold_cost = {hold};
  sp.hold_cost_interval = {hold_iv};
  sp.setup_cost = {setup};
  sp.safety_stock = {ss};
  sp.vehicle_cap = {vcap};
  sp.store_cap = {incap};
  sp.cap_ord = std::move(cap_ord);
  sp.cap_ot = std::move(cap_ot);
  sp.vehicle_count = vehicles;
  sp.vehicle_fixed_cost = alpha;
  sp.vehicle_unit_cost = beta;
  sp.delay_factor = gamma;
  sp.profit_rate = profit;
  return sp;
}

}  // namespace

std::vector<SubproblemCase> subproblem_cases(std::uint64_t seed, int count) {
  std::vector<SubproblemCase> cases;
  cases.reserve(static_cast<std::size_t>(count));

  for (int k = 0; k < count; ++k) {
    auto rng = make_rng(substream_seed(seed, static_cast<std::uint64_t>(k)));

    const double pt = uniform_real(rng, 0.5, 2.0);
    const int units_or = uniform_int(rng, 1, 4);
    const int units_ot = uniform_int(rng, 0, 2);
    const double cor = uniform_real(rng, 1.0, 10.0);
    const double cov = cor * uniform_real(rng, 1.0, 1.8);
    const double hold = uniform_real(rng, 0.0, 2.0);
    const double hold_iv = hold * uniform_real(rng, 0.3, 1.0);
    const double setup = uniform_real(rng, 0.0, 15.0);
    const int ss = std::max(0, uniform_int(rng, -2, 2));  // weighted toward zero
    const int vcap = uniform_int(rng, 1, 4);
    const int incap = uniform_int(rng, std::max(1, ss), 6);
    const int vehicles = uniform_int(rng, 1, 2);
    const double alpha = uniform_real(rng, 0.0, 10.0);
    const double beta = uniform_real(rng, 0.0, 3.0);
    const double gamma = uniform_real(rng, 0.0, 1.5);
    const double profit = uniform_real(rng, 0.05, 0.2);

    SubproblemCase sc;
    sc.sp = one_item_supplier(cor, cov, pt, hold, hold_iv, setup, ss, vcap, incap,
                              {units_or * pt}, {units_ot * pt}, vehicles, alpha, beta, gamma,
                              profit);
    sc.horizon = uniform_int(rng, 2, 3);
    sc.lt_lower = uniform_int(rng, 1, 2);

    const int roll = uniform_int(rng, 0, 5);
    if (roll == 0 && ss > 0) {
      sc.qty = uniform_int(rng, 1, ss);  // stock-covered lot
      sc.name = "micro/stock-covered/" + std::to_string(k);
    } else {
      sc.qty = uniform_int(rng, 1, 8);
      sc.name = "micro/produced/" + std::to_string(k);
    }
    sc.item = 0;
    cases.push_back(std::move(sc));
  }
  return cases;
}

ProcurementInstance tiny_bilevel_instance(std::uint64_t seed) {
  auto rng = make_rng(substream_seed(seed, 0x7b));

  ProcurementInstance inst;
  inst.name = "tiny-bilevel";
  inst.seed = seed;
  inst.horizon = 3;

  const int demand = uniform_int(rng, 5, 7);
  inst.buyer.demand = {demand};
  inst.buyer.lt_lower = 1;
  inst.buyer.lt_upper = uniform_int(rng, 1, 2);
  inst.buyer.delay_factor = uniform_real(rng, 0.2, 1.0);
  inst.buyer.w1 = 0.4;
  inst.buyer.w2 = 0.6;
  inst.buyer.alloc_min = Grid<int>(2, 1, 2);
  inst.buyer.alloc_max = Grid<int>(2, 1, demand - 1);  // forces a real split
  inst.buyer.ordering_cost = Grid<double>(2, 1, 0.0);
  inst.buyer.ordering_cost(0, 0) = uniform_real(rng, 5.0, 20.0);
  inst.buyer.ordering_cost(1, 0) = uniform_real(rng, 5.0, 20.0);

  for (int i = 0; i < 2; ++i) {
    const double pt = uniform_real(rng, 0.5, 1.5);
    const double cor = uniform_real(rng, 2.0, 8.0);
    SupplierParams sp = one_item_supplier(
        cor, cor * uniform_real(rng, 1.2, 1.6), pt, uniform_real(rng, 0.1, 1.0),
        uniform_real(rng, 0.1, 0.8), uniform_real(rng, 1.0, 8.0), 0, uniform_int(rng, 2, 4),
        uniform_int(rng, 4, 8), {uniform_int(rng, 2, 3) * pt}, {1 * pt},
        uniform_int(rng, 1, 2), uniform_real(rng, 1.0, 6.0), uniform_real(rng, 0.2, 1.5),
        uniform_real(rng, 0.1, 0.8), uniform_real(rng, 0.05, 0.2));
    inst.suppliers.push_back(std::move(sp));
  }
  return inst;
}

std::vector<FeasibilityCase> feasibility_cases() {
  // Base situation: lot of 4, opening stock 1, two vehicles, three periods.
  // Produce 3 then 1; ship 3 then 1; end back at the opening stock.
  const SupplierParams base = one_item_supplier(
      /*cor=*/2.0, /*cov=*/3.0, /*pt=*/1.0, /*hold=*/0.5, /*hold_iv=*/1.0, /*setup=*/5.0,
      /*ss=*/1, /*vcap=*/5, /*incap=*/10, {3.0}, {2.0}, /*vehicles=*/2, /*alpha=*/1.0,
      /*beta=*/1.0, /*gamma=*/0.5, /*profit=*/0.1);

  ItemPlan clean;
  clean.item = 0;
  clean.order_qty = 4;
  clean.initial_inventory = 1;
  {
    PeriodRecord t1;
    t1.ordinary = 3;
    t1.sends = {3, 0};
    t1.setup = true;
    t1.inventory = 1;
    PeriodRecord t2;
    t2.ordinary = 1;
    t2.sends = {1, 0};
    t2.setup = true;
    t2.inventory = 1;
    t2.delay_penalty = 0.5;
    clean.periods = {t1, t2};
  }

  std::vector<FeasibilityCase> cases;
  auto add = [&](std::string name, bool should_pass, auto&& mutate) {
    FeasibilityCase fc;
    fc.name = std::move(name);
    fc.plan = clean;
    fc.sp = base;
    fc.item = 0;
    fc.qty = 4;
    fc.horizon = 3;
    fc.should_pass = should_pass;
    mutate(fc);
    cases.push_back(std::move(fc));
  };

  add("clean plan", true, [](FeasibilityCase&) {});

  add("ordinary shift over capacity", false, [](FeasibilityCase& fc) {
    fc.plan.periods[0].ordinary = 4;  // shift fits 3
    fc.plan.periods[0].inventory = 2;
    fc.plan.periods[1].ordinary = 0;
    fc.plan.periods[1].setup = false;
    fc.plan.periods[1].inventory = 1;
  });

  add("lot overproduced", false, [](FeasibilityCase& fc) {
    fc.plan.periods[1].ordinary = 2;  // total 5 produced for a lot of 4
    fc.plan.periods[1].inventory = 2;
  });

  add("lot undershipped", false, [](FeasibilityCase& fc) {
    fc.plan.periods[1].sends = {0, 0};
    fc.plan.periods[1].inventory = 2;
    fc.plan.periods[1].delay_penalty = 0.0;
  });

  add("inventory balance broken", false,
      [](FeasibilityCase& fc) { fc.plan.periods[1].inventory = 0; });

  add("send over vehicle capacity", false, [](FeasibilityCase& fc) {
    fc.sp.vehicle_cap[0] = 2;  // period 1 sends 3 on one vehicle
  });

  add("inventory over store capacity", false, [](FeasibilityCase& fc) {
    fc.sp.store_cap[0] = 0;  // every end inventory of 1 now overflows
  });

  add("production without setup", false,
      [](FeasibilityCase& fc) { fc.plan.periods[0].setup = false; });

  add("negative inventory", false, [](FeasibilityCase& fc) {
    fc.plan.periods[0].sends = {5, 0};  // ships more than on hand
    fc.plan.periods[0].inventory = -1;
    fc.plan.periods[1].sends = {0, 0};
    fc.plan.periods[1].ordinary = 1;
    fc.plan.periods[1].inventory = 0;
    fc.plan.periods[1].delay_penalty = 0.0;
  });

  add("plan longer than horizon", false, [](FeasibilityCase& fc) {
    fc.horizon = 1;  // two period records no longer fit
  });

  add("stock-covered lot skips production", true, [](FeasibilityCase& fc) {
    fc.qty = 1;
    fc.sp.safety_stock[0] = 1;
    fc.plan.order_qty = 1;
    fc.plan.initial_inventory = 1;
    fc.plan.periods.clear();
    PeriodRecord t1;
    t1.sends = {1, 0};
    t1.inventory = 0;
    fc.plan.periods = {t1};
  });

  return cases;
}

}  // namespace bilevel::micro
