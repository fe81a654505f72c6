// Lower-level planner: delivery closed forms, branching, frontier bookkeeping,
// heuristic shape, and end-to-end solves.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bilevel/astar.hpp"
#include "bilevel/micro.hpp"

using namespace bilevel;
using namespace bilevel::astar;

namespace {

SupplierParams make_supplier(double cor, double cov, double pt, double hold, double hold_iv,
                             double setup, int ss, int vcap, int incap, double cap_or,
                             double cap_ot, int vehicles, double alpha, double beta,
                             double gamma) {
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
  sp.cap_ord = {cap_or};
  sp.cap_ot = {cap_ot};
  sp.vehicle_count = vehicles;
  sp.vehicle_fixed_cost = alpha;
  sp.vehicle_unit_cost = beta;
  sp.delay_factor = gamma;
  sp.profit_rate = 0.1;
  return sp;
}

}  // namespace

TEST_CASE("base load balances holding against vehicle charges") {
  // radical collapses to 2*beta/(H*PT)
  CHECK(base_delivery_quantity(0.0, 3.0, 2.0, 1.0, 100, 100, 100) == 3);
  // (2 + sqrt(68)) / 4 ~= 2.56, floored
  CHECK(base_delivery_quantity(8.0, 2.0, 1.0, 4.0, 100, 100, 100) == 2);
  // binding vehicle capacity
  CHECK(base_delivery_quantity(8.0, 2.0, 1.0, 4.0, 1, 100, 100) == 1);
  // free holding: capacities and the undelivered quantity decide
  CHECK(base_delivery_quantity(5.0, 1.0, 0.0, 2.0, 40, 60, 25) == 25);
  // never below one unit, even with nothing left to move
  CHECK(base_delivery_quantity(8.0, 2.0, 1.0, 4.0, 100, 100, 0) == 1);
}

TEST_CASE("dispatch count rounds loads up and stops at the fleet size") {
  CHECK(delivery_count(10, 3, 5) == 4);
  CHECK(delivery_count(0, 3, 5) == 0);
  CHECK(delivery_count(7, 3, 1) == 1);
  CHECK_THROWS_AS(delivery_count(5, 0, 3), std::invalid_argument);
}

TEST_CASE("augmentation ships the leftover when holding it is dearer") {
  // Base loads leave 3 units behind; the balance root lands at ~4.63, so the
  // augmented load wants 5 but only 4 units exist: everything ships.
  const SupplierParams sp =
      make_supplier(2.0, 3.0, 1.0, 2.0, 17.0, 0.0, 0, 100, 100, 20.0, 0.0, 1, 1.0, 1.0, 0.0);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 20, 4, 1);

  const DeliveryOutcome out = augmented_delivery(ctx, 0, 4, 20);
  REQUIRE(out.sends.size() == 1);
  CHECK(out.sends[0] == 4);
  CHECK(out.shipped == 4);
  CHECK(out.end_inventory == 0);
}

TEST_CASE("no leftover means base loads only") {
  // aq = 2*beta/(H*PT) = 3; production 6 fills two vehicles exactly
  const SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 2.0, 0.5, 0.0, 0, 100, 100, 20.0, 0.0, 2, 0.0, 3.0, 0.0);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 20, 4, 1);

  const DeliveryOutcome out = augmented_delivery(ctx, 0, 6, 20);
  REQUIRE(out.sends.size() == 2);
  CHECK(out.sends[0] == 3);
  CHECK(out.sends[1] == 3);
  CHECK(out.end_inventory == 0);
}

TEST_CASE("free holding never augments") {
  const SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0, 10, 10, 20.0, 0.0, 1, 1.0, 1.0, 0.0);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 20, 4, 1);

  // stock 8, base load capped by nothing economic: aq = min(10,10,20) = 10 -> one
  // vehicle takes min(8, 10): here holding is free so the rule must not force
  // extra volume beyond the base formula
  const DeliveryOutcome out = augmented_delivery(ctx, 0, 8, 20);
  CHECK(out.shipped == 8);  // base load already covers the full stock
  SUBCASE("with a small base load the leftover stays") {
    const SupplierParams tight =
        make_supplier(1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0, 3, 10, 20.0, 0.0, 1, 1.0, 1.0, 0.0);
    const PlannerContext tctx = PlannerContext::make(tight, 0, 20, 4, 1);
    const DeliveryOutcome o2 = augmented_delivery(tctx, 0, 8, 20);
    CHECK(o2.sends[0] == 3);  // vehicle capacity binds the base load
    CHECK(o2.shipped == 3);   // no augmentation pressure, 5 units stay
    CHECK(o2.end_inventory == 5);
  }
}

TEST_CASE("deliveries never dig into the reserved stock") {
  // lot 4 within opening stock 10: reserve is 6, only 4 may ever leave
  const SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 0.5, 0.2, 0.0, 10, 50, 50, 10.0, 0.0, 2, 0.5, 0.5, 0.0);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 4, 3, 1);
  CHECK(ctx.reserve == 6);

  const DeliveryOutcome out = augmented_delivery(ctx, 10, 0, 4);
  CHECK(out.shipped <= 4);
  CHECK(out.end_inventory >= 6);
}

TEST_CASE("branching enumerates the ordinary shift first, overtime at the margin") {
  const SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 0, 10, 10, 2.0, 1.0, 1, 0.5, 0.5, 0.2);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 5, 4, 1);

  SearchNode root;
  root.state = PlannerState{0, 0, 5};
  root.h = heuristic_cost(root.state, ctx);
  root.f = root.h;

  const auto kids = expand_node(root, ctx);
  REQUIRE(kids.size() == 4);
  CHECK(kids[0].action.ordinary == 0);
  CHECK(kids[1].action.ordinary == 1);
  CHECK(kids[2].action.ordinary == 2);
  CHECK(kids[2].action.overtime == 0);
  CHECK(kids[3].action.ordinary == 2);
  CHECK(kids[3].action.overtime == 1);
  for (const auto& k : kids) CHECK(k.f == doctest::Approx(k.g + k.h));
}

TEST_CASE("nothing owed collapses the branching to a delivery-only child") {
  const SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 0, 10, 10, 2.0, 1.0, 1, 0.5, 0.5, 0.2);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 5, 4, 1);

  SearchNode node;
  node.state = PlannerState{1, 6, 4};  // stock already covers the rest
  const auto kids = expand_node(node, ctx);
  REQUIRE(kids.size() == 1);
  CHECK(kids[0].action.ordinary == 0);
  CHECK(kids[0].action.overtime == 0);
  CHECK(kids[0].state.remaining < 4);  // the rule must ship something
}

TEST_CASE("frontier pops by f, breaks ties by arrival, truncates from the worst end") {
  OpenList open(0);
  // bookkeeping on a 5-node tree: expanding the start yields {a, d}; expanding
  // a yields {b, c}; pops then run b, d, c; c yields the goal e, selected next
  open.push(/*start*/ 0, 0.0);
  REQUIRE(open.pop_lowest() == 0);
  open.push(/*a*/ 1, 1.0);
  open.push(/*d*/ 4, 4.0);
  CHECK(open.contents() == std::vector<int>{1, 4});
  REQUIRE(open.pop_lowest() == 1);
  open.push(/*b*/ 2, 2.0);
  open.push(/*c*/ 3, 5.0);
  REQUIRE(open.pop_lowest() == 2);
  REQUIRE(open.pop_lowest() == 4);
  REQUIRE(open.pop_lowest() == 3);
  open.push(/*e*/ 5, 5.5);
  CHECK(open.pop_lowest() == 5);
  CHECK(open.empty());

  SUBCASE("equal f pops in arrival order") {
    OpenList tie(0);
    tie.push(7, 3.0);
    tie.push(8, 3.0);
    CHECK(tie.pop_lowest() == 7);
    CHECK(tie.pop_lowest() == 8);
  }
  SUBCASE("truncation keeps the lowest-f entries") {
    OpenList beam(2);
    beam.push(1, 1.0);
    beam.push(2, 2.0);
    beam.push(3, 3.0);
    beam.truncate();
    CHECK(beam.size() == 2);
    CHECK(beam.contents() == std::vector<int>{1, 2});
  }
}

TEST_CASE("completion estimate is zero at the goal and skips impossible lateness") {
  const SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 0, 10, 10, 2.0, 1.0, 1, 0.5, 0.5, 0.7);
  const PlannerContext ctx = PlannerContext::make(sp, 0, 5, 4, 1);

  CHECK(heuristic_cost(PlannerState{2, 0, 0}, ctx) == doctest::Approx(0.0));

  // everything can ship inside the grace window: no lateness component
  const SupplierParams roomy =
      make_supplier(1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0, 10, 10, 2.0, 0.0, 1, 0.0, 0.0, 0.9);
  PlannerContext ctx2 = PlannerContext::make(roomy, 0, 2, 4, 1);
  ctx2.lt_lower = 3;
  const double h = heuristic_cost(PlannerState{0, 2, 2}, ctx2);
  CHECK(h == doctest::Approx(0.0));  // stock covers it, shipping is free, no lag
}

TEST_CASE("stock-covered lot ships from the warehouse with no production") {
  SupplierParams sp =
      make_supplier(3.0, 4.0, 1.0, 0.2, 0.1, 5.0, 10, 50, 50, 10.0, 0.0, 2, 0.2, 0.1, 0.0);
  const auto plan = solve_subproblem(sp, 0, 5, 3, 1);
  REQUIRE(plan.has_value());
  int produced = 0;
  int shipped = 0;
  for (const auto& pr : plan->periods) {
    produced += pr.produced();
    CHECK(!pr.setup);
    shipped += pr.shipped();
  }
  CHECK(produced == 0);
  CHECK(shipped == 5);
  CHECK(plan->periods.back().inventory == 5);  // opening 10 minus the lot
  CHECK(check_plan_feasible(*plan, sp, 0, 5, 3).empty());

  // production cost plays no role in the quote
  const CostBreakdown cb = item_cost(*plan, sp, 0);
  CHECK(cb.production_ord == doctest::Approx(0.0));
  CHECK(cb.setup == doctest::Approx(0.0));
}

TEST_CASE("zero lot yields an empty plan at zero cost") {
  SupplierParams sp =
      make_supplier(3.0, 4.0, 1.0, 0.2, 0.1, 5.0, 2, 50, 50, 10.0, 0.0, 2, 0.2, 0.1, 0.0);
  const auto plan = solve_subproblem(sp, 0, 0, 3, 1);
  REQUIRE(plan.has_value());
  CHECK(plan->periods.empty());
  CHECK(plan->total_cost == doctest::Approx(0.0));
  CHECK(plan->price == doctest::Approx(0.0));
}

TEST_CASE("three-period lot reconstructs three period records") {
  SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 1.0, 5.0, 1.0, 0, 10, 10, 2.0, 0.0, 3, 0.1, 0.1, 0.3);
  const auto plan = solve_subproblem(sp, 0, 6, 3, 1);
  REQUIRE(plan.has_value());
  CHECK(plan->periods.size() == 3);
  int shipped = 0;
  for (const auto& pr : plan->periods) shipped += pr.shipped();
  CHECK(shipped == 6);
  CHECK(plan->periods.back().inventory == 0);
  CHECK(check_plan_feasible(*plan, sp, 0, 6, 3).empty());
  CHECK(plan->price > 0.0);
}

TEST_CASE("a lot beyond all capacity reports no plan") {
  SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 0, 10, 10, 2.0, 0.0, 1, 0.1, 0.1, 0.3);
  CHECK(!solve_subproblem(sp, 0, 6, 2, 1).has_value());
}

TEST_CASE("identical solves produce identical plans") {
  SupplierParams sp =
      make_supplier(2.0, 3.0, 1.3, 0.8, 0.4, 4.0, 1, 4, 6, 3.9, 1.3, 2, 2.0, 0.7, 0.4);
  const auto a = solve_subproblem(sp, 0, 7, 3, 1);
  const auto b = solve_subproblem(sp, 0, 7, 3, 1);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->total_cost == b->total_cost);  // bitwise, not approximate
  CHECK(a->price == b->price);
  REQUIRE(a->periods.size() == b->periods.size());
  for (std::size_t t = 0; t < a->periods.size(); ++t) {
    CHECK(a->periods[t].ordinary == b->periods[t].ordinary);
    CHECK(a->periods[t].overtime == b->periods[t].overtime);
    CHECK(a->periods[t].sends == b->periods[t].sends);
  }
}

TEST_CASE("narrow beams never beat the unbounded search") {
  const auto cases = micro::subproblem_cases(20260822, 25);
  for (const auto& mc : cases) {
    PlannerOptions exact;
    exact.beam = 0;
    const auto best = solve_subproblem(mc.sp, mc.item, mc.qty, mc.horizon, mc.lt_lower, exact);
    if (!best.has_value()) continue;
    for (std::size_t beam : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{20}}) {
      PlannerOptions opts;
      opts.beam = beam;
      const auto got = solve_subproblem(mc.sp, mc.item, mc.qty, mc.horizon, mc.lt_lower, opts);
      if (!got.has_value()) continue;  // a narrow beam may lose the goal entirely
      CAPTURE(mc.name);
      CAPTURE(beam);
      CHECK(got->total_cost >= best->total_cost - 1e-9);
      CHECK(check_plan_feasible(*got, mc.sp, mc.item, mc.qty, mc.horizon).empty());
    }
  }
}

TEST_CASE("widening the beam never worsens the plan on the micro corpus") {
  // not a theorem for beam search in general, but deterministic on this
  // fixed corpus; guards against ordering bugs in the truncation
  const auto cases = micro::subproblem_cases(4242, 60);
  for (const auto& mc : cases) {
    CAPTURE(mc.name);
    double prev = std::numeric_limits<double>::infinity();
    for (int beam : {2, 5, 0}) {
      PlannerOptions o;
      o.beam = beam;
      const auto p = solve_subproblem(mc.sp, mc.item, mc.qty, mc.horizon, mc.lt_lower, o);
      const double c = p ? p->total_cost : std::numeric_limits<double>::infinity();
      CHECK(c <= prev + 1e-9);
      prev = c;
    }
  }
}

TEST_CASE("search statistics reflect the work done") {
  // beta is generous so the loading rule is happy to ship a whole batch at
  // once; the interesting part here is the bookkeeping, not the economics
  SupplierParams sp =
      make_supplier(1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 0, 10, 10, 3.0, 1.0, 2, 0.5, 5.0, 0.2);

  SearchStats wide;
  PlannerOptions unbounded;
  unbounded.beam = 0;
  REQUIRE(solve_subproblem(sp, 0, 8, 3, 1, unbounded, &wide).has_value());
  CHECK(wide.expanded > 0);
  CHECK(wide.generated >= wide.expanded);
  CHECK(wide.truncated == 0);
  CHECK(wide.open_peak > 0);

  // a beam of 3 against a branching factor of 5 must shed children, whether
  // or not it still reaches the goal
  SearchStats narrow;
  PlannerOptions opts;
  opts.beam = 3;
  solve_subproblem(sp, 0, 8, 3, 1, opts, &narrow);
  CHECK(narrow.open_peak <= 3);
  CHECK(narrow.truncated > 0);
}
