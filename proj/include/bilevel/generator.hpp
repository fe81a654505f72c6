#pragma once

#include <cstdint>
#include <vector>

#include "bilevel/model.hpp"

namespace bilevel::gen {

// Every numeric range the instance sampler draws from. The defaults are the
// headline scale (demands in the hundreds); the benchmark suites shrink the
// ranges so whole suites finish at desk scale.
struct GeneratorConfig {
  int suppliers = 2;
  int items = 1;
  std::uint64_t seed = 0;

  int demand_lo = 300, demand_hi = 1000;
  double pt_lo = 3.0, pt_hi = 5.5;        // processing time per unit
  double cor_lo = 5.0, cor_hi = 15.0;     // ordinary-shift unit cost
  double cov_mul_lo = 1.2, cov_mul_hi = 1.6;  // overtime premium on cor
  double cap_lo = 200.0, cap_hi = 400.0;  // shift time per period (both shifts)
  double hold_lo = 0.5, hold_hi = 2.0;
  double hold_iv_mul_lo = 0.5, hold_iv_mul_hi = 1.0;  // interval rate on hold
  double setup_lo = 50.0, setup_hi = 200.0;
  int ss_lo = 0, ss_hi = 20;
  int vcap_lo = 20, vcap_hi = 60;
  int incap_lo = 40, incap_hi = 120;
  int vehicles_lo = 2, vehicles_hi = 5;
  double alpha_lo = 20.0, alpha_hi = 80.0;
  double beta_lo = 0.5, beta_hi = 3.0;
  double gamma_lo = 0.3, gamma_hi = 0.9;
  double profit_lo = 0.05, profit_hi = 0.2;
  double order_cost_lo = 10.0, order_cost_hi = 50.0;
  double qmin_frac_lo = 0.05, qmin_frac_hi = 0.15;  // of the item demand
  double qmax_frac_lo = 0.5, qmax_frac_hi = 0.9;
};

// Draws one instance from the configured ranges. The allocation ceilings are
// lifted to at least ceil(1.1 * demand / suppliers) so the demand is always
// coverable; the buyer's shortage rate is twice the mean supplier lateness
// rate; the horizon is the planning estimate plus one slack period; the
// delivery window endpoints are drawn inside the horizon. Every instance
// passes validate_instance by construction.
ProcurementInstance generate_instance(const GeneratorConfig& cfg);

// Headline-scale convenience wrapper.
ProcurementInstance generate_instance(int suppliers, int items, std::uint64_t seed);

// Fourteen desk-scale problems spanning 2-5 suppliers and 1-7 items.
std::vector<ProcurementInstance> small_benchmark_suite(std::uint64_t seed);

// Four larger problems spanning 8-15 suppliers and 30-70 items, sized for
// reduced-budget comparison runs.
std::vector<ProcurementInstance> large_benchmark_suite(std::uint64_t seed);

}  // namespace bilevel::gen
