#include "carbon/properties.hpp"

#include <algorithm>
#include <cmath>

#include "carbon/allocation.hpp"
#include "carbon/equilibrium.hpp"
#include "carbon/errors.hpp"
#include "carbon/pricing.hpp"
#include "carbon/validate.hpp"

namespace carbon {

SettlementReport settle(const SystemCase& sys, const ClearingSolution& sol,
                        const DualSolution& duals, double tolerance) {
  CaseIndex idx(sys);
  SettlementReport rep;
  PriceReport prices = carbon_adjusted_prices(duals, sys, sol);

  for (size_t d = 0; d < sys.consumers.size(); ++d) {
    rep.consumer_payments += prices.load_price[d] * sol.p_d[d];
    rep.consumer_surplus.push_back(
        (sys.consumers[d].utility - prices.load_price[d]) * sol.p_d[d]);
  }
  for (size_t g = 0; g < sys.generators.size(); ++g) {
    rep.generator_revenues += prices.gen_price[g] * sol.p_g[g];
    rep.generator_surplus.push_back(
        (prices.gen_price[g] - sys.generators[g].cost) * sol.p_g[g]);
  }
  rep.congestion_rent = prices.congestion_rent;
  rep.carbon_revenue = prices.carbon_revenue;
  rep.surplus = rep.consumer_payments - rep.generator_revenues - rep.congestion_rent;

  double scale = 1.0 + std::abs(rep.consumer_payments) +
                 std::abs(rep.generator_revenues) + std::abs(rep.congestion_rent);
  rep.revenue_adequate = rep.surplus >= -tolerance * scale;
  rep.budget_balanced =
      std::abs(rep.surplus - rep.carbon_revenue) <= tolerance * scale;
  return rep;
}

RationalityReport individual_rationality(const SystemCase& sys,
                                         const ClearingSolution& sol,
                                         const DualSolution& duals,
                                         double tolerance) {
  SettlementReport s = settle(sys, sol, duals, tolerance);
  RationalityReport rep;
  rep.generator_surplus = s.generator_surplus;
  rep.consumer_surplus = s.consumer_surplus;
  rep.min_surplus = 0.0;
  double scale = 1.0;
  for (double v : rep.generator_surplus) {
    rep.min_surplus = std::min(rep.min_surplus, v);
    scale = std::max(scale, std::abs(v));
  }
  for (double v : rep.consumer_surplus) {
    rep.min_surplus = std::min(rep.min_surplus, v);
    scale = std::max(scale, std::abs(v));
  }
  rep.guaranteed = true;
  for (const auto& g : sys.generators)
    if (g.p_min > 0.0) rep.guaranteed = false;
  for (const auto& d : sys.consumers)
    if (d.p_min > 0.0) rep.guaranteed = false;
  rep.pass = rep.min_surplus >= -tolerance * scale;
  return rep;
}

namespace {

// Certifies a reduced-model solution against the carbon-aware optimality
// system: augment it with a cost-optimal allocation and the mapped
// adjustments, then run the full residual audit.
bool cross_certify(const SystemCase& sys, const ClearingResult& reduced,
                   double tax, double tolerance) {
  std::vector<double> e_g(sys.generators.size()), c_d(sys.consumers.size());
  for (size_t g = 0; g < e_g.size(); ++g) e_g[g] = sys.generators[g].emission;
  for (size_t d = 0; d < c_d.size(); ++d) c_d[d] = sys.consumers[d].carbon_cost;

  ClearingSolution sol = reduced.solution;
  sol.has_allocation = true;
  sol.pi = allocate_greedy(sol.p_g, sol.p_d, e_g, c_d);
  sol.e_d = emissions_of(sol.pi, e_g);
  sol.carbon_cost_total = 0.0;
  for (size_t d = 0; d < c_d.size(); ++d)
    sol.carbon_cost_total += c_d[d] * sol.e_d[d];
  sol.objective = sol.utility_total - sol.carbon_cost_total - sol.gen_cost_total;

  DualSolution duals = reduced.duals;
  for (size_t g = 0; g < e_g.size(); ++g) duals.lambda_g[g] = -tax * e_g[g];
  for (size_t d = 0; d < c_d.size(); ++d) {
    duals.lambda_d[d] = 0.0;
    duals.lambda_e[d] = c_d[d];
  }
  // The eta margins already match the taxed stationarity, which coincides
  // with the carbon-aware one under the mapped adjustments.
  ResidualReport rep = kkt_residuals(sys, sol, duals, tolerance);
  return rep.pass;
}

EquivalenceReport compare(const SystemCase& carbon_case,
                          const SystemCase& reduced_case,
                          const ClearingResult& carbon,
                          const ClearingResult& reduced, double tax,
                          double tolerance) {
  EquivalenceReport rep;
  rep.objective_a = carbon.solution.objective;
  rep.objective_b = reduced.solution.objective;
  rep.objective_gap = std::abs(rep.objective_a - rep.objective_b) /
                      (1.0 + std::abs(rep.objective_a));
  rep.emissions_a = carbon.solution.total_emissions(carbon_case);
  rep.emissions_b = reduced.solution.total_emissions(reduced_case);
  rep.gen_cost_a = carbon.solution.gen_cost_total;
  rep.gen_cost_b = reduced.solution.gen_cost_total;
  rep.objectives_match = rep.objective_gap <= tolerance;
  double em_scale = 1.0 + std::abs(rep.emissions_a);
  double cost_scale = 1.0 + std::abs(rep.gen_cost_a);
  rep.totals_match =
      std::abs(rep.emissions_a - rep.emissions_b) <= tolerance * em_scale &&
      std::abs(rep.gen_cost_a - rep.gen_cost_b) <= tolerance * cost_scale;
  rep.cross_kkt_pass = cross_certify(carbon_case, reduced, tax, tolerance);
  rep.pass = rep.objectives_match && rep.cross_kkt_pass;
  return rep;
}

}  // namespace

EquivalenceReport equivalence_standard(const SystemCase& sys,
                                       const SolveOptions& opts) {
  SystemCase zeroed = sys;
  for (auto& d : zeroed.consumers) d.carbon_cost = 0.0;
  ClearingResult carbon = solve_clearing(zeroed, opts);
  ClearingResult standard = solve_standard(sys, opts);
  return compare(zeroed, sys, carbon, standard, 0.0, opts.kkt_tolerance);
}

EquivalenceReport equivalence_tax(const SystemCase& sys, double tax,
                                  const SolveOptions& opts) {
  if (tax < 0.0) throw Error("tax rate must be non-negative");
  SystemCase uniform = sys;
  for (auto& d : uniform.consumers) d.carbon_cost = tax;
  ClearingResult carbon = solve_clearing(uniform, opts);
  ClearingResult taxed = solve_with_tax(sys, tax, opts);
  return compare(uniform, sys, carbon, taxed, tax, opts.kkt_tolerance);
}

}  // namespace carbon
