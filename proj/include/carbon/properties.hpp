#pragma once

#include <string>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/types.hpp"

namespace carbon {

/// Market settlement at the carbon-adjusted prices. All aggregates here are
/// gauge-invariant: shifting the dual decomposition changes no field.
struct SettlementReport {
  double consumer_payments = 0.0;    // sum load_price * P_d
  double generator_revenues = 0.0;   // sum gen_price * P_g
  double congestion_rent = 0.0;      // sum lambda_p * net withdrawal
  double carbon_revenue = 0.0;       // c_d . E_d
  double surplus = 0.0;              // payments - revenues - rent
  std::vector<double> generator_surplus;  // (gen_price - cost) * P_g
  std::vector<double> consumer_surplus;   // (utility - load_price) * P_d
  bool revenue_adequate = false;     // surplus >= -tol
  bool budget_balanced = false;      // surplus == carbon_revenue within tol
};

SettlementReport settle(const SystemCase& sys, const ClearingSolution& sol,
                        const DualSolution& duals, double tolerance = 1e-6);

struct RationalityReport {
  std::vector<double> generator_surplus;
  std::vector<double> consumer_surplus;
  double min_surplus = 0.0;
  bool guaranteed = false;  // false when some lower bound is positive
  bool pass = false;        // no surplus below -tol
};

/// Individual rationality audit. The guarantee only holds when every agent
/// has a zero lower bound; otherwise the report is informational.
RationalityReport individual_rationality(const SystemCase& sys,
                                         const ClearingSolution& sol,
                                         const DualSolution& duals,
                                         double tolerance = 1e-6);

struct EquivalenceReport {
  double objective_a = 0.0;  // carbon-aware model
  double objective_b = 0.0;  // reduced model (standard or taxed)
  double objective_gap = 0.0;           // relative
  double emissions_a = 0.0;
  double emissions_b = 0.0;
  double gen_cost_a = 0.0;
  double gen_cost_b = 0.0;
  bool objectives_match = false;
  bool totals_match = false;  // emissions and dispatch cost agree; can fail
                              // only when the optimum is non-unique
  bool cross_kkt_pass = false;  // reduced solution certified against the
                                // carbon-aware optimality system
  bool pass = false;            // objectives_match && cross_kkt_pass
};

/// Zero carbon costs reduce the carbon-aware clearing to the standard one:
/// compares the two solves and certifies the standard solution (augmented
/// with a feasible allocation and zero adjustments) against the carbon-aware
/// optimality conditions.
EquivalenceReport equivalence_standard(const SystemCase& sys,
                                       const SolveOptions& opts = {});

/// A uniform carbon cost equals a generator-side tax at the same rate. The
/// taxed solution maps onto carbon-aware duals via lambda_g = -tax * e_g,
/// lambda_d = 0, lambda_e = tax.
EquivalenceReport equivalence_tax(const SystemCase& sys, double tax,
                                  const SolveOptions& opts = {});

}  // namespace carbon
