#pragma once

#include <string>
#include <vector>

#include "carbon/allocation.hpp"
#include "carbon/types.hpp"

namespace carbon {

/// How to resolve dual multiplicity when reporting prices.
///
/// DemandMarginal reproduces the convention used for the reference tables:
/// among all optimal duals, pick the vertex that first maximizes the sum of
/// consumer carbon-adjusted prices and then minimizes the sum of generator
/// carbon-adjusted prices. None keeps the duals of the final simplex basis.
/// Either choice is a valid KKT point; all gauge-invariant identities hold
/// for both.
enum class PriceSelection { None, DemandMarginal };

struct SolveOptions {
  double kkt_tolerance = 1e-6;
  int max_iterations = 50000;
  PriceSelection price_selection = PriceSelection::DemandMarginal;
  /// The selection LP grows with |G| x |D|; above this row count it is
  /// skipped and the raw basis duals are kept (recorded in the solution).
  int selection_row_cap = 4000;
  /// Re-solve over the optimal face to pick the dispatch with minimal total
  /// generation, then minimal total emissions. Pins the reported primal when
  /// optima are non-unique.
  bool min_dispatch_tiebreak = true;
};

struct ClearingSolution {
  std::vector<double> p_g;    // MW per generator
  std::vector<double> p_d;    // MW per consumer
  std::vector<double> theta;  // radians per bus
  AllocationMatrix pi;        // empty when the solve had no allocation stage
  std::vector<double> e_d;    // tCO2 per consumer (empty when no allocation)
  bool has_allocation = false;
  double objective = 0.0;
  double utility_total = 0.0;
  double carbon_cost_total = 0.0;
  double gen_cost_total = 0.0;

  double total_load() const;
  double total_generation() const;
  /// Total emissions e_g . p_g; defined for every solve mode.
  double total_emissions(const SystemCase& sys) const;
};

struct DualSolution {
  std::vector<double> lambda_p;     // $/MWh per bus
  std::vector<double> lambda_g;     // $/MWh per generator (carbon adjustment)
  std::vector<double> lambda_d;     // $/MWh per consumer (carbon adjustment)
  std::vector<double> lambda_e;     // $/tCO2 per consumer
  std::vector<double> eta_line_up;  // $/MWh per line
  std::vector<double> eta_line_dn;
  std::vector<double> eta_g_up;
  std::vector<double> eta_g_dn;
  std::vector<double> eta_d_up;
  std::vector<double> eta_d_dn;
  bool price_selection_applied = false;
};

struct ClearingResult {
  ClearingSolution solution;
  DualSolution duals;
};

/// Solves the carbon-aware clearing problem: welfare maximization over
/// dispatch, consumption, angles and the generator-to-consumer allocation.
/// Returns a complementary primal/dual pair; KKT residuals are within the
/// requested tolerance or a SolveError is thrown.
ClearingResult solve_clearing(const SystemCase& sys, const SolveOptions& opts = {});

/// Carbon-agnostic clearing: carbon costs forced to zero and no allocation
/// stage. Duals are plain locational prices with zero carbon adjustments.
ClearingResult solve_standard(const SystemCase& sys, const SolveOptions& opts = {});

/// Standard clearing with generator costs replaced by cost + tax * emission.
/// The reported gen_cost_total keeps the bid cost; the tax payment shows up
/// in carbon_cost_total as tax * total emissions.
ClearingResult solve_with_tax(const SystemCase& sys, double tax,
                              const SolveOptions& opts = {});

struct ObjectiveBreakdown {
  double utility = 0.0;
  double carbon_cost = 0.0;
  double gen_cost = 0.0;
  double objective() const { return utility - carbon_cost - gen_cost; }
};

/// Recomputes the welfare terms from primal values and case data.
ObjectiveBreakdown objective_breakdown(const ClearingSolution& sol,
                                       const SystemCase& sys);

/// Flow on each line, beta * (theta_from - theta_to).
std::vector<double> line_flows(const SystemCase& sys,
                               const std::vector<double>& theta);

}  // namespace carbon
