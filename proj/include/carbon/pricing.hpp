#pragma once

#include <string>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/types.hpp"

namespace carbon {

/// Carbon-adjusted prices: lambda_p + lambda_g for generators and
/// lambda_p - lambda_d for consumers. The per-agent prices are invariant
/// under the one-scalar gauge shift of the underlying duals; the normalized
/// decomposition pins that scalar so the cleanest marginal generator class
/// carries a zero adjustment.
struct PriceReport {
  std::vector<double> gen_price;             // $/MWh per generator
  std::vector<double> load_price;            // $/MWh per consumer
  std::vector<double> lambda_p_normalized;   // per bus
  std::vector<double> lambda_g_normalized;   // per generator, max = 0
  std::vector<double> lambda_d_normalized;   // per consumer
  double congestion_rent = 0.0;              // $ (0 when no primal is given)
  double carbon_revenue = 0.0;               // $ c_d . E_d
};

PriceReport carbon_adjusted_prices(const DualSolution& duals, const SystemCase& sys);

/// Overload that also fills congestion rent and carbon revenue from the
/// primal solution.
PriceReport carbon_adjusted_prices(const DualSolution& duals, const SystemCase& sys,
                                   const ClearingSolution& sol);

/// Shifts (lambda_p, lambda_g, lambda_d) along the gauge direction so that
/// max_g lambda_g = 0. Idempotent; leaves lambda_e and all eta multipliers
/// untouched. Throws EmptyGeneratorSet when the case has no generators.
DualSolution normalize_gauge(const DualSolution& duals);

struct OrderingViolation {
  std::string first_id;
  std::string second_id;
  bool generator_side = false;
  double key_first = 0.0;   // emission factor or carbon cost
  double key_second = 0.0;
  double adj_first = 0.0;   // carbon adjustments in sorted order
  double adj_second = 0.0;
};

struct OrderingReport {
  std::vector<OrderingViolation> violations;
  bool pass = false;
};

/// Checks the monotone coupling between adjustments and submitted data:
/// sorting generators by emission factor ascending must yield non-increasing
/// adjustments, and sorting consumers by carbon cost descending must yield
/// non-decreasing adjustments.
OrderingReport check_ordering(const PriceReport& prices, const SystemCase& sys,
                              double tolerance = 1e-6);

struct AdjustmentGap {
  bool generator_side = false;
  std::string first_id;
  std::string second_id;
  std::string partner_id;  // shared counterparty with positive assignment
  double expected = 0.0;   // difference implied by the shared partner
  double actual = 0.0;
  double residual = 0.0;   // |actual - expected| normalized
};

/// For every pair of generators sharing a consumer with positive allocation,
/// the adjustment difference equals c_partner * (e_first - e_second); for
/// consumer pairs sharing a generator it equals e_partner * (c_first -
/// c_second). Returns one check per pair and partner.
std::vector<AdjustmentGap> adjustment_gaps(const ClearingSolution& sol,
                                           const DualSolution& duals,
                                           const SystemCase& sys,
                                           double support_tol = 1e-6);

}  // namespace carbon
