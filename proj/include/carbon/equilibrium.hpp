#pragma once

#include <string>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/types.hpp"

namespace carbon {

struct ResidualEntry {
  std::string category;
  std::string key;
  double raw = 0.0;         // unnormalized residual
  double scale = 0.0;       // magnitude of the quantities involved
  double normalized = 0.0;  // raw / (1 + scale)
};

/// Full optimality audit of a primal/dual pair: primal feasibility, dual
/// feasibility, stationarity and complementary slackness. Equality residuals
/// are absolute values, inequalities clip at zero, complementarity entries
/// are |multiplier * slack|; each is normalized by the size of its terms.
struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double max_residual = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
  const ResidualEntry* worst() const;
};

ResidualReport kkt_residuals(const SystemCase& sys, const ClearingSolution& sol,
                             const DualSolution& duals, double tolerance = 1e-6);

/// Objective of the dual problem: bound multipliers paid at their box limits
/// plus line multipliers paid at the capacities. Equals the primal objective
/// at any optimal pair (strong duality).
double dual_objective(const SystemCase& sys, const DualSolution& duals);

struct AgentBestResponse {
  std::string id;
  double margin = 0.0;  // per-MW profit at the posted price
  double opt_lo = 0.0;  // optimal action interval under the posted price
  double opt_hi = 0.0;
  double candidate = 0.0;
  double gap = 0.0;  // optimal profit minus candidate profit, >= 0
};

/// Profit-maximizing response of one generator to its carbon-adjusted price:
/// full output when the margin is positive, minimum when negative, the whole
/// box when the margin vanishes.
AgentBestResponse best_response_generator(const Generator& gen, double gen_price,
                                          double candidate, double tolerance = 1e-6);

AgentBestResponse best_response_consumer(const Consumer& con, double load_price,
                                         double candidate, double tolerance = 1e-6);

struct TransmissionCheck {
  double gap = 0.0;  // foregone arbitrage profit on limited lines
  std::vector<std::string> violations;
  bool pass = false;
};

/// Verifies that the angles maximize congestion profit: a price spread across
/// a line requires the flow to sit at the corresponding limit, and spreads
/// across unconstrained lines must vanish.
TransmissionCheck transmission_owner_check(const std::vector<double>& theta,
                                           const std::vector<double>& lambda_p,
                                           const SystemCase& sys,
                                           double tolerance = 1e-6);

/// Nodal imbalance sum_d P_d + net outflow - sum_g P_g at each bus.
std::vector<double> price_setter_residual(const SystemCase& sys,
                                          const ClearingSolution& sol);

struct CarbonManagerCheck {
  double allocation_cost = 0.0;  // carbon cost of the candidate assignment
  double oracle_cost = 0.0;      // optimal cost at the same marginals
  double gap = 0.0;
  double max_complementarity = 0.0;  // worst pair certificate violation
  bool pass = false;
  bool applicable = false;  // false when the solve carried no allocation
};

/// Checks the allocation against the greedy transportation oracle and the
/// pairwise complementarity certificate; the two must agree.
CarbonManagerCheck carbon_manager_check(const ClearingSolution& sol,
                                        const DualSolution& duals,
                                        const SystemCase& sys,
                                        double tolerance = 1e-6);

struct BestResponseReport {
  std::vector<AgentBestResponse> generators;
  std::vector<AgentBestResponse> consumers;
  TransmissionCheck transmission;
  std::vector<double> bus_imbalance;
  CarbonManagerCheck manager;
  double max_gap = 0.0;  // largest normalized best-response gap
  bool pass = false;
};

struct EquilibriumReport {
  ResidualReport residuals;
  BestResponseReport responses;
  bool pass = false;
};

/// Aggregates the residual audit and every per-agent best-response check.
EquilibriumReport verify_equilibrium(const SystemCase& sys,
                                     const ClearingSolution& sol,
                                     const DualSolution& duals,
                                     double tolerance = 1e-6);

}  // namespace carbon
