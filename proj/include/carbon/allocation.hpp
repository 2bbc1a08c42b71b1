#pragma once

#include <vector>

namespace carbon {

/// Generator-to-consumer power assignment. Row sums reproduce the generator
/// dispatch and column sums the consumption, within numerical tolerance.
struct AllocationMatrix {
  int num_generators = 0;
  int num_consumers = 0;
  std::vector<double> pi;  // row-major [g * num_consumers + d], MW
  std::vector<double> row_marginals;
  std::vector<double> col_marginals;

  double at(int g, int d) const { return pi[static_cast<size_t>(g) * num_consumers + d]; }
  double& at(int g, int d) { return pi[static_cast<size_t>(g) * num_consumers + d]; }
  bool empty() const { return pi.empty(); }
};

/// Transportation duals of the allocation problem. For every pair
/// lambda_g + lambda_d + c_d * e_g >= 0, with equality whenever the pair
/// carries a positive assignment.
struct AllocationDuals {
  std::vector<double> lambda_g;
  std::vector<double> lambda_d;
  std::vector<double> lambda_e;  // equals the consumer carbon costs
};

/// Minimum-carbon-cost allocation solved as a transportation LP.
/// Requires matching totals: |sum(p_g) - sum(p_d)| <= 1e-6 * (1 + sum(p_g));
/// smaller mismatches are absorbed by proportionally rescaling the side with
/// the smaller total.
std::pair<AllocationMatrix, AllocationDuals> allocate_lp(
    const std::vector<double>& p_g, const std::vector<double>& p_d,
    const std::vector<double>& e_g, const std::vector<double>& c_d);

/// Combinatorial oracle: consumers sorted by carbon cost descending and
/// generators by emission factor ascending (ties by original index), then
/// northwest-corner filling. The sorted cost matrix c_d * e_g satisfies the
/// Monge condition, so the greedy fill is optimal for the same problem.
AllocationMatrix allocate_greedy(const std::vector<double>& p_g,
                                 const std::vector<double>& p_d,
                                 const std::vector<double>& e_g,
                                 const std::vector<double>& c_d);

/// Per-consumer emissions E_d = sum_g e_g * pi(g, d).
std::vector<double> emissions_of(const AllocationMatrix& pi,
                                 const std::vector<double>& e_g);

/// Carbon cost c_d . E_d of an allocation.
double allocation_cost(const AllocationMatrix& pi,
                       const std::vector<double>& e_g,
                       const std::vector<double>& c_d);

}  // namespace carbon
