#include "carbon/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carbon/errors.hpp"
#include "carbon/lp.hpp"

namespace carbon {

namespace {

struct Marginals {
  std::vector<double> supply;
  std::vector<double> demand;
};

// Validates inputs and equalizes the totals by scaling up the smaller side.
// Inputs produced by an LP solve carry residuals of solver-tolerance size, so
// the oracle stays usable on numerically computed dispatches.
Marginals prepare(const std::vector<double>& p_g, const std::vector<double>& p_d,
                  const std::vector<double>& e_g, const std::vector<double>& c_d) {
  if (e_g.size() != p_g.size() || c_d.size() != p_d.size())
    throw DimensionMismatch("emission/carbon-cost vectors do not match marginals");
  Marginals m{p_g, p_d};
  double mag = 1.0;
  for (double v : p_g) mag = std::max(mag, std::abs(v));
  for (double v : p_d) mag = std::max(mag, std::abs(v));
  // Solver output can dip a hair below zero; anything worse is a bad input.
  double negative_tol = -1e-9 * mag;
  for (double& v : m.supply) {
    if (v < negative_tol) throw MarginalMismatch("negative generator marginal");
    if (v < 0.0) v = 0.0;
  }
  for (double& v : m.demand) {
    if (v < negative_tol) throw MarginalMismatch("negative consumer marginal");
    if (v < 0.0) v = 0.0;
  }

  double sg = std::accumulate(m.supply.begin(), m.supply.end(), 0.0);
  double sd = std::accumulate(m.demand.begin(), m.demand.end(), 0.0);
  if (std::abs(sg - sd) > 1e-6 * (1.0 + std::max(sg, sd)))
    throw MarginalMismatch("supply and demand totals disagree: " +
                           std::to_string(sg) + " vs " + std::to_string(sd));
  if (sg != sd) {
    if (sg < sd && sg > 0.0) {
      double f = sd / sg;
      for (double& v : m.supply) v *= f;
    } else if (sd < sg && sd > 0.0) {
      double f = sg / sd;
      for (double& v : m.demand) v *= f;
    }
  }
  return m;
}

}  // namespace

std::vector<double> emissions_of(const AllocationMatrix& pi,
                                 const std::vector<double>& e_g) {
  if (static_cast<int>(e_g.size()) != pi.num_generators)
    throw DimensionMismatch("emission vector does not match allocation rows");
  std::vector<double> e_d(pi.num_consumers, 0.0);
  for (int g = 0; g < pi.num_generators; ++g)
    for (int d = 0; d < pi.num_consumers; ++d) e_d[d] += e_g[g] * pi.at(g, d);
  return e_d;
}

double allocation_cost(const AllocationMatrix& pi, const std::vector<double>& e_g,
                       const std::vector<double>& c_d) {
  auto e_d = emissions_of(pi, e_g);
  if (e_d.size() != c_d.size())
    throw DimensionMismatch("carbon-cost vector does not match allocation columns");
  double cost = 0.0;
  for (size_t d = 0; d < c_d.size(); ++d) cost += c_d[d] * e_d[d];
  return cost;
}

AllocationMatrix allocate_greedy(const std::vector<double>& p_g,
                                 const std::vector<double>& p_d,
                                 const std::vector<double>& e_g,
                                 const std::vector<double>& c_d) {
  Marginals m = prepare(p_g, p_d, e_g, c_d);
  const int ng = static_cast<int>(p_g.size());
  const int nd = static_cast<int>(p_d.size());

  std::vector<int> gens(ng), loads(nd);
  std::iota(gens.begin(), gens.end(), 0);
  std::iota(loads.begin(), loads.end(), 0);
  std::stable_sort(gens.begin(), gens.end(),
                   [&](int a, int b) { return e_g[a] < e_g[b]; });
  std::stable_sort(loads.begin(), loads.end(),
                   [&](int a, int b) { return c_d[a] > c_d[b]; });

  AllocationMatrix out;
  out.num_generators = ng;
  out.num_consumers = nd;
  out.pi.assign(static_cast<size_t>(ng) * nd, 0.0);
  out.row_marginals = m.supply;
  out.col_marginals = m.demand;

  std::vector<double> remaining = m.supply;
  int gi = 0;
  for (int d : loads) {
    double need = m.demand[d];
    while (need > 0.0 && gi < ng) {
      int g = gens[gi];
      double take = std::min(remaining[g], need);
      if (take > 0.0) {
        out.at(g, d) += take;
        remaining[g] -= take;
        need -= take;
      }
      if (remaining[g] <= 0.0) {
        remaining[g] = 0.0;
        ++gi;
      } else {
        break;  // this consumer is done, keep the generator open
      }
    }
  }
  return out;
}

std::pair<AllocationMatrix, AllocationDuals> allocate_lp(
    const std::vector<double>& p_g, const std::vector<double>& p_d,
    const std::vector<double>& e_g, const std::vector<double>& c_d) {
  Marginals m = prepare(p_g, p_d, e_g, c_d);
  const int ng = static_cast<int>(p_g.size());
  const int nd = static_cast<int>(p_d.size());

  // Rows: one per generator (sum over consumers = supply), one per consumer
  // (sum over generators = demand). Maximizing -sum c_d e_g pi matches the
  // sign convention of the clearing problem, so the row duals are directly
  // the lambda_g / lambda_d adjustments.
  lp::Problem prob(ng + nd);
  for (int g = 0; g < ng; ++g)
    for (int d = 0; d < nd; ++d) {
      int v = prob.add_variable(-c_d[d] * e_g[g], 0.0, lp::kInf);
      prob.add_entry(v, g, 1.0);
      prob.add_entry(v, ng + d, 1.0);
    }
  for (int g = 0; g < ng; ++g) prob.set_rhs(g, m.supply[g]);
  for (int d = 0; d < nd; ++d) prob.set_rhs(ng + d, m.demand[d]);

  lp::Solution sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal)
    throw SolveError(SolveFailure::Internal,
                     "transportation solve failed unexpectedly");

  AllocationMatrix out;
  out.num_generators = ng;
  out.num_consumers = nd;
  out.pi.assign(sol.x.begin(), sol.x.end());
  for (double& v : out.pi)
    if (v < 0.0) v = 0.0;
  out.row_marginals = m.supply;
  out.col_marginals = m.demand;

  AllocationDuals duals;
  duals.lambda_g.assign(sol.row_duals.begin(), sol.row_duals.begin() + ng);
  duals.lambda_d.assign(sol.row_duals.begin() + ng, sol.row_duals.end());
  duals.lambda_e = c_d;
  return {std::move(out), std::move(duals)};
}

}  // namespace carbon
