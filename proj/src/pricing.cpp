#include "carbon/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carbon/errors.hpp"
#include "carbon/validate.hpp"

namespace carbon {

namespace {

PriceReport prices_impl(const DualSolution& duals, const SystemCase& sys) {
  CaseIndex idx(sys);
  PriceReport rep;
  rep.gen_price.resize(sys.generators.size());
  rep.load_price.resize(sys.consumers.size());
  for (size_t g = 0; g < sys.generators.size(); ++g)
    rep.gen_price[g] = duals.lambda_p[idx.gen_bus[g]] + duals.lambda_g[g];
  for (size_t d = 0; d < sys.consumers.size(); ++d)
    rep.load_price[d] = duals.lambda_p[idx.load_bus[d]] - duals.lambda_d[d];

  if (!sys.generators.empty()) {
    DualSolution norm = normalize_gauge(duals);
    rep.lambda_p_normalized = std::move(norm.lambda_p);
    rep.lambda_g_normalized = std::move(norm.lambda_g);
    rep.lambda_d_normalized = std::move(norm.lambda_d);
  } else {
    rep.lambda_p_normalized = duals.lambda_p;
    rep.lambda_g_normalized = duals.lambda_g;
    rep.lambda_d_normalized = duals.lambda_d;
  }
  return rep;
}

}  // namespace

PriceReport carbon_adjusted_prices(const DualSolution& duals,
                                   const SystemCase& sys) {
  return prices_impl(duals, sys);
}

PriceReport carbon_adjusted_prices(const DualSolution& duals,
                                   const SystemCase& sys,
                                   const ClearingSolution& sol) {
  PriceReport rep = prices_impl(duals, sys);
  CaseIndex idx(sys);
  double rent = 0.0;
  for (size_t d = 0; d < sys.consumers.size(); ++d)
    rent += duals.lambda_p[idx.load_bus[d]] * sol.p_d[d];
  for (size_t g = 0; g < sys.generators.size(); ++g)
    rent -= duals.lambda_p[idx.gen_bus[g]] * sol.p_g[g];
  rep.congestion_rent = rent;
  if (sol.has_allocation)
    for (size_t d = 0; d < sol.e_d.size(); ++d)
      rep.carbon_revenue += sys.consumers[d].carbon_cost * sol.e_d[d];
  return rep;
}

DualSolution normalize_gauge(const DualSolution& duals) {
  if (duals.lambda_g.empty())
    throw EmptyGeneratorSet("gauge normalization needs at least one generator");
  double shift = *std::max_element(duals.lambda_g.begin(), duals.lambda_g.end());
  DualSolution out = duals;
  for (double& v : out.lambda_p) v += shift;
  for (double& v : out.lambda_g) v -= shift;
  for (double& v : out.lambda_d) v += shift;
  return out;
}

OrderingReport check_ordering(const PriceReport& prices, const SystemCase& sys,
                              double tolerance) {
  OrderingReport rep;
  double scale = 1.0;
  for (double v : prices.lambda_g_normalized) scale = std::max(scale, std::abs(v));
  for (double v : prices.lambda_d_normalized) scale = std::max(scale, std::abs(v));
  double tol = tolerance * scale;

  std::vector<int> gens(sys.generators.size());
  std::iota(gens.begin(), gens.end(), 0);
  std::stable_sort(gens.begin(), gens.end(), [&](int a, int b) {
    return sys.generators[a].emission < sys.generators[b].emission;
  });
  for (size_t k = 1; k < gens.size(); ++k) {
    int a = gens[k - 1], b = gens[k];
    double prev = prices.lambda_g_normalized[a];
    double next = prices.lambda_g_normalized[b];
    if (next > prev + tol)
      rep.violations.push_back({sys.generators[a].id, sys.generators[b].id, true,
                                sys.generators[a].emission,
                                sys.generators[b].emission, prev, next});
  }

  std::vector<int> loads(sys.consumers.size());
  std::iota(loads.begin(), loads.end(), 0);
  std::stable_sort(loads.begin(), loads.end(), [&](int a, int b) {
    return sys.consumers[a].carbon_cost > sys.consumers[b].carbon_cost;
  });
  for (size_t k = 1; k < loads.size(); ++k) {
    int a = loads[k - 1], b = loads[k];
    double prev = prices.lambda_d_normalized[a];
    double next = prices.lambda_d_normalized[b];
    if (next < prev - tol)
      rep.violations.push_back({sys.consumers[a].id, sys.consumers[b].id, false,
                                sys.consumers[a].carbon_cost,
                                sys.consumers[b].carbon_cost, prev, next});
  }
  rep.pass = rep.violations.empty();
  return rep;
}

std::vector<AdjustmentGap> adjustment_gaps(const ClearingSolution& sol,
                                           const DualSolution& duals,
                                           const SystemCase& sys,
                                           double support_tol) {
  std::vector<AdjustmentGap> out;
  if (!sol.has_allocation) return out;
  const int ng = sol.pi.num_generators;
  const int nd = sol.pi.num_consumers;

  // Generator pairs sharing a consumer with positive allocation.
  for (int d = 0; d < nd; ++d) {
    std::vector<int> served;
    for (int g = 0; g < ng; ++g)
      if (sol.pi.at(g, d) > support_tol) served.push_back(g);
    double cd = sys.consumers[d].carbon_cost;
    for (size_t i = 0; i < served.size(); ++i)
      for (size_t j = i + 1; j < served.size(); ++j) {
        int g1 = served[i], g2 = served[j];
        AdjustmentGap gap;
        gap.generator_side = true;
        gap.first_id = sys.generators[g1].id;
        gap.second_id = sys.generators[g2].id;
        gap.partner_id = sys.consumers[d].id;
        gap.expected = cd * (sys.generators[g1].emission - sys.generators[g2].emission);
        gap.actual = duals.lambda_g[g2] - duals.lambda_g[g1];
        gap.residual = std::abs(gap.actual - gap.expected) /
                       (1.0 + std::abs(gap.expected) + std::abs(gap.actual));
        out.push_back(std::move(gap));
      }
  }

  // Consumer pairs sharing a generator with positive allocation.
  for (int g = 0; g < ng; ++g) {
    std::vector<int> fed;
    for (int d = 0; d < nd; ++d)
      if (sol.pi.at(g, d) > support_tol) fed.push_back(d);
    double eg = sys.generators[g].emission;
    for (size_t i = 0; i < fed.size(); ++i)
      for (size_t j = i + 1; j < fed.size(); ++j) {
        int d1 = fed[i], d2 = fed[j];
        AdjustmentGap gap;
        gap.generator_side = false;
        gap.first_id = sys.consumers[d1].id;
        gap.second_id = sys.consumers[d2].id;
        gap.partner_id = sys.generators[g].id;
        gap.expected = eg * (sys.consumers[d1].carbon_cost - sys.consumers[d2].carbon_cost);
        gap.actual = duals.lambda_d[d2] - duals.lambda_d[d1];
        gap.residual = std::abs(gap.actual - gap.expected) /
                       (1.0 + std::abs(gap.expected) + std::abs(gap.actual));
        out.push_back(std::move(gap));
      }
  }
  return out;
}

}  // namespace carbon
