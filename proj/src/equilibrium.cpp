#include "carbon/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carbon/allocation.hpp"
#include "carbon/errors.hpp"
#include "carbon/lp.hpp"
#include "carbon/validate.hpp"

namespace carbon {

const ResidualEntry* ResidualReport::worst() const {
  const ResidualEntry* w = nullptr;
  for (const auto& e : entries)
    if (!w || e.normalized > w->normalized) w = &e;
  return w;
}

namespace {

struct Collector {
  ResidualReport* rep;
  void equality(const std::string& cat, const std::string& key, double value,
                double scale) {
    push(cat, key, std::abs(value), scale);
  }
  void violation(const std::string& cat, const std::string& key, double amount,
                 double scale) {
    push(cat, key, std::max(0.0, amount), scale);
  }
  void complementarity(const std::string& cat, const std::string& key,
                       double multiplier, double slack) {
    push(cat, key, std::abs(multiplier * slack),
         std::abs(multiplier) + std::abs(slack));
  }
  void push(const std::string& cat, const std::string& key, double raw,
            double scale) {
    double normalized = raw / (1.0 + scale);
    rep->entries.push_back({cat, key, raw, scale, normalized});
    rep->max_residual = std::max(rep->max_residual, normalized);
  }
};

}  // namespace

ResidualReport kkt_residuals(const SystemCase& sys, const ClearingSolution& sol,
                             const DualSolution& duals, double tolerance) {
  const int nb = static_cast<int>(sys.buses.size());
  const int ng = static_cast<int>(sys.generators.size());
  const int nd = static_cast<int>(sys.consumers.size());
  const int nl = static_cast<int>(sys.lines.size());
  if (static_cast<int>(sol.p_g.size()) != ng ||
      static_cast<int>(sol.p_d.size()) != nd ||
      static_cast<int>(sol.theta.size()) != nb ||
      static_cast<int>(duals.lambda_p.size()) != nb)
    throw DimensionMismatch("solution or duals do not match case dimensions");
  if (sol.has_allocation &&
      (sol.pi.num_generators != ng || sol.pi.num_consumers != nd ||
       static_cast<int>(sol.e_d.size()) != nd))
    throw DimensionMismatch("allocation does not match case dimensions");

  CaseIndex idx(sys);
  ResidualReport rep;
  rep.tolerance = tolerance;
  Collector c{&rep};
  auto flows = line_flows(sys, sol.theta);

  // Primal feasibility: nodal balance, line limits, box bounds, reference
  // angle, allocation marginals.
  {
    std::vector<double> imbalance(nb, 0.0), scale(nb, 0.0);
    for (int d = 0; d < nd; ++d) {
      imbalance[idx.load_bus[d]] += sol.p_d[d];
      scale[idx.load_bus[d]] += std::abs(sol.p_d[d]);
    }
    for (int g = 0; g < ng; ++g) {
      imbalance[idx.gen_bus[g]] -= sol.p_g[g];
      scale[idx.gen_bus[g]] += std::abs(sol.p_g[g]);
    }
    for (int l = 0; l < nl; ++l) {
      auto [a, b] = idx.line_ends[l];
      imbalance[a] += flows[l];
      imbalance[b] -= flows[l];
      scale[a] += std::abs(flows[l]);
      scale[b] += std::abs(flows[l]);
    }
    for (int i = 0; i < nb; ++i)
      c.equality("balance", sys.buses[i].id, imbalance[i], scale[i]);
  }
  for (int l = 0; l < nl; ++l) {
    if (!sys.lines[l].limit) continue;
    double cap = *sys.lines[l].limit;
    std::string key = sys.lines[l].from_bus + "-" + sys.lines[l].to_bus;
    c.violation("line_limit_up", key, flows[l] - cap, cap);
    c.violation("line_limit_dn", key, -flows[l] - cap, cap);
  }
  for (int g = 0; g < ng; ++g) {
    const auto& gen = sys.generators[g];
    double s = std::abs(gen.p_min) + std::abs(gen.p_max);
    c.violation("gen_upper", gen.id, sol.p_g[g] - gen.p_max, s);
    c.violation("gen_lower", gen.id, gen.p_min - sol.p_g[g], s);
  }
  for (int d = 0; d < nd; ++d) {
    const auto& con = sys.consumers[d];
    double s = std::abs(con.p_min) + std::abs(con.p_max);
    c.violation("load_upper", con.id, sol.p_d[d] - con.p_max, s);
    c.violation("load_lower", con.id, con.p_min - sol.p_d[d], s);
  }
  if (idx.reference >= 0)
    c.equality("reference_angle", sys.buses[idx.reference].id,
               sol.theta[idx.reference], 0.0);

  if (sol.has_allocation) {
    for (int g = 0; g < ng; ++g) {
      double sum = 0.0;
      for (int d = 0; d < nd; ++d) {
        double v = sol.pi.at(g, d);
        c.violation("pi_nonneg", sys.generators[g].id + "/" + sys.consumers[d].id,
                    -v, std::abs(v));
        sum += v;
      }
      c.equality("pi_row_sum", sys.generators[g].id, sum - sol.p_g[g],
                 sum + std::abs(sol.p_g[g]));
    }
    for (int d = 0; d < nd; ++d) {
      double sum = 0.0, esum = 0.0;
      for (int g = 0; g < ng; ++g) {
        sum += sol.pi.at(g, d);
        esum += sys.generators[g].emission * sol.pi.at(g, d);
      }
      c.equality("pi_col_sum", sys.consumers[d].id, sum - sol.p_d[d],
                 sum + std::abs(sol.p_d[d]));
      c.equality("emission_def", sys.consumers[d].id, esum - sol.e_d[d],
                 esum + std::abs(sol.e_d[d]));
    }
  }

  // Dual feasibility: multiplier signs and pair constraints.
  for (int l = 0; l < nl; ++l) {
    std::string key = sys.lines[l].from_bus + "-" + sys.lines[l].to_bus;
    c.violation("eta_sign", key + ":up", -duals.eta_line_up[l], 0.0);
    c.violation("eta_sign", key + ":dn", -duals.eta_line_dn[l], 0.0);
  }
  for (int g = 0; g < ng; ++g) {
    c.violation("eta_sign", sys.generators[g].id + ":up", -duals.eta_g_up[g], 0.0);
    c.violation("eta_sign", sys.generators[g].id + ":dn", -duals.eta_g_dn[g], 0.0);
  }
  for (int d = 0; d < nd; ++d) {
    c.violation("eta_sign", sys.consumers[d].id + ":up", -duals.eta_d_up[d], 0.0);
    c.violation("eta_sign", sys.consumers[d].id + ":dn", -duals.eta_d_dn[d], 0.0);
  }

  // Stationarity.
  for (int g = 0; g < ng; ++g) {
    const auto& gen = sys.generators[g];
    double r = -gen.cost + duals.lambda_p[idx.gen_bus[g]] + duals.lambda_g[g] -
               duals.eta_g_up[g] + duals.eta_g_dn[g];
    double s = std::abs(gen.cost) + std::abs(duals.lambda_p[idx.gen_bus[g]]) +
               std::abs(duals.lambda_g[g]) + duals.eta_g_up[g] + duals.eta_g_dn[g];
    c.equality("stationarity_pg", gen.id, r, s);
  }
  for (int d = 0; d < nd; ++d) {
    const auto& con = sys.consumers[d];
    double r = con.utility - duals.lambda_p[idx.load_bus[d]] + duals.lambda_d[d] -
               duals.eta_d_up[d] + duals.eta_d_dn[d];
    double s = std::abs(con.utility) + std::abs(duals.lambda_p[idx.load_bus[d]]) +
               std::abs(duals.lambda_d[d]) + duals.eta_d_up[d] + duals.eta_d_dn[d];
    c.equality("stationarity_pd", con.id, r, s);
  }
  {
    std::vector<double> r(nb, 0.0), s(nb, 0.0);
    for (int l = 0; l < nl; ++l) {
      auto [a, b] = idx.line_ends[l];
      double beta = sys.lines[l].susceptance;
      double term = duals.lambda_p[b] - duals.lambda_p[a] - duals.eta_line_up[l] +
                    duals.eta_line_dn[l];
      r[a] += beta * term;
      r[b] -= beta * term;
      s[a] += std::abs(beta * term);
      s[b] += std::abs(beta * term);
      double mag = std::abs(beta) * (std::abs(duals.lambda_p[a]) +
                                     std::abs(duals.lambda_p[b]) +
                                     duals.eta_line_up[l] + duals.eta_line_dn[l]);
      s[a] += mag;
      s[b] += mag;
    }
    for (int i = 0; i < nb; ++i) {
      if (i == idx.reference) continue;
      c.equality("stationarity_theta", sys.buses[i].id, r[i], s[i]);
    }
  }
  if (sol.has_allocation) {
    for (int d = 0; d < nd; ++d)
      c.equality("stationarity_ed", sys.consumers[d].id,
                 duals.lambda_e[d] - sys.consumers[d].carbon_cost,
                 std::abs(sys.consumers[d].carbon_cost));
    for (int g = 0; g < ng; ++g)
      for (int d = 0; d < nd; ++d) {
        double sum = duals.lambda_g[g] + duals.lambda_d[d] +
                     duals.lambda_e[d] * sys.generators[g].emission;
        double s = std::abs(duals.lambda_g[g]) + std::abs(duals.lambda_d[d]) +
                   std::abs(duals.lambda_e[d] * sys.generators[g].emission);
        c.violation("pair_feasibility",
                    sys.generators[g].id + "/" + sys.consumers[d].id, -sum, s);
        c.complementarity("cs_pi",
                          sys.generators[g].id + "/" + sys.consumers[d].id,
                          sol.pi.at(g, d), sum);
      }
  }

  // Complementary slackness for the bound multipliers.
  for (int l = 0; l < nl; ++l) {
    if (!sys.lines[l].limit) continue;
    double cap = *sys.lines[l].limit;
    std::string key = sys.lines[l].from_bus + "-" + sys.lines[l].to_bus;
    c.complementarity("cs_line_up", key, duals.eta_line_up[l], cap - flows[l]);
    c.complementarity("cs_line_dn", key, duals.eta_line_dn[l], cap + flows[l]);
  }
  for (int g = 0; g < ng; ++g) {
    const auto& gen = sys.generators[g];
    c.complementarity("cs_gen_up", gen.id, duals.eta_g_up[g], gen.p_max - sol.p_g[g]);
    c.complementarity("cs_gen_dn", gen.id, duals.eta_g_dn[g], sol.p_g[g] - gen.p_min);
  }
  for (int d = 0; d < nd; ++d) {
    const auto& con = sys.consumers[d];
    c.complementarity("cs_load_up", con.id, duals.eta_d_up[d], con.p_max - sol.p_d[d]);
    c.complementarity("cs_load_dn", con.id, duals.eta_d_dn[d], sol.p_d[d] - con.p_min);
  }

  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

double dual_objective(const SystemCase& sys, const DualSolution& duals) {
  double obj = 0.0;
  for (size_t g = 0; g < sys.generators.size(); ++g)
    obj += duals.eta_g_up[g] * sys.generators[g].p_max -
           duals.eta_g_dn[g] * sys.generators[g].p_min;
  for (size_t d = 0; d < sys.consumers.size(); ++d)
    obj += duals.eta_d_up[d] * sys.consumers[d].p_max -
           duals.eta_d_dn[d] * sys.consumers[d].p_min;
  for (size_t l = 0; l < sys.lines.size(); ++l)
    if (sys.lines[l].limit)
      obj += (duals.eta_line_up[l] + duals.eta_line_dn[l]) * *sys.lines[l].limit;
  return obj;
}

AgentBestResponse best_response_generator(const Generator& gen, double gen_price,
                                          double candidate, double tolerance) {
  AgentBestResponse r;
  r.id = gen.id;
  r.margin = gen_price - gen.cost;
  r.candidate = candidate;
  if (std::abs(r.margin) <= tolerance * (1.0 + std::abs(gen_price))) {
    r.opt_lo = gen.p_min;
    r.opt_hi = gen.p_max;
  } else if (r.margin > 0.0) {
    r.opt_lo = r.opt_hi = gen.p_max;
  } else {
    r.opt_lo = r.opt_hi = gen.p_min;
  }
  double best = std::max(r.margin * gen.p_min, r.margin * gen.p_max);
  r.gap = best - r.margin * candidate;
  return r;
}

AgentBestResponse best_response_consumer(const Consumer& con, double load_price,
                                         double candidate, double tolerance) {
  AgentBestResponse r;
  r.id = con.id;
  r.margin = con.utility - load_price;
  r.candidate = candidate;
  if (std::abs(r.margin) <= tolerance * (1.0 + std::abs(load_price))) {
    r.opt_lo = con.p_min;
    r.opt_hi = con.p_max;
  } else if (r.margin > 0.0) {
    r.opt_lo = r.opt_hi = con.p_max;
  } else {
    r.opt_lo = r.opt_hi = con.p_min;
  }
  double best = std::max(r.margin * con.p_min, r.margin * con.p_max);
  r.gap = best - r.margin * candidate;
  return r;
}

TransmissionCheck transmission_owner_check(const std::vector<double>& theta,
                                           const std::vector<double>& lambda_p,
                                           const SystemCase& sys,
                                           double tolerance) {
  TransmissionCheck out;
  CaseIndex idx(sys);
  auto flows = line_flows(sys, theta);
  const int nb = static_cast<int>(sys.buses.size());
  const int nl = static_cast<int>(sys.lines.size());

  // Profit of the candidate angles, and the owner's actual optimum. Flows
  // are coupled through the angles, so the achievable profit is an LP over
  // angle deviations, not a per-line bound: a spread over one line can be
  // unexploitable because every rebalancing moves other priced lines too.
  double actual = 0.0;
  for (int l = 0; l < nl; ++l) {
    auto [a, b] = idx.line_ends[l];
    actual += (lambda_p[b] - lambda_p[a]) * flows[l];
  }

  std::vector<int> limited;
  for (int l = 0; l < nl; ++l)
    if (sys.lines[l].limit) limited.push_back(l);
  lp::Problem owner(static_cast<int>(limited.size()));
  std::vector<double> obj(nb, 0.0);
  for (int l = 0; l < nl; ++l) {
    auto [a, b] = idx.line_ends[l];
    double weight = sys.lines[l].susceptance * (lambda_p[b] - lambda_p[a]);
    obj[a] += weight;
    obj[b] -= weight;
  }
  std::vector<int> theta_var(nb);
  for (int i = 0; i < nb; ++i) {
    double lo = i == idx.reference ? 0.0 : -lp::kInf;
    double hi = i == idx.reference ? 0.0 : lp::kInf;
    theta_var[i] = owner.add_variable(obj[i], lo, hi);
  }
  for (size_t k = 0; k < limited.size(); ++k) {
    int l = limited[k];
    auto [a, b] = idx.line_ends[l];
    double beta = sys.lines[l].susceptance;
    double cap = *sys.lines[l].limit;
    owner.add_entry(theta_var[a], static_cast<int>(k), beta);
    owner.add_entry(theta_var[b], static_cast<int>(k), -beta);
    int s = owner.add_variable(0.0, 0.0, 2.0 * cap);
    owner.add_entry(s, static_cast<int>(k), 1.0);
    owner.set_rhs(static_cast<int>(k), cap);
  }
  lp::Solution best = lp::solve(owner);
  if (best.status == lp::Status::Unbounded) {
    out.violations.push_back(
        "price spreads admit unbounded arbitrage over unconstrained lines");
    out.gap = std::numeric_limits<double>::infinity();
    out.pass = false;
    return out;
  }
  if (best.status != lp::Status::Optimal) {
    out.violations.push_back("owner subproblem did not solve");
    out.pass = false;
    return out;
  }
  out.gap = best.objective - actual;
  out.pass = out.gap <= tolerance * (1.0 + std::abs(best.objective));
  return out;
}

std::vector<double> price_setter_residual(const SystemCase& sys,
                                          const ClearingSolution& sol) {
  CaseIndex idx(sys);
  std::vector<double> imbalance(sys.buses.size(), 0.0);
  for (size_t d = 0; d < sys.consumers.size(); ++d)
    imbalance[idx.load_bus[d]] += sol.p_d[d];
  for (size_t g = 0; g < sys.generators.size(); ++g)
    imbalance[idx.gen_bus[g]] -= sol.p_g[g];
  auto flows = line_flows(sys, sol.theta);
  for (size_t l = 0; l < sys.lines.size(); ++l) {
    auto [a, b] = idx.line_ends[l];
    imbalance[a] += flows[l];
    imbalance[b] -= flows[l];
  }
  return imbalance;
}

CarbonManagerCheck carbon_manager_check(const ClearingSolution& sol,
                                        const DualSolution& duals,
                                        const SystemCase& sys,
                                        double tolerance) {
  CarbonManagerCheck out;
  if (!sol.has_allocation) return out;
  out.applicable = true;

  std::vector<double> e_g(sys.generators.size()), c_d(sys.consumers.size());
  for (size_t g = 0; g < e_g.size(); ++g) e_g[g] = sys.generators[g].emission;
  for (size_t d = 0; d < c_d.size(); ++d) c_d[d] = sys.consumers[d].carbon_cost;

  out.allocation_cost = allocation_cost(sol.pi, e_g, c_d);
  AllocationMatrix oracle = allocate_greedy(sol.p_g, sol.p_d, e_g, c_d);
  out.oracle_cost = allocation_cost(oracle, e_g, c_d);
  out.gap = out.allocation_cost - out.oracle_cost;

  double scale = 1.0;
  for (double v : sol.p_g) scale = std::max(scale, std::abs(v));
  double pi_tol = tolerance * scale;
  for (int g = 0; g < sol.pi.num_generators; ++g)
    for (int d = 0; d < sol.pi.num_consumers; ++d) {
      if (sol.pi.at(g, d) <= pi_tol) continue;
      double sum = duals.lambda_g[g] + duals.lambda_d[d] + c_d[d] * e_g[g];
      out.max_complementarity = std::max(
          out.max_complementarity,
          std::abs(sum) / (1.0 + std::abs(duals.lambda_g[g]) +
                           std::abs(duals.lambda_d[d]) + std::abs(c_d[d] * e_g[g])));
    }
  out.pass = out.gap <= tolerance * (1.0 + std::abs(out.oracle_cost)) &&
             out.max_complementarity <= tolerance;
  return out;
}

EquilibriumReport verify_equilibrium(const SystemCase& sys,
                                     const ClearingSolution& sol,
                                     const DualSolution& duals,
                                     double tolerance) {
  EquilibriumReport rep;
  rep.residuals = kkt_residuals(sys, sol, duals, tolerance);

  CaseIndex idx(sys);
  BestResponseReport& br = rep.responses;
  auto gap_scale = [](const AgentBestResponse& r) {
    return 1.0 + std::abs(r.margin) * (std::abs(r.opt_hi) + std::abs(r.candidate));
  };
  for (size_t g = 0; g < sys.generators.size(); ++g) {
    double price = duals.lambda_p[idx.gen_bus[g]] + duals.lambda_g[g];
    auto r = best_response_generator(sys.generators[g], price, sol.p_g[g], tolerance);
    br.max_gap = std::max(br.max_gap, r.gap / gap_scale(r));
    br.generators.push_back(std::move(r));
  }
  for (size_t d = 0; d < sys.consumers.size(); ++d) {
    double price = duals.lambda_p[idx.load_bus[d]] - duals.lambda_d[d];
    auto r = best_response_consumer(sys.consumers[d], price, sol.p_d[d], tolerance);
    br.max_gap = std::max(br.max_gap, r.gap / gap_scale(r));
    br.consumers.push_back(std::move(r));
  }
  br.transmission = transmission_owner_check(sol.theta, duals.lambda_p, sys, tolerance);
  br.bus_imbalance = price_setter_residual(sys, sol);
  double imb = 0.0;
  for (size_t i = 0; i < br.bus_imbalance.size(); ++i)
    imb = std::max(imb, std::abs(br.bus_imbalance[i]) / (1.0 + sol.total_load()));
  try {
    br.manager = carbon_manager_check(sol, duals, sys, tolerance);
  } catch (const MarginalMismatch&) {
    // Stored solutions can carry dispatch/allocation mismatches; that is a
    // verification failure, not an input error.
    br.manager.applicable = true;
    br.manager.pass = false;
  }

  br.pass = br.max_gap <= tolerance && br.transmission.pass && imb <= tolerance &&
            (!br.manager.applicable || br.manager.pass);
  rep.pass = rep.residuals.pass && br.pass;
  return rep;
}

}  // namespace carbon
