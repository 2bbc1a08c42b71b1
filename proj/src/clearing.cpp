#include "carbon/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "carbon/equilibrium.hpp"
#include "carbon/errors.hpp"
#include "carbon/lp.hpp"
#include "carbon/validate.hpp"
#include "dual_select.hpp"

namespace carbon {

double ClearingSolution::total_load() const {
  return std::accumulate(p_d.begin(), p_d.end(), 0.0);
}

double ClearingSolution::total_generation() const {
  return std::accumulate(p_g.begin(), p_g.end(), 0.0);
}

double ClearingSolution::total_emissions(const SystemCase& sys) const {
  if (sys.generators.size() != p_g.size())
    throw DimensionMismatch("dispatch does not match generator count");
  double e = 0.0;
  for (size_t g = 0; g < p_g.size(); ++g) e += sys.generators[g].emission * p_g[g];
  return e;
}

std::vector<double> line_flows(const SystemCase& sys,
                               const std::vector<double>& theta) {
  CaseIndex idx(sys);
  std::vector<double> f(sys.lines.size());
  for (size_t l = 0; l < sys.lines.size(); ++l) {
    auto [a, b] = idx.line_ends[l];
    f[l] = sys.lines[l].susceptance * (theta[a] - theta[b]);
  }
  return f;
}

ObjectiveBreakdown objective_breakdown(const ClearingSolution& sol,
                                       const SystemCase& sys) {
  if (sol.p_g.size() != sys.generators.size() ||
      sol.p_d.size() != sys.consumers.size())
    throw DimensionMismatch("solution does not match case dimensions");
  if (sol.has_allocation && sol.e_d.size() != sys.consumers.size())
    throw DimensionMismatch("emission vector does not match consumer count");
  ObjectiveBreakdown out;
  for (size_t d = 0; d < sol.p_d.size(); ++d)
    out.utility += sys.consumers[d].utility * sol.p_d[d];
  if (sol.has_allocation)
    for (size_t d = 0; d < sol.e_d.size(); ++d)
      out.carbon_cost += sys.consumers[d].carbon_cost * sol.e_d[d];
  for (size_t g = 0; g < sol.p_g.size(); ++g)
    out.gen_cost += sys.generators[g].cost * sol.p_g[g];
  return out;
}

namespace {

enum class Mode { Carbon, Standard, Tax };

// Lexicographic stages used to pin a deterministic optimum: the welfare
// solve first, then minimal total generation over the welfare-optimal face,
// then minimal total emissions over what remains. The later stages only
// matter when the clearing problem has multiple optima.
struct StageSpec {
  enum Kind { Welfare, MinDispatch, MinEmissions } kind = Welfare;
  double welfare = 0.0;   // pinned welfare value (stages 2 and 3)
  double dispatch = 0.0;  // pinned total generation (stage 3)
};

struct Layout {
  int nb = 0, ng = 0, nd = 0;
  std::vector<int> limited;  // indices of lines with a finite limit
  bool with_allocation = false;
  StageSpec::Kind kind = StageSpec::Welfare;
  int v_pg = 0, v_pd = 0, v_theta = 0, v_pi = -1, v_ed = -1, v_slack = 0;
  int r_bal = 0, r_gen = -1, r_load = -1, r_em = -1, r_line = 0, r_fix = -1,
      r_fix2 = -1;
  int n_rows = 0;
};

Layout make_layout(const SystemCase& sys, bool with_allocation,
                   StageSpec::Kind kind) {
  Layout L;
  L.nb = static_cast<int>(sys.buses.size());
  L.ng = static_cast<int>(sys.generators.size());
  L.nd = static_cast<int>(sys.consumers.size());
  for (int l = 0; l < static_cast<int>(sys.lines.size()); ++l)
    if (sys.lines[l].limit) L.limited.push_back(l);
  L.with_allocation = with_allocation;
  L.kind = kind;

  L.v_pg = 0;
  L.v_pd = L.ng;
  L.v_theta = L.ng + L.nd;
  int v = L.v_theta + L.nb;
  if (with_allocation) {
    L.v_pi = v;
    v += L.ng * L.nd;
    L.v_ed = v;
    v += L.nd;
  }
  L.v_slack = v;

  L.r_bal = 0;
  int r = L.nb;
  if (with_allocation) {
    L.r_gen = r;
    r += L.ng;
    L.r_load = r;
    r += L.nd;
    L.r_em = r;
    r += L.nd;
  }
  L.r_line = r;
  r += static_cast<int>(L.limited.size());
  if (kind != StageSpec::Welfare) L.r_fix = r++;
  if (kind == StageSpec::MinEmissions) L.r_fix2 = r++;
  L.n_rows = r;
  return L;
}

// Row orientation, chosen so the row duals map directly onto the price and
// adjustment multipliers:
//   balance(i):  sum_d P_d + net flow out of i - sum_g P_g = 0
//   gen(g):      sum_d pi(g,d) - P_g = 0
//   load(d):     sum_g pi(g,d) - P_d = 0
//   emission(d): sum_g e_g pi(g,d) - E_d = 0
//   line(l):     flow(l) + slack = limit,  slack in [0, 2*limit]
lp::Problem build_lp(const SystemCase& sys, const CaseIndex& idx,
                     const Layout& L, const std::vector<double>& gen_cost,
                     const std::vector<double>& carbon_cost,
                     const StageSpec& stage) {
  const bool fix_welfare = L.kind != StageSpec::Welfare;
  lp::Problem prob(L.n_rows);
  std::vector<std::map<int, double>> acc;
  acc.reserve(L.v_slack + L.limited.size() + 2);
  auto add_var = [&](double obj, double lo, double hi) {
    acc.emplace_back();
    return prob.add_variable(obj, lo, hi);
  };
  auto add = [&](int var, int row, double v) {
    if (v != 0.0) acc[var][row] += v;
  };

  for (int g = 0; g < L.ng; ++g) {
    const auto& gen = sys.generators[g];
    double obj = L.kind == StageSpec::Welfare       ? -gen_cost[g]
                 : L.kind == StageSpec::MinDispatch ? -1.0
                                                    : -gen.emission;
    int v = add_var(obj, gen.p_min, gen.p_max);
    add(v, L.r_bal + idx.gen_bus[g], -1.0);
    if (L.with_allocation) add(v, L.r_gen + g, -1.0);
    if (fix_welfare) add(v, L.r_fix, -gen_cost[g]);
    if (L.r_fix2 >= 0) add(v, L.r_fix2, 1.0);
  }
  for (int d = 0; d < L.nd; ++d) {
    const auto& con = sys.consumers[d];
    int v = add_var(L.kind == StageSpec::Welfare ? con.utility : 0.0,
                    con.p_min, con.p_max);
    add(v, L.r_bal + idx.load_bus[d], 1.0);
    if (L.with_allocation) add(v, L.r_load + d, -1.0);
    if (fix_welfare) add(v, L.r_fix, con.utility);
  }
  for (int i = 0; i < L.nb; ++i) {
    double lo = i == idx.reference ? 0.0 : -lp::kInf;
    double hi = i == idx.reference ? 0.0 : lp::kInf;
    add_var(0.0, lo, hi);
  }
  for (int l = 0; l < static_cast<int>(sys.lines.size()); ++l) {
    auto [a, b] = idx.line_ends[l];
    double beta = sys.lines[l].susceptance;
    add(L.v_theta + a, L.r_bal + a, beta);
    add(L.v_theta + a, L.r_bal + b, -beta);
    add(L.v_theta + b, L.r_bal + b, beta);
    add(L.v_theta + b, L.r_bal + a, -beta);
  }
  if (L.with_allocation) {
    for (int g = 0; g < L.ng; ++g) {
      double e = sys.generators[g].emission;
      for (int d = 0; d < L.nd; ++d) {
        int v = add_var(0.0, 0.0, lp::kInf);
        add(v, L.r_gen + g, 1.0);
        add(v, L.r_load + d, 1.0);
        add(v, L.r_em + d, e);
      }
    }
    for (int d = 0; d < L.nd; ++d) {
      int v = add_var(L.kind == StageSpec::Welfare ? -carbon_cost[d] : 0.0,
                      -lp::kInf, lp::kInf);
      add(v, L.r_em + d, -1.0);
      if (fix_welfare) add(v, L.r_fix, -carbon_cost[d]);
    }
  }
  for (size_t k = 0; k < L.limited.size(); ++k) {
    int l = L.limited[k];
    auto [a, b] = idx.line_ends[l];
    double beta = sys.lines[l].susceptance;
    double cap = *sys.lines[l].limit;
    int row = L.r_line + static_cast<int>(k);
    add(L.v_theta + a, row, beta);
    add(L.v_theta + b, row, -beta);
    int s = add_var(0.0, 0.0, 2.0 * cap);
    add(s, row, 1.0);
    prob.set_rhs(row, cap);
  }
  if (fix_welfare) {
    double eps = 1e-12 * (1.0 + std::abs(stage.welfare));
    int s = add_var(0.0, -eps, eps);
    add(s, L.r_fix, 1.0);
    prob.set_rhs(L.r_fix, stage.welfare);
  }
  if (L.r_fix2 >= 0) {
    double eps = 1e-12 * (1.0 + std::abs(stage.dispatch));
    int s = add_var(0.0, -eps, eps);
    add(s, L.r_fix2, 1.0);
    prob.set_rhs(L.r_fix2, stage.dispatch);
  }

  for (size_t j = 0; j < acc.size(); ++j)
    for (auto& [row, v] : acc[j]) prob.add_entry(static_cast<int>(j), row, v);
  return prob;
}

[[noreturn]] void throw_status(lp::Status st) {
  switch (st) {
    case lp::Status::Infeasible:
      throw SolveError(SolveFailure::Infeasible,
                       "no dispatch satisfies the network and bound constraints");
    case lp::Status::IterationLimit:
      throw SolveError(SolveFailure::IterationLimit,
                       "simplex iteration limit reached");
    default:
      throw SolveError(SolveFailure::Internal,
                       "solver reported an unbounded problem on a boxed model");
  }
}

// Zero-dispatch agents have no allocation edges, so their adjustments are
// only bounded, not pinned, by the final basis. Lowering each one onto its
// tightest pair constraint keeps every optimality condition intact and makes
// the adjustments comparable across agents (consumers first, then
// generators against the updated consumer values).
void tighten_zero_agents(const SystemCase& sys, const ClearingSolution& sol,
                         DualSolution& duals) {
  const int ng = static_cast<int>(sys.generators.size());
  const int nd = static_cast<int>(sys.consumers.size());
  if (ng == 0 || nd == 0) return;
  double scale = 1.0;
  for (double v : sol.p_d) scale = std::max(scale, std::abs(v));
  for (double v : sol.p_g) scale = std::max(scale, std::abs(v));
  const double tol = 1e-7 * scale;

  std::vector<double> lg0 = duals.lambda_g;
  for (int d = 0; d < nd; ++d) {
    if (sol.p_d[d] > tol) continue;
    double cd = sys.consumers[d].carbon_cost;
    double best = -lg0[0] - cd * sys.generators[0].emission;
    for (int g = 1; g < ng; ++g)
      best = std::max(best, -lg0[g] - cd * sys.generators[g].emission);
    duals.lambda_d[d] = std::min(duals.lambda_d[d], best);
  }
  for (int g = 0; g < ng; ++g) {
    if (sol.p_g[g] > tol) continue;
    double eg = sys.generators[g].emission;
    double best = -duals.lambda_d[0] - sys.consumers[0].carbon_cost * eg;
    for (int d = 1; d < nd; ++d)
      best = std::max(best,
                      -duals.lambda_d[d] - sys.consumers[d].carbon_cost * eg);
    duals.lambda_g[g] = std::min(duals.lambda_g[g], best);
  }
}

ClearingResult solve_impl(const SystemCase& sys, const SolveOptions& opts,
                          Mode mode, double tax) {
  require_valid(sys);
  CaseIndex idx(sys);
  const int ng = static_cast<int>(sys.generators.size());
  const int nd = static_cast<int>(sys.consumers.size());
  const int nb = static_cast<int>(sys.buses.size());
  const int nl = static_cast<int>(sys.lines.size());
  const bool with_allocation = mode == Mode::Carbon;

  std::vector<double> gen_cost(ng), carbon_cost(nd, 0.0);
  for (int g = 0; g < ng; ++g) {
    gen_cost[g] = sys.generators[g].cost;
    if (mode == Mode::Tax) gen_cost[g] += tax * sys.generators[g].emission;
  }
  if (mode == Mode::Carbon)
    for (int d = 0; d < nd; ++d) carbon_cost[d] = sys.consumers[d].carbon_cost;

  lp::Options lopt;
  lopt.max_iterations = opts.max_iterations;

  Layout L1 = make_layout(sys, with_allocation, StageSpec::Welfare);
  lp::Problem p1 = build_lp(sys, idx, L1, gen_cost, carbon_cost, {});
  lp::Solution s1 = lp::solve(p1, lopt);
  if (s1.status != lp::Status::Optimal) throw_status(s1.status);

  const lp::Solution* primal = &s1;
  lp::Solution s2, s3;
  if (opts.min_dispatch_tiebreak) {
    StageSpec spec2{StageSpec::MinDispatch, s1.objective, 0.0};
    Layout L2 = make_layout(sys, with_allocation, spec2.kind);
    lp::Problem p2 = build_lp(sys, idx, L2, gen_cost, carbon_cost, spec2);
    s2 = lp::solve(p2, lopt);
    if (s2.status == lp::Status::Optimal) {
      primal = &s2;
      StageSpec spec3{StageSpec::MinEmissions, s1.objective, -s2.objective};
      Layout L3 = make_layout(sys, with_allocation, spec3.kind);
      lp::Problem p3 = build_lp(sys, idx, L3, gen_cost, carbon_cost, spec3);
      s3 = lp::solve(p3, lopt);
      if (s3.status == lp::Status::Optimal) primal = &s3;
    }
  }

  ClearingResult out;
  ClearingSolution& sol = out.solution;
  sol.p_g.assign(primal->x.begin() + L1.v_pg, primal->x.begin() + L1.v_pg + ng);
  sol.p_d.assign(primal->x.begin() + L1.v_pd, primal->x.begin() + L1.v_pd + nd);
  sol.theta.assign(primal->x.begin() + L1.v_theta,
                   primal->x.begin() + L1.v_theta + nb);
  sol.has_allocation = with_allocation;
  if (with_allocation) {
    sol.pi.num_generators = ng;
    sol.pi.num_consumers = nd;
    sol.pi.pi.assign(primal->x.begin() + L1.v_pi,
                     primal->x.begin() + L1.v_pi + ng * nd);
    for (double& v : sol.pi.pi)
      if (v < 0.0) v = 0.0;
    sol.pi.row_marginals = sol.p_g;
    sol.pi.col_marginals = sol.p_d;
    sol.e_d.assign(primal->x.begin() + L1.v_ed,
                   primal->x.begin() + L1.v_ed + nd);
  }
  for (int d = 0; d < nd; ++d)
    sol.utility_total += sys.consumers[d].utility * sol.p_d[d];
  for (int g = 0; g < ng; ++g)
    sol.gen_cost_total += sys.generators[g].cost * sol.p_g[g];
  if (mode == Mode::Carbon)
    for (int d = 0; d < nd; ++d)
      sol.carbon_cost_total += sys.consumers[d].carbon_cost * sol.e_d[d];
  else if (mode == Mode::Tax)
    sol.carbon_cost_total = tax * sol.total_emissions(sys);
  sol.objective = sol.utility_total - sol.carbon_cost_total - sol.gen_cost_total;

  // Duals: the stage-1 basis is optimal for the same problem, so it pairs
  // with any point of the optimal face, including the stage-2 dispatch.
  DualSolution& duals = out.duals;
  duals.lambda_p.resize(nb);
  for (int i = 0; i < nb; ++i) duals.lambda_p[i] = s1.row_duals[L1.r_bal + i];
  duals.lambda_g.assign(ng, 0.0);
  duals.lambda_d.assign(nd, 0.0);
  duals.lambda_e.assign(nd, 0.0);
  if (with_allocation) {
    for (int g = 0; g < ng; ++g) duals.lambda_g[g] = s1.row_duals[L1.r_gen + g];
    for (int d = 0; d < nd; ++d) {
      duals.lambda_d[d] = s1.row_duals[L1.r_load + d];
      duals.lambda_e[d] = s1.row_duals[L1.r_em + d];
    }
  }
  duals.eta_line_up.assign(nl, 0.0);
  duals.eta_line_dn.assign(nl, 0.0);
  for (size_t k = 0; k < L1.limited.size(); ++k) {
    double y = s1.row_duals[L1.r_line + static_cast<int>(k)];
    duals.eta_line_up[L1.limited[k]] = std::max(y, 0.0);
    duals.eta_line_dn[L1.limited[k]] = std::max(-y, 0.0);
  }

  if (opts.price_selection == PriceSelection::DemandMarginal) {
    detail::FaceInputs fin;
    fin.sys = &sys;
    fin.idx = &idx;
    fin.sol = &sol;
    fin.gen_cost = &gen_cost;
    fin.with_allocation = with_allocation;
    if (auto selected = detail::demand_marginal_duals(fin, opts.selection_row_cap)) {
      duals.lambda_p = std::move(selected->lambda_p);
      duals.lambda_g = std::move(selected->lambda_g);
      duals.lambda_d = std::move(selected->lambda_d);
      duals.eta_line_up = std::move(selected->eta_line_up);
      duals.eta_line_dn = std::move(selected->eta_line_dn);
      duals.price_selection_applied = true;
      if (with_allocation)
        for (int d = 0; d < nd; ++d)
          duals.lambda_e[d] = sys.consumers[d].carbon_cost;
    }
  }

  if (with_allocation) tighten_zero_agents(sys, sol, duals);

  // Bound multipliers follow from the stationarity margins of the final
  // adjustments; the signs are consistent with the bound each agent sits at.
  duals.eta_g_up.assign(ng, 0.0);
  duals.eta_g_dn.assign(ng, 0.0);
  for (int g = 0; g < ng; ++g) {
    double m = duals.lambda_p[idx.gen_bus[g]] + duals.lambda_g[g] - gen_cost[g];
    duals.eta_g_up[g] = std::max(m, 0.0);
    duals.eta_g_dn[g] = std::max(-m, 0.0);
  }
  duals.eta_d_up.assign(nd, 0.0);
  duals.eta_d_dn.assign(nd, 0.0);
  for (int d = 0; d < nd; ++d) {
    double m = sys.consumers[d].utility -
               (duals.lambda_p[idx.load_bus[d]] - duals.lambda_d[d]);
    duals.eta_d_up[d] = std::max(m, 0.0);
    duals.eta_d_dn[d] = std::max(-m, 0.0);
  }

  // Self-check against the optimality system that was actually solved; for
  // the taxed model that is the standard model at effective costs.
  ResidualReport rep;
  if (mode == Mode::Tax) {
    SystemCase taxed = sys;
    for (int g = 0; g < ng; ++g) taxed.generators[g].cost = gen_cost[g];
    rep = kkt_residuals(taxed, sol, duals);
  } else {
    rep = kkt_residuals(sys, sol, duals);
  }
  if (rep.max_residual > opts.kkt_tolerance)
    throw SolveError(SolveFailure::Internal,
                     "solver produced a primal/dual pair with residual " +
                         std::to_string(rep.max_residual));
  return out;
}

}  // namespace

ClearingResult solve_clearing(const SystemCase& sys, const SolveOptions& opts) {
  return solve_impl(sys, opts, Mode::Carbon, 0.0);
}

ClearingResult solve_standard(const SystemCase& sys, const SolveOptions& opts) {
  return solve_impl(sys, opts, Mode::Standard, 0.0);
}

ClearingResult solve_with_tax(const SystemCase& sys, double tax,
                              const SolveOptions& opts) {
  if (tax < 0.0) throw Error("tax rate must be non-negative");
  return solve_impl(sys, opts, Mode::Tax, tax);
}

}  // namespace carbon
