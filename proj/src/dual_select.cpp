#include "dual_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "carbon/lp.hpp"

namespace carbon::detail {

namespace {

enum class BoundState { Interior, AtLower, AtUpper, Fixed };

BoundState classify(double x, double lo, double hi, double eps) {
  if (hi - lo <= 2 * eps) return BoundState::Fixed;
  if (x >= hi - eps) return BoundState::AtUpper;
  if (x <= lo + eps) return BoundState::AtLower;
  return BoundState::Interior;
}

// The face problem mixes contributions from several variables into one row,
// so coefficients are accumulated first and emitted once per (var, row).
struct Builder {
  explicit Builder(int rows) : prob(rows) {}
  int add_var(double obj, double lo, double hi) {
    acc.emplace_back();
    return prob.add_variable(obj, lo, hi);
  }
  void add(int var, int row, double v) { acc[var][row] += v; }
  lp::Problem finish() {
    for (size_t j = 0; j < acc.size(); ++j)
      for (auto& [row, v] : acc[j]) prob.add_entry(static_cast<int>(j), row, v);
    return std::move(prob);
  }
  lp::Problem prob;
  std::vector<std::map<int, double>> acc;
};

struct FaceLayout {
  std::vector<int> v_lp, v_lg, v_ld, up_var, dn_var;
};

// Builds the dual-face problem. In the first pass the objective maximizes the
// sum of consumer prices. In the second pass that sum is pinned to `opt_a`
// and the objective minimizes the sum of generator prices.
lp::Problem build_face(const FaceInputs& in, const std::vector<char>& up_bind,
                       const std::vector<char>& dn_bind, double pi_tol,
                       bool stage_b, double opt_a, FaceLayout& out) {
  const SystemCase& sys = *in.sys;
  const CaseIndex& idx = *in.idx;
  const ClearingSolution& sol = *in.sol;
  const int nb = static_cast<int>(sys.buses.size());
  const int ng = static_cast<int>(sys.generators.size());
  const int nd = static_cast<int>(sys.consumers.size());
  const int nl = static_cast<int>(sys.lines.size());

  const int r_gen = 0;
  const int r_load = r_gen + ng;
  const int r_pi = r_load + nd;
  const int r_theta = r_pi + (in.with_allocation ? ng * nd : 0);
  const int r_fix = r_theta + (nb - 1);
  Builder b(r_fix + (stage_b ? 1 : 0));

  // Stage-A objective coefficients: +1 per consumer on its bus price, -1 on
  // its carbon adjustment. Stage-B: -1 per generator on bus price + lambda_g.
  std::vector<double> coeff_a_lp(nb, 0.0), coeff_b_lp(nb, 0.0);
  for (int d = 0; d < nd; ++d) coeff_a_lp[idx.load_bus[d]] += 1.0;
  for (int g = 0; g < ng; ++g) coeff_b_lp[idx.gen_bus[g]] -= 1.0;

  out.v_lp.resize(nb);
  for (int i = 0; i < nb; ++i)
    out.v_lp[i] = b.add_var(stage_b ? coeff_b_lp[i] : coeff_a_lp[i],
                            -lp::kInf, lp::kInf);
  if (in.with_allocation) {
    out.v_lg.resize(ng);
    out.v_ld.resize(nd);
    for (int g = 0; g < ng; ++g)
      out.v_lg[g] = b.add_var(stage_b ? -1.0 : 0.0, -lp::kInf, lp::kInf);
    for (int d = 0; d < nd; ++d)
      out.v_ld[d] = b.add_var(stage_b ? 0.0 : -1.0, -lp::kInf, lp::kInf);
  }
  out.up_var.assign(nl, -1);
  out.dn_var.assign(nl, -1);
  for (int l = 0; l < nl; ++l) {
    if (up_bind[l]) out.up_var[l] = b.add_var(0.0, 0.0, lp::kInf);
    if (dn_bind[l]) out.dn_var[l] = b.add_var(0.0, 0.0, lp::kInf);
  }

  // Generator stationarity rows: lambda_p(bus) + lambda_g vs cost.
  for (int g = 0; g < ng; ++g) {
    const auto& gen = sys.generators[g];
    double eps = 1e-6 * (1.0 + std::abs(gen.p_max) + std::abs(gen.p_min));
    BoundState st = classify(sol.p_g[g], gen.p_min, gen.p_max, eps);
    int row = r_gen + g;
    b.add(out.v_lp[idx.gen_bus[g]], row, 1.0);
    if (in.with_allocation) b.add(out.v_lg[g], row, 1.0);
    b.prob.set_rhs(row, (*in.gen_cost)[g]);
    if (st == BoundState::Fixed) {
      b.add(b.add_var(0.0, -lp::kInf, lp::kInf), row, 1.0);  // no constraint
    } else if (st == BoundState::AtUpper) {
      b.add(b.add_var(0.0, 0.0, lp::kInf), row, -1.0);  // expr >= cost
    } else if (st == BoundState::AtLower) {
      b.add(b.add_var(0.0, 0.0, lp::kInf), row, 1.0);  // expr <= cost
    }
  }

  // Consumer stationarity rows: lambda_p(bus) - lambda_d vs utility.
  for (int d = 0; d < nd; ++d) {
    const auto& con = sys.consumers[d];
    double eps = 1e-6 * (1.0 + std::abs(con.p_max) + std::abs(con.p_min));
    BoundState st = classify(sol.p_d[d], con.p_min, con.p_max, eps);
    int row = r_load + d;
    b.add(out.v_lp[idx.load_bus[d]], row, 1.0);
    if (in.with_allocation) b.add(out.v_ld[d], row, -1.0);
    b.prob.set_rhs(row, con.utility);
    if (st == BoundState::Fixed) {
      b.add(b.add_var(0.0, -lp::kInf, lp::kInf), row, 1.0);
    } else if (st == BoundState::AtUpper) {
      b.add(b.add_var(0.0, 0.0, lp::kInf), row, 1.0);  // price <= utility
    } else if (st == BoundState::AtLower) {
      b.add(b.add_var(0.0, 0.0, lp::kInf), row, -1.0);  // price >= utility
    }
  }

  // Pair rows: lambda_g + lambda_d >= -c_d e_g, tight on the support.
  if (in.with_allocation) {
    for (int g = 0; g < ng; ++g)
      for (int d = 0; d < nd; ++d) {
        int row = r_pi + g * nd + d;
        b.add(out.v_lg[g], row, 1.0);
        b.add(out.v_ld[d], row, 1.0);
        b.prob.set_rhs(row, -sys.consumers[d].carbon_cost *
                                sys.generators[g].emission);
        if (in.sol->pi.at(g, d) <= pi_tol)
          b.add(b.add_var(0.0, 0.0, lp::kInf), row, -1.0);
      }
  }

  // Angle stationarity at every non-reference bus; line multipliers only
  // where the corresponding limit binds.
  std::vector<int> theta_row(nb, -1);
  {
    int r = 0;
    for (int i = 0; i < nb; ++i)
      if (i != idx.reference) theta_row[i] = r_theta + r++;
  }
  for (int l = 0; l < nl; ++l) {
    auto [a, c] = idx.line_ends[l];
    double beta = sys.lines[l].susceptance;
    for (auto [bus, sgn] : {std::pair<int, double>{a, 1.0},
                            std::pair<int, double>{c, -1.0}}) {
      int row = theta_row[bus];
      if (row < 0) continue;
      b.add(out.v_lp[c], row, sgn * beta);
      b.add(out.v_lp[a], row, -sgn * beta);
      if (out.up_var[l] >= 0) b.add(out.up_var[l], row, -sgn * beta);
      if (out.dn_var[l] >= 0) b.add(out.dn_var[l], row, sgn * beta);
    }
  }

  if (stage_b) {
    // Stage-A value is pinned within a small absolute window.
    double eps = 1e-12 * (1.0 + std::abs(opt_a));
    for (int i = 0; i < nb; ++i)
      if (coeff_a_lp[i] != 0.0) b.add(out.v_lp[i], r_fix, coeff_a_lp[i]);
    if (in.with_allocation)
      for (int d = 0; d < nd; ++d) b.add(out.v_ld[d], r_fix, -1.0);
    b.add(b.add_var(0.0, -eps, eps), r_fix, 1.0);
    b.prob.set_rhs(r_fix, opt_a);
  }

  return b.finish();
}

}  // namespace

std::optional<DualSolution> demand_marginal_duals(const FaceInputs& in,
                                                  int row_cap) {
  const SystemCase& sys = *in.sys;
  const ClearingSolution& sol = *in.sol;
  const int nb = static_cast<int>(sys.buses.size());
  const int ng = static_cast<int>(sys.generators.size());
  const int nd = static_cast<int>(sys.consumers.size());
  const int nl = static_cast<int>(sys.lines.size());

  int rows = ng + nd + (nb - 1) + (in.with_allocation ? ng * nd : 0) + 1;
  if (rows > row_cap) return std::nullopt;

  double load_scale = 1.0;
  for (double v : sol.p_d) load_scale = std::max(load_scale, std::abs(v));
  const double pi_tol = 1e-7 * load_scale;

  auto flows = line_flows(sys, sol.theta);
  std::vector<char> up_bind(nl, 0), dn_bind(nl, 0);
  for (int l = 0; l < nl; ++l) {
    if (!sys.lines[l].limit) continue;
    double cap = *sys.lines[l].limit;
    double eps = 1e-6 * (1.0 + cap);
    if (flows[l] >= cap - eps) up_bind[l] = 1;
    if (flows[l] <= -cap + eps) dn_bind[l] = 1;
  }

  lp::Options lopt;
  lopt.max_iterations = 20000;

  FaceLayout layout_a;
  lp::Problem pa = build_face(in, up_bind, dn_bind, pi_tol, false, 0.0, layout_a);
  lp::Solution sa = lp::solve(pa, lopt);
  if (sa.status != lp::Status::Optimal) return std::nullopt;

  FaceLayout layout_b;
  lp::Problem pb =
      build_face(in, up_bind, dn_bind, pi_tol, true, sa.objective, layout_b);
  lp::Solution sb = lp::solve(pb, lopt);
  const lp::Solution& chosen = sb.status == lp::Status::Optimal ? sb : sa;
  const FaceLayout& lay = sb.status == lp::Status::Optimal ? layout_b : layout_a;

  DualSolution out;
  out.lambda_p.resize(nb);
  for (int i = 0; i < nb; ++i) out.lambda_p[i] = chosen.x[lay.v_lp[i]];
  if (in.with_allocation) {
    out.lambda_g.resize(ng);
    out.lambda_d.resize(nd);
    for (int g = 0; g < ng; ++g) out.lambda_g[g] = chosen.x[lay.v_lg[g]];
    for (int d = 0; d < nd; ++d) out.lambda_d[d] = chosen.x[lay.v_ld[d]];
  } else {
    out.lambda_g.assign(ng, 0.0);
    out.lambda_d.assign(nd, 0.0);
  }
  out.eta_line_up.assign(nl, 0.0);
  out.eta_line_dn.assign(nl, 0.0);
  for (int l = 0; l < nl; ++l) {
    if (lay.up_var[l] >= 0) out.eta_line_up[l] = std::max(0.0, chosen.x[lay.up_var[l]]);
    if (lay.dn_var[l] >= 0) out.eta_line_dn[l] = std::max(0.0, chosen.x[lay.dn_var[l]]);
  }
  out.price_selection_applied = true;
  return out;
}

}  // namespace carbon::detail
