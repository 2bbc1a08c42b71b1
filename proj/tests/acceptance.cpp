// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "carbon/allocation.hpp"
#include "carbon/caseio.hpp"
#include "carbon/clearing.hpp"
#include "carbon/equilibrium.hpp"
#include "carbon/fixtures.hpp"
#include "carbon/pricing.hpp"
#include "carbon/properties.hpp"
#include "carbon/random_case.hpp"

using namespace carbon;

namespace {

struct Criterion {
  std::string failure;  // empty while passing
  int checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failure.empty()) failure = what;
  }
  void expect_near(double actual, double want, double tol, const std::string& what) {
    expect(std::abs(actual - want) <= tol,
           what + ": got " + std::to_string(actual) + ", want " +
               std::to_string(want));
  }
  void expect_rel(double actual, double want, double tol, const std::string& what) {
    expect(std::abs(actual - want) <= tol * (1.0 + std::abs(want)),
           what + ": got " + std::to_string(actual) + ", want " +
               std::to_string(want));
  }
};

struct Suite {
  int failures = 0;
  template <typename Fn>
  void run(int number, const std::string& title, Fn&& fn) {
    Criterion c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (c.failure.empty()) {
      std::printf("[PASS] criterion %d: %s (%d checks)\n", number, title.c_str(),
                  c.checks);
    } else {
      std::printf("[FAIL] criterion %d: %s -- %s\n", number, title.c_str(),
                  c.failure.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
};

constexpr double kPriceTol = 1e-4;
constexpr double kDispatchTol = 1e-4;
constexpr double kObjTol = 1e-6;

struct Xorshift {
  std::uint64_t s;
  explicit Xorshift(std::uint64_t seed) : s(seed ? seed : 1) {}
  double uniform(double lo, double hi) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return lo + (hi - lo) * (static_cast<double>(s >> 11) * 0x1.0p-53);
  }
  int uniform_int(int lo, int hi) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return lo + static_cast<int>(s % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

void check_three_bus_row(Criterion& c, double x,
                         const std::array<double, 3>& loads,
                         const std::array<double, 3>& gens, double gen_cost,
                         const std::array<double, 3>& gen_price,
                         const std::array<double, 3>& load_price,
                         double emissions, double rounded_avg) {
  SystemCase sys = fixture_t1({0.0, 15.0, x});
  ClearingResult res = solve_clearing(sys);
  std::string tag = "row x=" + std::to_string(x);
  for (int d = 0; d < 3; ++d)
    c.expect_near(res.solution.p_d[d], loads[d], kDispatchTol,
                  tag + " load dispatch");
  for (int g = 0; g < 3; ++g)
    c.expect_near(res.solution.p_g[g], gens[g], kDispatchTol,
                  tag + " generator dispatch");
  double total = loads[0] + loads[1] + loads[2];
  c.expect_near(res.solution.total_load(), total, kDispatchTol,
                tag + " total load");
  c.expect_rel(res.solution.gen_cost_total, gen_cost, kObjTol, tag + " cost");
  c.expect_near(res.solution.total_emissions(sys), emissions, kDispatchTol,
                tag + " emissions");
  double avg = res.solution.total_emissions(sys) / res.solution.total_load();
  c.expect_near(avg, emissions / total, 1e-9, tag + " average emissions");
  c.expect(std::abs(avg - rounded_avg) < 0.005,
           tag + " average emissions rounds to the reference value");
  PriceReport prices = carbon_adjusted_prices(res.duals, sys, res.solution);
  for (int g = 0; g < 3; ++g)
    c.expect_near(prices.gen_price[g], gen_price[g], kPriceTol,
                  tag + " generator price");
  for (int d = 0; d < 3; ++d)
    c.expect_near(prices.load_price[d], load_price[d], kPriceTol,
                  tag + " consumer price");
}

}  // namespace

int main() {
  Suite suite;

  suite.run(1, "three-bus table reproduction", [](Criterion& c) {
    // Standard row.
    {
      SystemCase sys = fixture_t1({0.0, 0.0, 0.0});
      ClearingResult res = solve_standard(sys);
      const std::array<double, 3> gens{20, 0, 25}, loads{15, 15, 15};
      for (int g = 0; g < 3; ++g)
        c.expect_near(res.solution.p_g[g], gens[g], kDispatchTol,
                      "standard generator dispatch");
      for (int d = 0; d < 3; ++d)
        c.expect_near(res.solution.p_d[d], loads[d], kDispatchTol,
                      "standard load dispatch");
      c.expect_rel(res.solution.gen_cost_total, 310.0, kObjTol, "standard cost");
      c.expect_near(res.solution.total_emissions(sys), 37.0, kDispatchTol,
                    "standard emissions");
      c.expect_near(res.solution.total_emissions(sys) / res.solution.total_load(),
                    37.0 / 45.0, 1e-9, "standard average emissions");
      c.expect(std::abs(37.0 / 45.0 - 0.82) < 0.005,
               "standard average emissions rounds to 0.82");
      for (double lp : res.duals.lambda_p)
        c.expect_near(lp, 10.0, kPriceTol, "standard uniform price");
    }
    // Carbon-tax row: uniform carbon costs of 15.
    {
      SystemCase sys = fixture_t1({15.0, 15.0, 15.0});
      ClearingResult res = solve_clearing(sys);
      const std::array<double, 3> gens{20, 10, 0};
      for (int g = 0; g < 3; ++g)
        c.expect_near(res.solution.p_g[g], gens[g], kDispatchTol,
                      "tax generator dispatch");
      c.expect_near(res.solution.total_load(), 30.0, kDispatchTol,
                    "tax total load");
      c.expect_rel(res.solution.gen_cost_total, 260.0, kObjTol, "tax cost");
      c.expect_near(res.solution.total_emissions(sys), 14.0, kDispatchTol,
                    "tax emissions");
      c.expect(std::abs(14.0 / 30.0 - 0.47) < 0.005,
               "tax average emissions rounds to 0.47");
      PriceReport prices = carbon_adjusted_prices(res.duals, sys, res.solution);
      const std::array<double, 3> gp{9, 15, 3};
      for (int g = 0; g < 3; ++g)
        c.expect_near(prices.gen_price[g], gp[g], kPriceTol, "tax generator price");
      for (int d = 0; d < 3; ++d)
        c.expect_near(prices.load_price[d], 18.0, kPriceTol, "tax consumer price");
      // The reference load split (15, 10, 5) and emission allocation
      // (9, 2, 3) are among multiple optima at these prices: each consumer
      // level is a best response, and the allocation attains the optimal
      // carbon cost for those marginals.
      const std::array<double, 3> pub_load{15, 10, 5};
      for (int d = 0; d < 3; ++d) {
        auto r = best_response_consumer(sys.consumers[d], prices.load_price[d],
                                        pub_load[d]);
        c.expect(r.gap <= 1e-6, "reference tax load split is a best response");
      }
      std::vector<double> e{0.6, 0.2, 1.0}, cd{15, 15, 15};
      AllocationMatrix oracle = allocate_greedy(
          {20.0, 10.0, 0.0}, {pub_load[0], pub_load[1], pub_load[2]}, e, cd);
      double reference_cost = 15.0 * (9.0 + 2.0 + 3.0);
      c.expect_rel(allocation_cost(oracle, e, cd), reference_cost, 1e-9,
                   "reference emission allocation attains the optimum");
      c.expect_near(9.0 + 2.0 + 3.0, 14.0, 1e-12,
                    "reference allocation totals the row emissions");
      c.expect_rel(res.solution.carbon_cost_total, reference_cost, kObjTol,
                   "solver carbon account matches the reference optimum");
    }
    // Non-uniform rows (0, 15, x); the x = 20 step is exercised through
    // criterion 2 instead.
    check_three_bus_row(c, 0.0, {15, 15, 15}, {10, 10, 25}, 330, {8, 14, 8},
                        {8, 17, 8}, 33, 0.73);
    check_three_bus_row(c, 5.0, {15, 15, 15}, {20, 10, 15}, 350, {8, 14, 6},
                        {6, 17, 11}, 29, 0.64);
    check_three_bus_row(c, 10.0, {15, 15, 15}, {20, 10, 15}, 350, {9, 15, 6},
                        {6, 18, 15}, 29, 0.64);
    check_three_bus_row(c, 15.0, {15, 15, 15}, {20, 10, 15}, 350, {9, 15, 6},
                        {6, 18, 18}, 29, 0.64);
    check_three_bus_row(c, 25.0, {15, 15, 0}, {5, 10, 15}, 230, {8, 14, 6},
                        {6, 17, 19}, 20, 0.67);
    // Emission allocation columns. Pointwise where the optimum is unique,
    // otherwise the pinned totals plus the oracle's deterministic split.
    auto e_d_of = [](double x) {
      return solve_clearing(fixture_t1({0.0, 15.0, x})).solution.e_d;
    };
    {
      auto e_d = e_d_of(0.0);
      c.expect_near(e_d[1], 5.0, kDispatchTol, "x=0 allocation d2");
      c.expect_near(e_d[0] + e_d[2], 28.0, kDispatchTol, "x=0 allocation d1+d3");
      AllocationMatrix oracle = allocate_greedy({10, 10, 25}, {15, 15, 15},
                                                {0.6, 0.2, 1.0}, {0, 15, 0});
      auto oracle_e = emissions_of(oracle, {0.6, 0.2, 1.0});
      c.expect_near(oracle_e[0], 13.0, kDispatchTol, "x=0 oracle allocation d1");
      c.expect_near(oracle_e[2], 15.0, kDispatchTol, "x=0 oracle allocation d3");
    }
    {
      auto e_d = e_d_of(5.0);
      c.expect_near(e_d[0], 15.0, kDispatchTol, "x=5 allocation d1");
      c.expect_near(e_d[1], 5.0, kDispatchTol, "x=5 allocation d2");
      c.expect_near(e_d[2], 9.0, kDispatchTol, "x=5 allocation d3");
    }
    {
      auto e_d = e_d_of(10.0);
      c.expect_near(e_d[0], 15.0, kDispatchTol, "x=10 allocation d1");
      c.expect_near(e_d[1], 5.0, kDispatchTol, "x=10 allocation d2");
      c.expect_near(e_d[2], 9.0, kDispatchTol, "x=10 allocation d3");
    }
    {
      // Equal carbon costs split the clean pool arbitrarily between the two
      // carbon-sensitive consumers; the totals are pinned.
      auto e_d = e_d_of(15.0);
      c.expect_near(e_d[0], 15.0, kDispatchTol, "x=15 allocation d1");
      c.expect_near(e_d[1] + e_d[2], 14.0, kDispatchTol, "x=15 allocation d2+d3");
    }
    {
      auto e_d = e_d_of(25.0);
      c.expect_near(e_d[0], 15.0, kDispatchTol, "x=25 allocation d1");
      c.expect_near(e_d[1], 5.0, kDispatchTol, "x=25 allocation d2");
      c.expect_near(e_d[2], 0.0, kDispatchTol, "x=25 allocation d3");
    }
  });

  suite.run(2, "centralized/equilibrium comparison row", [](Criterion& c) {
    SystemCase sys = fixture_t1({0.0, 15.0, 20.0});
    ClearingResult res = solve_clearing(sys);
    c.expect_rel(res.solution.objective, 235.0, kObjTol, "objective");
    c.expect_rel(res.solution.utility_total, 540.0, kObjTol, "utility");
    c.expect_rel(res.solution.carbon_cost_total, 75.0, kObjTol, "carbon cost");
    c.expect_rel(res.solution.gen_cost_total, 230.0, kObjTol, "generation cost");
    PriceReport prices = carbon_adjusted_prices(res.duals, sys, res.solution);
    const std::array<double, 3> gp{8, 14, 6}, lp{6, 17, 18};
    for (int g = 0; g < 3; ++g)
      c.expect_near(prices.gen_price[g], gp[g], kPriceTol, "generator price");
    for (int d = 0; d < 3; ++d)
      c.expect_near(prices.load_price[d], lp[d], kPriceTol, "consumer price");
    EquilibriumReport eq = verify_equilibrium(sys, res.solution, res.duals);
    c.expect(eq.pass, "equilibrium verification");
    ObjectiveBreakdown b = objective_breakdown(res.solution, sys);
    c.expect_rel(b.objective(), 235.0, kObjTol, "recomputed objective");
  });

  suite.run(3, "sweep trends in the third consumer's carbon cost", [](Criterion& c) {
    SystemCase sys = fixture_t1({0.0, 15.0, 0.0});
    auto rows = run_sweep(sys, {"d3", 0.0, 25.0, 5.0});
    c.expect(rows.size() == 6, "six sweep steps");
    for (size_t i = 1; i < rows.size() && rows[i].value <= 15.0; ++i)
      c.expect(rows[i].total_emissions <=
                   rows[i - 1].total_emissions + 1e-6 * (1 + rows[i].total_emissions),
               "emissions non-increasing up to 15");
    for (const auto& r : rows) {
      if (r.value <= 15.0)
        c.expect_near(r.total_demand, 45.0, kDispatchTol,
                      "demand constant up to 15");
      else
        c.expect(r.total_demand < 45.0 - 1.0, "demand reduced beyond 15");
    }
    for (size_t i = 1; i < rows.size(); ++i)
      c.expect(rows[i].load_price[2] >= rows[i - 1].load_price[2] - kPriceTol,
               "third consumer price non-decreasing");
    for (const auto& r : rows)
      if (r.value >= 5.0)
        c.expect(r.load_price[0] <= 10.0 + kPriceTol,
                 "first consumer price at most the standard price");
  });

  suite.run(4, "property suite over 200 random cases", [](Criterion& c) {
    SolveOptions opts;
    opts.price_selection = PriceSelection::None;
    Xorshift shift_rng(404);
    int congested_cases = 0;
    for (int seed = 1; seed <= 200; ++seed) {
      int nb = 2 + seed % 19;
      int ng = 1 + seed % 30;
      int nd = 1 + (seed * 7) % 20;
      SystemCase sys = random_case(nb, ng, nd, seed);
      ClearingResult res = solve_clearing(sys, opts);
      std::string tag = "seed " + std::to_string(seed);

      auto flows = line_flows(sys, res.solution.theta);
      for (size_t l = 0; l < sys.lines.size(); ++l)
        if (sys.lines[l].limit &&
            std::abs(flows[l]) >= *sys.lines[l].limit * (1.0 - 1e-6)) {
          ++congested_cases;
          break;
        }

      ResidualReport kkt = kkt_residuals(sys, res.solution, res.duals);
      c.expect(kkt.max_residual <= 1e-6, tag + ": KKT residual");

      PriceReport prices = carbon_adjusted_prices(res.duals, sys, res.solution);
      c.expect(check_ordering(prices, sys).pass, tag + ": adjustment ordering");

      for (const auto& gap : adjustment_gaps(res.solution, res.duals, sys, 1e-6))
        if (gap.residual > 1e-6) {
          c.expect(false, tag + ": pairwise adjustment identity");
          break;
        }

      SettlementReport s = settle(sys, res.solution, res.duals);
      c.expect(std::abs(s.surplus - s.carbon_revenue) <=
                   1e-6 * (1.0 + std::abs(s.carbon_revenue)),
               tag + ": budget balance");
      c.expect(s.surplus >= -1e-6 * (1.0 + std::abs(s.consumer_payments)),
               tag + ": revenue adequacy");

      RationalityReport ir = individual_rationality(sys, res.solution, res.duals);
      c.expect(ir.guaranteed && ir.pass, tag + ": individual rationality");

      for (int k = 0; k < 10; ++k) {
        double dl = shift_rng.uniform(-100.0, 100.0);
        DualSolution shifted = res.duals;
        for (double& v : shifted.lambda_p) v += dl;
        for (double& v : shifted.lambda_g) v -= dl;
        for (double& v : shifted.lambda_d) v += dl;
        PriceReport moved = carbon_adjusted_prices(shifted, sys, res.solution);
        bool same = true;
        for (size_t g = 0; g < prices.gen_price.size(); ++g)
          if (std::abs(moved.gen_price[g] - prices.gen_price[g]) >
              1e-9 * (1.0 + std::abs(dl) + std::abs(prices.gen_price[g])))
            same = false;
        for (size_t d = 0; d < prices.load_price.size(); ++d)
          if (std::abs(moved.load_price[d] - prices.load_price[d]) >
              1e-9 * (1.0 + std::abs(dl) + std::abs(prices.load_price[d])))
            same = false;
        c.expect(same, tag + ": gauge invariance of prices");
        if (!same) break;
      }
    }
    c.expect(congested_cases >= 50,
             "congestion mix: only " + std::to_string(congested_cases) +
                 " cases had binding lines");
  });

  suite.run(5, "allocation oracle equivalence", [](Criterion& c) {
    Xorshift rng(777);
    for (int trial = 0; trial < 500; ++trial) {
      int ng = rng.uniform_int(1, 10), nd = rng.uniform_int(1, 10);
      std::vector<double> p_g(ng), p_d(nd), e(ng), cd(nd);
      double total = 0.0;
      for (int g = 0; g < ng; ++g) {
        p_g[g] = rng.uniform(0.0, 50.0);
        total += p_g[g];
        e[g] = rng.uniform(0.0, 1.0) < 0.25 ? 0.0 : rng.uniform(0.05, 1.2);
      }
      double left = total;
      for (int d = 0; d + 1 < nd; ++d) {
        p_d[d] = left * rng.uniform(0.0, 1.0);
        left -= p_d[d];
      }
      p_d[nd - 1] = left;
      for (int d = 0; d < nd; ++d)
        cd[d] = rng.uniform(0.0, 1.0) < 0.25 ? 0.0 : rng.uniform(1.0, 40.0);
      AllocationMatrix greedy = allocate_greedy(p_g, p_d, e, cd);
      auto [lp_pi, duals] = allocate_lp(p_g, p_d, e, cd);
      double a = allocation_cost(greedy, e, cd);
      double b = allocation_cost(lp_pi, e, cd);
      c.expect(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)),
               "trial " + std::to_string(trial) + ": objectives differ (" +
                   std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
  });

  suite.run(6, "reduced-model equivalences", [](Criterion& c) {
    SolveOptions opts;
    opts.price_selection = PriceSelection::None;
    const std::array<double, 4> taxes{0.0, 5.0, 15.0, 30.0};
    {
      SystemCase t1 = fixture_t1({0.0, 0.0, 0.0});
      EquivalenceReport rep = equivalence_standard(t1, opts);
      c.expect(rep.pass && rep.objective_gap <= 1e-6, "fixture standard equivalence");
      for (double tax : taxes) {
        EquivalenceReport tr = equivalence_tax(t1, tax, opts);
        c.expect(tr.pass && tr.objective_gap <= 1e-6,
                 "fixture tax equivalence at rate " + std::to_string(tax));
      }
    }
    for (int seed = 300; seed < 350; ++seed) {
      SystemCase sys = random_case(2 + seed % 11, 1 + seed % 12, 1 + seed % 9,
                                   static_cast<std::uint64_t>(seed));
      std::string tag = "seed " + std::to_string(seed);
      EquivalenceReport rep = equivalence_standard(sys, opts);
      c.expect(rep.pass && rep.objective_gap <= 1e-6, tag + ": standard equivalence");
      for (double tax : taxes) {
        EquivalenceReport tr = equivalence_tax(sys, tax, opts);
        c.expect(tr.pass && tr.objective_gap <= 1e-6,
                 tag + ": tax equivalence at rate " + std::to_string(tax));
      }
    }
  });

  suite.run(7, "emission classes share adjustments on a 73-bus case", [](Criterion& c) {
    SystemCase sys = random_case(73, 158, 51, 1);
    SolveOptions opts;
    opts.price_selection = PriceSelection::None;
    ClearingResult res = solve_clearing(sys, opts);
    c.expect(kkt_residuals(sys, res.solution, res.duals).pass, "KKT at scale");

    // Generators sharing an emission factor share the adjustment; scan the
    // classes reachable in the allocation graph.
    std::vector<double> factors{0.0, 0.6042, 0.7434, 0.9606};
    int reachable_classes = 0;
    for (double e : factors) {
      double lo = 1e300, hi = -1e300;        // members with allocation edges
      double lo_all = 1e300, hi_all = -1e300;  // whole class
      int reachable = 0;
      for (size_t g = 0; g < sys.generators.size(); ++g) {
        if (sys.generators[g].emission != e) continue;
        double adj = res.duals.lambda_g[g];
        lo_all = std::min(lo_all, adj);
        hi_all = std::max(hi_all, adj);
        for (int d = 0; d < res.solution.pi.num_consumers; ++d)
          if (res.solution.pi.at(static_cast<int>(g), d) > 1e-6) {
            ++reachable;
            lo = std::min(lo, adj);
            hi = std::max(hi, adj);
            break;
          }
      }
      if (hi_all < lo_all) continue;
      if (reachable >= 1) ++reachable_classes;
      if (reachable >= 2)
        c.expect(hi - lo <= 1e-6,
                 "reachable class spread for e=" + std::to_string(e) + " is " +
                     std::to_string(hi - lo));
      // Idle units are pinned to their tightest pair bound, which extends the
      // equality to the whole class.
      c.expect(hi_all - lo_all <= 1e-6,
               "class spread for e=" + std::to_string(e) + " is " +
                   std::to_string(hi_all - lo_all));
    }
    c.expect(reachable_classes >= 2, "several classes reach the allocation graph");

    // Consumers served exclusively by zero-emission generators share the
    // same adjustment.
    double lo = 1e300, hi = -1e300;
    int count = 0;
    for (size_t d = 0; d < sys.consumers.size(); ++d) {
      bool any = false, all_zero = true;
      for (size_t g = 0; g < sys.generators.size(); ++g)
        if (res.solution.pi.at(static_cast<int>(g), static_cast<int>(d)) > 1e-6) {
          any = true;
          if (sys.generators[g].emission != 0.0) all_zero = false;
        }
      if (any && all_zero) {
        ++count;
        lo = std::min(lo, res.duals.lambda_d[d]);
        hi = std::max(hi, res.duals.lambda_d[d]);
      }
    }
    c.expect(count >= 2, "several consumers are served by zero-emission units");
    c.expect(hi - lo <= 1e-6, "zero-emission consumers share the adjustment");
  });

  if (suite.failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", suite.failures);
  return 1;
}
