#include "carbon/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "carbon/caseio.hpp"
#include "carbon/errors.hpp"
#include "carbon/random_case.hpp"

namespace carbon {

namespace {

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
}

double env_tolerance() {
  if (const char* env = std::getenv("CARBON_CLEAR_TOL")) {
    try {
      double v = std::stod(env);
      if (v > 0.0) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid CARBON_CLEAR_TOL ('" << env << "')\n";
  }
  return 1e-6;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "structured") return ReportFormat::Structured;
  throw CLI::ValidationError("--format", "expected 'csv' or 'structured'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(int argc, const char* const* argv) {
  CLI::App app{"carbon-aware electricity market clearing"};
  app.require_subcommand(1);
  double default_tol = env_tolerance();

  // solve
  auto* solve = app.add_subcommand("solve", "clear a case and report the result");
  std::string solve_case, solve_out, solve_format = "structured";
  double solve_tol = default_tol;
  solve->add_option("case", solve_case, "case file or CSV directory")->required();
  solve->add_option("--tol", solve_tol, "KKT tolerance");
  solve->add_option("--out", solve_out, "output path (default stdout)");
  solve->add_option("--format", solve_format, "csv or structured");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "vary one consumer's carbon cost");
  std::string sweep_case, sweep_consumer, sweep_range, sweep_out;
  double sweep_tol = default_tol;
  sweep->add_option("case", sweep_case)->required();
  sweep->add_option("--consumer", sweep_consumer, "target consumer id")->required();
  sweep->add_option("--carbon-cost", sweep_range, "range start:stop:step")->required();
  sweep->add_option("--out", sweep_out);
  sweep->add_option("--tol", sweep_tol);

  // verify
  auto* verify = app.add_subcommand("verify", "audit a stored solution");
  std::string verify_case, verify_solution;
  double verify_tol = default_tol;
  verify->add_option("case", verify_case)->required();
  verify->add_option("solution", verify_solution, "structured report file")->required();
  verify->add_option("--tol", verify_tol);

  // compare
  auto* compare = app.add_subcommand("compare", "check a reduced-model equivalence");
  std::string compare_case;
  double compare_tax = 0.0;
  bool compare_standard = false;
  double compare_tol = default_tol;
  compare->add_option("case", compare_case)->required();
  auto* tax_opt = compare->add_option("--tax", compare_tax, "uniform tax rate");
  auto* std_opt = compare->add_flag("--standard", compare_standard,
                                    "compare against the carbon-agnostic model");
  tax_opt->excludes(std_opt);
  compare->add_option("--tol", compare_tol);

  // allocate
  auto* allocate = app.add_subcommand("allocate", "allocate a fixed dispatch");
  std::string alloc_case, alloc_dispatch, alloc_out;
  allocate->add_option("case", alloc_case)->required();
  allocate->add_option("--dispatch", alloc_dispatch, "JSON file with p_g and p_d")
      ->required();
  allocate->add_option("--out", alloc_out);

  // random
  auto* random = app.add_subcommand("random", "generate a synthetic case");
  int rnd_buses = 0, rnd_gens = 0, rnd_loads = 0;
  std::uint64_t rnd_seed = 0;
  std::string rnd_out;
  random->add_option("--buses", rnd_buses)->required();
  random->add_option("--gens", rnd_gens)->required();
  random->add_option("--loads", rnd_loads)->required();
  random->add_option("--seed", rnd_seed)->required();
  random->add_option("--out", rnd_out, "case file to write (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (solve->parsed()) {
    SystemCase sys = load_case(solve_case);
    SolveOptions opts;
    opts.kkt_tolerance = solve_tol;
    SolveArtifacts art = make_artifacts(sys, solve_clearing(sys, opts));
    write_output(solve_out, emit_report(sys, art, parse_format(solve_format)));
    return 0;
  }

  if (sweep->parsed()) {
    SystemCase sys = load_case(sweep_case);
    SweepSpec spec;
    spec.consumer_id = sweep_consumer;
    if (std::sscanf(sweep_range.c_str(), "%lf:%lf:%lf", &spec.start, &spec.stop,
                    &spec.step) != 3)
      throw Error("expected --carbon-cost start:stop:step");
    SolveOptions opts;
    opts.kkt_tolerance = sweep_tol;
    auto rows = run_sweep(sys, spec, opts);
    write_output(sweep_out, sweep_csv(sys, rows));
    return 0;
  }

  if (verify->parsed()) {
    SystemCase sys = load_case(verify_case);
    ClearingResult stored = parse_solution(sys, read_text(verify_solution));
    EquilibriumReport rep =
        verify_equilibrium(sys, stored.solution, stored.duals, verify_tol);
    std::cout << "max_residual=" << rep.residuals.max_residual
              << " max_gap=" << rep.responses.max_gap
              << " pass=" << (rep.pass ? "true" : "false") << "\n";
    if (!rep.pass) {
      std::ostringstream os;
      os << "error: verification_failed: max_residual="
         << rep.residuals.max_residual;
      if (const ResidualEntry* w = rep.residuals.worst())
        os << " worst=" << w->category << "/" << w->key;
      std::cerr << os.str() << "\n";
      for (const auto& e : rep.residuals.entries)
        if (e.normalized > verify_tol)
          std::cerr << "  " << e.category << " " << e.key << " residual="
                    << e.normalized << "\n";
      return 1;
    }
    return 0;
  }

  if (compare->parsed()) {
    if (!compare_standard && tax_opt->count() == 0)
      throw CLI::ValidationError("compare", "pass --tax X or --standard");
    SystemCase sys = load_case(compare_case);
    SolveOptions opts;
    opts.kkt_tolerance = compare_tol;
    EquivalenceReport rep = compare_standard
                                ? equivalence_standard(sys, opts)
                                : equivalence_tax(sys, compare_tax, opts);
    std::cout << "objective_carbon=" << rep.objective_a
              << " objective_reduced=" << rep.objective_b
              << " relative_gap=" << rep.objective_gap
              << " cross_kkt=" << (rep.cross_kkt_pass ? "pass" : "fail")
              << " pass=" << (rep.pass ? "true" : "false") << "\n";
    if (!rep.pass) {
      std::cerr << "error: equivalence_failed: relative_gap=" << rep.objective_gap
                << "\n";
      return 1;
    }
    return 0;
  }

  if (allocate->parsed()) {
    SystemCase sys = load_case(alloc_case);
    nlohmann::json doc = nlohmann::json::parse(read_text(alloc_dispatch));
    std::vector<double> p_g, p_d, e_g, c_d;
    for (const auto& g : sys.generators) {
      p_g.push_back(doc.at("p_g").at(g.id).get<double>());
      e_g.push_back(g.emission);
    }
    for (const auto& d : sys.consumers) {
      p_d.push_back(doc.at("p_d").at(d.id).get<double>());
      c_d.push_back(d.carbon_cost);
    }
    auto [pi, duals] = allocate_lp(p_g, p_d, e_g, c_d);
    auto e_d = emissions_of(pi, e_g);
    nlohmann::json out;
    out["objective"] = allocation_cost(pi, e_g, c_d);
    nlohmann::json entries = nlohmann::json::array();
    for (int g = 0; g < pi.num_generators; ++g)
      for (int d = 0; d < pi.num_consumers; ++d)
        if (pi.at(g, d) > 1e-12)
          entries.push_back({{"generator", sys.generators[g].id},
                             {"consumer", sys.consumers[d].id},
                             {"mw", pi.at(g, d)}});
    out["pi"] = std::move(entries);
    nlohmann::json em = nlohmann::json::object();
    for (size_t d = 0; d < e_d.size(); ++d) em[sys.consumers[d].id] = e_d[d];
    out["e_d"] = std::move(em);
    write_output(alloc_out, out.dump(2) + "\n");
    return 0;
  }

  if (random->parsed()) {
    SystemCase sys = random_case(rnd_buses, rnd_gens, rnd_loads, rnd_seed);
    write_output(rnd_out, serialize_case(sys));
    return 0;
  }

  return 2;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid_case: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 1;
  } catch (const SolveError& e) {
    const char* kind = e.kind() == SolveFailure::Infeasible      ? "infeasible"
                       : e.kind() == SolveFailure::IterationLimit ? "iteration_limit"
                                                                  : "internal";
    std::cerr << "error: " << kind << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: domain: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace carbon
