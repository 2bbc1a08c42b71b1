#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "carbon/caseio.hpp"
#include "carbon/cli.hpp"
#include "carbon/errors.hpp"
#include "carbon/fixtures.hpp"
#include "carbon/random_case.hpp"
#include "testutil.hpp"

using namespace carbon;
using testutil::near;
using testutil::near_abs;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("carbon_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

bool cases_equal(const SystemCase& a, const SystemCase& b) {
  if (a.buses.size() != b.buses.size() || a.lines.size() != b.lines.size() ||
      a.generators.size() != b.generators.size() ||
      a.consumers.size() != b.consumers.size())
    return false;
  for (size_t i = 0; i < a.buses.size(); ++i)
    if (a.buses[i].id != b.buses[i].id ||
        a.buses[i].is_reference != b.buses[i].is_reference)
      return false;
  for (size_t i = 0; i < a.lines.size(); ++i) {
    if (a.lines[i].from_bus != b.lines[i].from_bus ||
        a.lines[i].to_bus != b.lines[i].to_bus ||
        a.lines[i].susceptance != b.lines[i].susceptance ||
        a.lines[i].limit.has_value() != b.lines[i].limit.has_value())
      return false;
    if (a.lines[i].limit && *a.lines[i].limit != *b.lines[i].limit) return false;
  }
  for (size_t i = 0; i < a.generators.size(); ++i) {
    const auto &x = a.generators[i], &y = b.generators[i];
    if (x.id != y.id || x.bus != y.bus || x.cost != y.cost ||
        x.emission != y.emission || x.p_min != y.p_min || x.p_max != y.p_max)
      return false;
  }
  for (size_t i = 0; i < a.consumers.size(); ++i) {
    const auto &x = a.consumers[i], &y = b.consumers[i];
    if (x.id != y.id || x.bus != y.bus || x.utility != y.utility ||
        x.carbon_cost != y.carbon_cost || x.p_min != y.p_min ||
        x.p_max != y.p_max)
      return false;
  }
  return true;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"carbon_clear"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("case document round trip") {
  SystemCase sys = fixture_t1({0.0, 15.0, 5.0});
  std::string text = serialize_case(sys);
  SystemCase back = parse_case_text(text);
  CHECK(cases_equal(sys, back));
  CHECK(serialize_case(back) == text);
}

TEST_CASE("missing fields are named in schema errors") {
  const char* doc = R"({
    "name": "broken",
    "buses": [{"id": "1", "reference": true}],
    "lines": [],
    "generators": [{"id": "g1", "cost": 8, "emission": 0.6, "pmin": 0, "pmax": 20}],
    "consumers": [{"id": "d1", "bus": "1", "utility": 18, "carbon_cost": 0,
                   "pmin": 0, "pmax": 15}]
  })";
  try {
    parse_case_text(doc);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("'bus'") != std::string::npos);
    CHECK(e.location().find("generators[0]") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry a byte location") {
  CHECK_THROWS_AS(parse_case_text("{ not json"), ParseError);
}

TEST_CASE("validation failures propagate through parsing") {
  SystemCase sys = fixture_t1({0.0, 0.0, 0.0});
  sys.generators[0].p_min = 90.0;
  CHECK_THROWS_AS(parse_case_text(serialize_case(sys)), ValidationError);
}

TEST_CASE("a hand-written document solves to the reference dispatch") {
  const char* doc = R"({
    "name": "three-bus",
    "buses": [{"id": "1", "reference": true}, {"id": "2"}, {"id": "3"}],
    "lines": [
      {"from": "1", "to": "2", "susceptance": 1.0},
      {"from": "1", "to": "3", "susceptance": 1.0},
      {"from": "2", "to": "3", "susceptance": 1.0}
    ],
    "generators": [
      {"id": "g1", "bus": "1", "cost": 8, "emission": 0.6, "pmin": 0, "pmax": 20},
      {"id": "g2", "bus": "2", "cost": 10, "emission": 0.2, "pmin": 0, "pmax": 10},
      {"id": "g3", "bus": "3", "cost": 6, "emission": 1.0, "pmin": 0, "pmax": 25}
    ],
    "consumers": [
      {"id": "d1", "bus": "1", "utility": 18, "carbon_cost": 0, "pmin": 0, "pmax": 15},
      {"id": "d2", "bus": "2", "utility": 18, "carbon_cost": 0, "pmin": 0, "pmax": 15},
      {"id": "d3", "bus": "3", "utility": 18, "carbon_cost": 0, "pmin": 0, "pmax": 15}
    ]
  })";
  SystemCase sys = parse_case_text(doc);
  ClearingResult res = solve_standard(sys);
  CHECK(near(res.solution.gen_cost_total, 310.0));
  CHECK(near_abs(res.solution.total_emissions(sys), 37.0, 1e-6));
}

TEST_CASE("csv directory round trip") {
  TempDir dir;
  SystemCase sys = fixture_t1({0.0, 15.0, 5.0});
  write_case_csv(sys, dir.path.string());
  SystemCase back = parse_case_csv(dir.path.string());
  back.name = sys.name;
  CHECK(cases_equal(sys, back));
}

TEST_CASE("csv ingestion diagnoses missing files, headers and numbers") {
  TempDir dir;
  SystemCase sys = fixture_t1({0.0, 0.0, 0.0});
  write_case_csv(sys, dir.path.string());
  SUBCASE("missing file") {
    fs::remove(dir.path / "consumers.csv");
    CHECK_THROWS_AS(parse_case_csv(dir.path.string()), IoError);
  }
  SUBCASE("header mismatch") {
    write(dir.file("generators.csv"), "id,bus,cost,pmin,pmax\ng1,1,8,0,20\n");
    try {
      parse_case_csv(dir.path.string());
      FAIL("expected header mismatch");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("emission") != std::string::npos);
    }
  }
  SUBCASE("bad number") {
    write(dir.file("lines.csv"), "from,to,susceptance,limit\n1,2,abc,\n");
    try {
      parse_case_csv(dir.path.string());
      FAIL("expected bad number");
    } catch (const ParseError& e) {
      CHECK(e.location().find("row 2") != std::string::npos);
    }
  }
}

TEST_CASE("random case survives a csv round trip and solves identically") {
  TempDir dir;
  SystemCase sys = random_case(73, 158, 51, 27);
  write_case_csv(sys, dir.path.string());
  SystemCase back = parse_case_csv(dir.path.string());
  SolveOptions opts;
  opts.price_selection = PriceSelection::None;
  ClearingResult a = solve_clearing(sys, opts);
  ClearingResult b = solve_clearing(back, opts);
  CHECK(near(a.solution.objective, b.solution.objective, 1e-9));
}

TEST_CASE("csv report has fixed six-decimal cells and reparses") {
  SystemCase sys = fixture_t1({15.0, 15.0, 15.0});
  SolveArtifacts art = make_artifacts(sys, solve_clearing(sys));
  std::string csv = emit_report(sys, art, ReportFormat::Csv);
  CHECK(csv.find("summary,gen_cost_total,,260.000000\n") != std::string::npos);
  CHECK(csv.find("\r") == std::string::npos);
  // Every data row parses back to the same 6-decimal value.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "section,key,id,value");
  int rows = 0;
  while (std::getline(in, line)) {
    auto comma = line.rfind(',');
    double v = std::stod(line.substr(comma + 1));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    CHECK(line.substr(comma + 1) == buf);
    ++rows;
  }
  CHECK(rows > 10);
}

TEST_CASE("structured report replays through the verifier") {
  SystemCase sys = fixture_t1({0.0, 15.0, 5.0});
  SolveArtifacts art = make_artifacts(sys, solve_clearing(sys));
  std::string text = emit_report(sys, art, ReportFormat::Structured);
  ClearingResult back = parse_solution(sys, text);
  EquilibriumReport rep = verify_equilibrium(sys, back.solution, back.duals);
  CHECK(rep.pass);
  CHECK(near(back.solution.objective, art.result.solution.objective, 1e-9));
}

TEST_CASE("sweep emissions match the reference column") {
  SystemCase sys = fixture_t1({0.0, 15.0, 0.0});
  SweepSpec spec{"d3", 0.0, 25.0, 5.0};
  auto rows = run_sweep(sys, spec);
  REQUIRE(rows.size() == 6);
  CHECK(near_abs(rows[0].total_emissions, 33.0, 1e-4));
  CHECK(near_abs(rows[1].total_emissions, 29.0, 1e-4));
  CHECK(near_abs(rows[2].total_emissions, 29.0, 1e-4));
  CHECK(near_abs(rows[3].total_emissions, 29.0, 1e-4));
  CHECK(near_abs(rows[5].total_emissions, 20.0, 1e-4));
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].total_demand <= rows[i - 1].total_demand + 1e-6);
}

TEST_CASE("a single-step sweep equals a standalone solve") {
  SystemCase sys = fixture_t1({0.0, 15.0, 0.0});
  SweepSpec spec{"d2", 15.0, 15.0, 1.0};
  auto rows = run_sweep(sys, spec);
  REQUIRE(rows.size() == 1);
  ClearingResult direct = solve_clearing(fixture_t1({0.0, 15.0, 0.0}));
  CHECK(near(rows[0].gen_cost, direct.solution.gen_cost_total, 1e-9));
  CHECK(near_abs(rows[0].total_demand, direct.solution.total_load(), 1e-9));
}

TEST_CASE("sweep rejects unknown consumers and bad ranges") {
  SystemCase sys = fixture_t1({0.0, 0.0, 0.0});
  CHECK_THROWS_AS(run_sweep(sys, {"zz", 0.0, 5.0, 1.0}), UnknownConsumer);
  CHECK_THROWS_AS(run_sweep(sys, {"d1", 0.0, 5.0, 0.0}), Error);
  CHECK_THROWS_AS(run_sweep(sys, {"d1", 5.0, 0.0, 1.0}), Error);
}

TEST_CASE("sweep csv is deterministic") {
  SystemCase sys = fixture_t1({0.0, 15.0, 0.0});
  SweepSpec spec{"d3", 0.0, 10.0, 5.0};
  std::string a = sweep_csv(sys, run_sweep(sys, spec));
  std::string b = sweep_csv(sys, run_sweep(sys, spec));
  CHECK(a == b);
  CHECK(a.find("carbon_cost,total_demand,gen_cost,total_emissions,average_emissions") == 0);
}

TEST_CASE("cli solve reports the taxed fixture prices") {
  TempDir dir;
  SystemCase sys = fixture_t1({15.0, 15.0, 15.0});
  write(dir.file("t1_tax.case"), serialize_case(sys));
  std::string out = dir.file("report.csv");
  CHECK(run_cli({"solve", dir.file("t1_tax.case"), "--format", "csv", "--out", out}) == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string csv = ss.str();
  CHECK(csv.find("generator,price,g1,9.000000") != std::string::npos);
  CHECK(csv.find("generator,price,g2,15.000000") != std::string::npos);
  CHECK(csv.find("generator,price,g3,3.000000") != std::string::npos);
}

TEST_CASE("cli verify accepts its own output and rejects a perturbed one") {
  TempDir dir;
  SystemCase sys = fixture_t1({0.0, 15.0, 5.0});
  write(dir.file("case.json"), serialize_case(sys));
  std::string sol_path = dir.file("solution.json");
  CHECK(run_cli({"solve", dir.file("case.json"), "--out", sol_path}) == 0);
  CHECK(run_cli({"verify", dir.file("case.json"), sol_path}) == 0);

  std::ifstream in(sol_path);
  nlohmann::json doc = nlohmann::json::parse(in);
  doc["p_g"]["g1"] = doc["p_g"]["g1"].get<double>() - 1.0;
  write(sol_path, doc.dump(2));
  CHECK(run_cli({"verify", dir.file("case.json"), sol_path}) == 1);
}

TEST_CASE("cli compare and random subcommands") {
  TempDir dir;
  write(dir.file("t1.case"), serialize_case(fixture_t1({0.0, 0.0, 0.0})));
  CHECK(run_cli({"compare", dir.file("t1.case"), "--tax", "15"}) == 0);
  CHECK(run_cli({"compare", dir.file("t1.case"), "--standard"}) == 0);
  std::string out = dir.file("random.case");
  CHECK(run_cli({"random", "--buses", "6", "--gens", "4", "--loads", "3",
                 "--seed", "9", "--out", out}) == 0);
  SystemCase sys = parse_case(out);
  CHECK(sys.buses.size() == 6);
}

TEST_CASE("cli allocate runs on a stored dispatch") {
  TempDir dir;
  write(dir.file("t1.case"), serialize_case(fixture_t1({0.0, 15.0, 5.0})));
  write(dir.file("dispatch.json"),
        R"({"p_g": {"g1": 20, "g2": 10, "g3": 15},
            "p_d": {"d1": 15, "d2": 15, "d3": 15}})");
  std::string out = dir.file("allocation.json");
  CHECK(run_cli({"allocate", dir.file("t1.case"), "--dispatch",
                 dir.file("dispatch.json"), "--out", out}) == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("\"objective\": 120.0") != std::string::npos);
}

TEST_CASE("cli maps usage and domain failures to exit codes") {
  CHECK(run_cli({"unknown-subcommand"}) == 2);
  CHECK(run_cli({"solve"}) == 2);
  CHECK(run_cli({"solve", "/nonexistent/file.case"}) == 1);
  TempDir dir;
  SystemCase sys = fixture_t1({0.0, 0.0, 0.0});
  sys.consumers[0].p_min = sys.consumers[0].p_max = 15.0;
  sys.lines = {{"1", "2", 1.0, 0.5}, {"1", "3", 1.0, 0.5}, {"2", "3", 1.0, 0.5}};
  sys.generators[0].p_max = 0.0;  // local generation gone, imports capped
  write(dir.file("infeasible.case"), serialize_case(sys));
  CHECK(run_cli({"solve", dir.file("infeasible.case")}) == 1);
}

TEST_CASE("an empty sweep result is a header-only document") {
  SystemCase sys = fixture_t1({0.0, 0.0, 0.0});
  std::string csv = sweep_csv(sys, {});
  CHECK(csv.find('\n') == csv.size() - 1);
  CHECK(csv.rfind("carbon_cost,", 0) == 0);
}

TEST_CASE("environment tolerance is honoured and bad values warn") {
  TempDir dir;
  write(dir.file("t1.case"), serialize_case(fixture_t1({0.0, 0.0, 0.0})));
  setenv("CARBON_CLEAR_TOL", "1e-8", 1);
  CHECK(run_cli({"solve", dir.file("t1.case"), "--out", dir.file("a.json")}) == 0);
  setenv("CARBON_CLEAR_TOL", "not-a-number", 1);
  CHECK(run_cli({"solve", dir.file("t1.case"), "--out", dir.file("b.json")}) == 0);
  unsetenv("CARBON_CLEAR_TOL");
}

TEST_CASE("help requests exit cleanly") {
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({"solve", "--help"}) == 0);
}
