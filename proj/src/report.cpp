#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "carbon/caseio.hpp"
#include "carbon/errors.hpp"
#include "carbon/validate.hpp"

namespace carbon {

using nlohmann::json;

namespace {

std::string fixed6(double v) {
  if (std::abs(v) < 5e-7) v = 0.0;  // avoid "-0.000000" cells
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string line_key(const Line& l) { return l.from_bus + "-" + l.to_bus; }

template <typename Ids, typename Values>
json id_map(const Ids& ids, const Values& values) {
  json o = json::object();
  for (size_t i = 0; i < values.size(); ++i) o[ids[i]] = values[i];
  return o;
}

}  // namespace

SolveArtifacts make_artifacts(const SystemCase& sys, ClearingResult result) {
  SolveArtifacts art;
  art.prices = carbon_adjusted_prices(result.duals, sys, result.solution);
  art.settlement = settle(sys, result.solution, result.duals);
  art.result = std::move(result);
  return art;
}

std::string emit_report(const SystemCase& sys, const SolveArtifacts& art,
                        ReportFormat format) {
  const ClearingSolution& sol = art.result.solution;
  const DualSolution& duals = art.result.duals;
  double load = sol.total_load();
  double emissions = sol.total_emissions(sys);

  if (format == ReportFormat::Csv) {
    std::ostringstream os;
    os << "section,key,id,value\n";
    auto row = [&](const char* section, const char* key, const std::string& id,
                   double value) {
      os << section << "," << key << "," << csv_quote(id) << "," << fixed6(value)
         << "\n";
    };
    row("summary", "objective", "", sol.objective);
    row("summary", "utility_total", "", sol.utility_total);
    row("summary", "carbon_cost_total", "", sol.carbon_cost_total);
    row("summary", "gen_cost_total", "", sol.gen_cost_total);
    row("summary", "total_load", "", load);
    row("summary", "total_generation", "", sol.total_generation());
    row("summary", "total_emissions", "", emissions);
    row("summary", "average_emissions", "", load > 0.0 ? emissions / load : 0.0);
    row("summary", "congestion_rent", "", art.prices.congestion_rent);
    row("summary", "carbon_revenue", "", art.prices.carbon_revenue);
    row("summary", "surplus", "", art.settlement.surplus);
    for (size_t g = 0; g < sys.generators.size(); ++g) {
      const auto& id = sys.generators[g].id;
      row("generator", "dispatch", id, sol.p_g[g]);
      row("generator", "price", id, art.prices.gen_price[g]);
      row("generator", "surplus", id, art.settlement.generator_surplus[g]);
    }
    for (size_t d = 0; d < sys.consumers.size(); ++d) {
      const auto& id = sys.consumers[d].id;
      row("consumer", "dispatch", id, sol.p_d[d]);
      row("consumer", "price", id, art.prices.load_price[d]);
      row("consumer", "surplus", id, art.settlement.consumer_surplus[d]);
      if (sol.has_allocation) row("consumer", "emissions", id, sol.e_d[d]);
    }
    for (size_t i = 0; i < sys.buses.size(); ++i)
      row("bus", "lambda_p", sys.buses[i].id, duals.lambda_p[i]);
    auto flows = line_flows(sys, sol.theta);
    for (size_t l = 0; l < sys.lines.size(); ++l)
      row("line", "flow", line_key(sys.lines[l]), flows[l]);
    return os.str();
  }

  json doc;
  doc["case"] = sys.name;
  doc["objective"] = sol.objective;
  doc["utility_total"] = sol.utility_total;
  doc["carbon_cost_total"] = sol.carbon_cost_total;
  doc["gen_cost_total"] = sol.gen_cost_total;
  doc["total_load"] = load;
  doc["total_emissions"] = emissions;
  doc["average_emissions"] = load > 0.0 ? emissions / load : 0.0;
  doc["has_allocation"] = sol.has_allocation;

  std::vector<std::string> gen_ids, load_ids, bus_ids;
  for (const auto& g : sys.generators) gen_ids.push_back(g.id);
  for (const auto& d : sys.consumers) load_ids.push_back(d.id);
  for (const auto& b : sys.buses) bus_ids.push_back(b.id);

  doc["p_g"] = id_map(gen_ids, sol.p_g);
  doc["p_d"] = id_map(load_ids, sol.p_d);
  doc["theta"] = id_map(bus_ids, sol.theta);
  if (sol.has_allocation) {
    doc["e_d"] = id_map(load_ids, sol.e_d);
    json pi = json::array();
    for (int g = 0; g < sol.pi.num_generators; ++g)
      for (int d = 0; d < sol.pi.num_consumers; ++d)
        if (sol.pi.at(g, d) > 1e-12)
          pi.push_back({{"generator", gen_ids[g]},
                        {"consumer", load_ids[d]},
                        {"mw", sol.pi.at(g, d)}});
    doc["pi"] = std::move(pi);
  }

  json dj;
  dj["lambda_p"] = id_map(bus_ids, duals.lambda_p);
  dj["lambda_g"] = id_map(gen_ids, duals.lambda_g);
  dj["lambda_d"] = id_map(load_ids, duals.lambda_d);
  dj["lambda_e"] = id_map(load_ids, duals.lambda_e);
  std::vector<std::string> line_ids;
  for (const auto& l : sys.lines) line_ids.push_back(line_key(l));
  dj["eta_line_up"] = id_map(line_ids, duals.eta_line_up);
  dj["eta_line_dn"] = id_map(line_ids, duals.eta_line_dn);
  dj["eta_g_up"] = id_map(gen_ids, duals.eta_g_up);
  dj["eta_g_dn"] = id_map(gen_ids, duals.eta_g_dn);
  dj["eta_d_up"] = id_map(load_ids, duals.eta_d_up);
  dj["eta_d_dn"] = id_map(load_ids, duals.eta_d_dn);
  dj["price_selection_applied"] = duals.price_selection_applied;
  doc["duals"] = std::move(dj);

  doc["prices"] = {{"generator", id_map(gen_ids, art.prices.gen_price)},
                   {"consumer", id_map(load_ids, art.prices.load_price)}};
  doc["settlement"] = {{"consumer_payments", art.settlement.consumer_payments},
                       {"generator_revenues", art.settlement.generator_revenues},
                       {"congestion_rent", art.settlement.congestion_rent},
                       {"carbon_revenue", art.settlement.carbon_revenue},
                       {"surplus", art.settlement.surplus}};
  return doc.dump(2) + "\n";
}

namespace {

std::vector<double> values_by_id(const json& obj,
                                 const std::vector<std::string>& ids,
                                 const std::string& where) {
  std::vector<double> out(ids.size(), 0.0);
  for (size_t i = 0; i < ids.size(); ++i) {
    auto it = obj.find(ids[i]);
    if (it == obj.end())
      throw ParseError("missing entry '" + ids[i] + "'", where);
    out[i] = it->get<double>();
  }
  return out;
}

}  // namespace

ClearingResult parse_solution(const SystemCase& sys, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid solution document: ") + e.what(),
                     "byte " + std::to_string(e.byte));
  }

  std::vector<std::string> gen_ids, load_ids, bus_ids, line_ids;
  for (const auto& g : sys.generators) gen_ids.push_back(g.id);
  for (const auto& d : sys.consumers) load_ids.push_back(d.id);
  for (const auto& b : sys.buses) bus_ids.push_back(b.id);
  for (const auto& l : sys.lines) line_ids.push_back(line_key(l));

  ClearingResult out;
  ClearingSolution& sol = out.solution;
  sol.p_g = values_by_id(doc.at("p_g"), gen_ids, "p_g");
  sol.p_d = values_by_id(doc.at("p_d"), load_ids, "p_d");
  sol.theta = values_by_id(doc.at("theta"), bus_ids, "theta");
  sol.has_allocation = doc.value("has_allocation", doc.contains("pi"));
  if (sol.has_allocation) {
    sol.e_d = values_by_id(doc.at("e_d"), load_ids, "e_d");
    sol.pi.num_generators = static_cast<int>(gen_ids.size());
    sol.pi.num_consumers = static_cast<int>(load_ids.size());
    sol.pi.pi.assign(gen_ids.size() * load_ids.size(), 0.0);
    std::unordered_map<std::string, int> gidx, didx;
    for (size_t i = 0; i < gen_ids.size(); ++i) gidx[gen_ids[i]] = static_cast<int>(i);
    for (size_t i = 0; i < load_ids.size(); ++i) didx[load_ids[i]] = static_cast<int>(i);
    for (const auto& entry : doc.at("pi")) {
      auto g = gidx.find(entry.at("generator").get<std::string>());
      auto d = didx.find(entry.at("consumer").get<std::string>());
      if (g == gidx.end() || d == didx.end())
        throw ParseError("allocation references unknown agent", "pi");
      sol.pi.at(g->second, d->second) = entry.at("mw").get<double>();
    }
    sol.pi.row_marginals = sol.p_g;
    sol.pi.col_marginals = sol.p_d;
  }
  for (size_t d = 0; d < sys.consumers.size(); ++d)
    sol.utility_total += sys.consumers[d].utility * sol.p_d[d];
  for (size_t g = 0; g < sys.generators.size(); ++g)
    sol.gen_cost_total += sys.generators[g].cost * sol.p_g[g];
  if (sol.has_allocation)
    for (size_t d = 0; d < sys.consumers.size(); ++d)
      sol.carbon_cost_total += sys.consumers[d].carbon_cost * sol.e_d[d];
  sol.objective = sol.utility_total - sol.carbon_cost_total - sol.gen_cost_total;

  const json& dj = doc.at("duals");
  DualSolution& duals = out.duals;
  duals.lambda_p = values_by_id(dj.at("lambda_p"), bus_ids, "lambda_p");
  duals.lambda_g = values_by_id(dj.at("lambda_g"), gen_ids, "lambda_g");
  duals.lambda_d = values_by_id(dj.at("lambda_d"), load_ids, "lambda_d");
  duals.lambda_e = values_by_id(dj.at("lambda_e"), load_ids, "lambda_e");
  duals.eta_line_up = values_by_id(dj.at("eta_line_up"), line_ids, "eta_line_up");
  duals.eta_line_dn = values_by_id(dj.at("eta_line_dn"), line_ids, "eta_line_dn");
  duals.eta_g_up = values_by_id(dj.at("eta_g_up"), gen_ids, "eta_g_up");
  duals.eta_g_dn = values_by_id(dj.at("eta_g_dn"), gen_ids, "eta_g_dn");
  duals.eta_d_up = values_by_id(dj.at("eta_d_up"), load_ids, "eta_d_up");
  duals.eta_d_dn = values_by_id(dj.at("eta_d_dn"), load_ids, "eta_d_dn");
  return out;
}

}  // namespace carbon
