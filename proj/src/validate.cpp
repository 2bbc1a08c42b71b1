#include "carbon/validate.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace carbon {

const char* issue_code_name(IssueCode code) {
  switch (code) {
    case IssueCode::DuplicateId: return "DuplicateId";
    case IssueCode::UnknownBus: return "UnknownBus";
    case IssueCode::NoReferenceBus: return "NoReferenceBus";
    case IssueCode::MultipleReferenceBuses: return "MultipleReferenceBuses";
    case IssueCode::NegativeBound: return "NegativeBound";
    case IssueCode::InvertedBounds: return "InvertedBounds";
    case IssueCode::InfeasibleAggregateBounds: return "InfeasibleAggregateBounds";
    case IssueCode::SelfLoop: return "SelfLoop";
    case IssueCode::NonpositiveSusceptance: return "NonpositiveSusceptance";
    case IssueCode::NonFiniteValue: return "NonFiniteValue";
    case IssueCode::Disconnected: return "Disconnected";
  }
  return "Unknown";
}

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << "case validation failed:";
  for (const auto& i : issues) os << " [" << issue_code_name(i.code) << "] " << i.message << ";";
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

CaseIndex::CaseIndex(const SystemCase& s) : sys(&s) {
  for (int i = 0; i < static_cast<int>(s.buses.size()); ++i) {
    bus_of_id.emplace(s.buses[i].id, i);
    if (s.buses[i].is_reference && reference < 0) reference = i;
  }
  gens_at.resize(s.buses.size());
  loads_at.resize(s.buses.size());
  gen_bus.reserve(s.generators.size());
  for (int g = 0; g < static_cast<int>(s.generators.size()); ++g) {
    int b = bus_index(s.generators[g].bus);
    gen_bus.push_back(b);
    if (b >= 0) gens_at[b].push_back(g);
  }
  load_bus.reserve(s.consumers.size());
  for (int d = 0; d < static_cast<int>(s.consumers.size()); ++d) {
    int b = bus_index(s.consumers[d].bus);
    load_bus.push_back(b);
    if (b >= 0) loads_at[b].push_back(d);
  }
  line_ends.reserve(s.lines.size());
  for (const auto& l : s.lines)
    line_ends.emplace_back(bus_index(l.from_bus), bus_index(l.to_bus));
}

bool is_connected(const SystemCase& sys) {
  if (sys.buses.empty()) return false;
  std::unordered_map<std::string, int> idx;
  for (int i = 0; i < static_cast<int>(sys.buses.size()); ++i)
    idx.emplace(sys.buses[i].id, i);
  std::vector<std::vector<int>> adj(sys.buses.size());
  for (const auto& l : sys.lines) {
    auto a = idx.find(l.from_bus);
    auto b = idx.find(l.to_bus);
    if (a == idx.end() || b == idx.end() || a->second == b->second) continue;
    adj[a->second].push_back(b->second);
    adj[b->second].push_back(a->second);
  }
  std::vector<char> seen(sys.buses.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == static_cast<int>(sys.buses.size());
}

std::vector<ValidationIssue> validate_case(const SystemCase& sys) {
  std::vector<ValidationIssue> issues;
  auto add = [&](IssueCode code, const std::string& id, std::string msg) {
    issues.push_back({code, id, std::move(msg)});
  };

  std::set<std::string> bus_ids;
  int refs = 0;
  for (const auto& b : sys.buses) {
    if (!bus_ids.insert(b.id).second)
      add(IssueCode::DuplicateId, b.id, "duplicate bus id '" + b.id + "'");
    if (b.is_reference) ++refs;
  }
  if (refs == 0)
    add(IssueCode::NoReferenceBus, "", "no bus is flagged as reference");
  else if (refs > 1)
    add(IssueCode::MultipleReferenceBuses, "",
        std::to_string(refs) + " buses are flagged as reference");

  auto check_finite = [&](double v, const std::string& id, const char* what) {
    if (!std::isfinite(v))
      add(IssueCode::NonFiniteValue, id, std::string(what) + " of '" + id + "' is not finite");
  };

  for (const auto& l : sys.lines) {
    std::string lid = l.from_bus + "-" + l.to_bus;
    if (!bus_ids.count(l.from_bus))
      add(IssueCode::UnknownBus, lid, "line references unknown bus '" + l.from_bus + "'");
    if (!bus_ids.count(l.to_bus))
      add(IssueCode::UnknownBus, lid, "line references unknown bus '" + l.to_bus + "'");
    if (l.from_bus == l.to_bus)
      add(IssueCode::SelfLoop, lid, "line connects bus '" + l.from_bus + "' to itself");
    if (!(l.susceptance > 0.0))
      add(IssueCode::NonpositiveSusceptance, lid,
          "line '" + lid + "' susceptance must be positive");
    if (l.limit && *l.limit < 0.0)
      add(IssueCode::NegativeBound, lid, "line '" + lid + "' limit is negative");
  }

  std::set<std::string> gen_ids;
  double gen_pmin_sum = 0.0, gen_pmax_sum = 0.0;
  for (const auto& g : sys.generators) {
    if (!gen_ids.insert(g.id).second)
      add(IssueCode::DuplicateId, g.id, "duplicate generator id '" + g.id + "'");
    if (!bus_ids.count(g.bus))
      add(IssueCode::UnknownBus, g.id, "generator '" + g.id + "' references unknown bus '" + g.bus + "'");
    if (g.p_min < 0.0)
      add(IssueCode::NegativeBound, g.id, "generator '" + g.id + "' has p_min < 0");
    if (g.p_min > g.p_max)
      add(IssueCode::InvertedBounds, g.id, "generator '" + g.id + "' has p_min > p_max");
    if (g.emission < 0.0)
      add(IssueCode::NegativeBound, g.id, "generator '" + g.id + "' has negative emission factor");
    check_finite(g.cost, g.id, "cost");
    check_finite(g.p_max, g.id, "p_max");
    gen_pmin_sum += g.p_min;
    gen_pmax_sum += g.p_max;
  }

  std::set<std::string> load_ids;
  double load_pmin_sum = 0.0, load_pmax_sum = 0.0;
  for (const auto& d : sys.consumers) {
    if (!load_ids.insert(d.id).second)
      add(IssueCode::DuplicateId, d.id, "duplicate consumer id '" + d.id + "'");
    if (!bus_ids.count(d.bus))
      add(IssueCode::UnknownBus, d.id, "consumer '" + d.id + "' references unknown bus '" + d.bus + "'");
    if (d.p_min < 0.0)
      add(IssueCode::NegativeBound, d.id, "consumer '" + d.id + "' has p_min < 0");
    if (d.p_min > d.p_max)
      add(IssueCode::InvertedBounds, d.id, "consumer '" + d.id + "' has p_min > p_max");
    if (d.carbon_cost < 0.0)
      add(IssueCode::NegativeBound, d.id, "consumer '" + d.id + "' has negative carbon cost");
    check_finite(d.utility, d.id, "utility");
    check_finite(d.p_max, d.id, "p_max");
    load_pmin_sum += d.p_min;
    load_pmax_sum += d.p_max;
  }

  // Necessary (not sufficient) aggregate feasibility: minimum consumption
  // must be coverable and minimum generation absorbable.
  if (load_pmin_sum > gen_pmax_sum)
    add(IssueCode::InfeasibleAggregateBounds, "",
        "total consumer p_min exceeds total generator p_max");
  if (gen_pmin_sum > load_pmax_sum)
    add(IssueCode::InfeasibleAggregateBounds, "",
        "total generator p_min exceeds total consumer p_max");

  if (!sys.buses.empty() && issues.empty() && !is_connected(sys))
    add(IssueCode::Disconnected, "", "network is not connected");

  return issues;
}

const SystemCase& require_valid(const SystemCase& sys) {
  auto issues = validate_case(sys);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return sys;
}

}  // namespace carbon
