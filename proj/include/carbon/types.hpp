#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace carbon {

struct Bus {
  std::string id;
  bool is_reference = false;
};

/// Transmission line with symmetric capacity in both flow directions.
/// An absent limit means the line is unconstrained (no limit rows are
/// generated for it in the clearing problem).
struct Line {
  std::string from_bus;
  std::string to_bus;
  double susceptance = 1.0;      // per-unit magnitude, > 0
  std::optional<double> limit;   // MW
};

struct Generator {
  std::string id;
  std::string bus;
  double cost = 0.0;      // $/MWh
  double emission = 0.0;  // tCO2/MWh
  double p_min = 0.0;     // MW
  double p_max = 0.0;     // MW
};

struct Consumer {
  std::string id;
  std::string bus;
  double utility = 0.0;      // $/MWh bid
  double carbon_cost = 0.0;  // $/tCO2
  double p_min = 0.0;        // MW
  double p_max = 0.0;        // MW
};

/// Immutable network-plus-bid description of one clearing interval.
/// MW and MWh coincide (single one-hour period).
struct SystemCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Consumer> consumers;
};

/// Lookup tables derived from a SystemCase. Built once per solve; the case
/// itself stays in declaration order so results are reproducible.
struct CaseIndex {
  explicit CaseIndex(const SystemCase& sys);

  const SystemCase* sys;
  std::unordered_map<std::string, int> bus_of_id;
  int reference = -1;                        // bus index with is_reference
  std::vector<int> gen_bus;                  // bus index per generator
  std::vector<int> load_bus;                 // bus index per consumer
  std::vector<std::vector<int>> gens_at;     // generator indices per bus
  std::vector<std::vector<int>> loads_at;    // consumer indices per bus
  std::vector<std::pair<int, int>> line_ends;  // (from, to) bus indices

  int bus_index(const std::string& id) const {
    auto it = bus_of_id.find(id);
    return it == bus_of_id.end() ? -1 : it->second;
  }
};

}  // namespace carbon
