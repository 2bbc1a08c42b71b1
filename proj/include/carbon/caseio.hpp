#pragma once

#include <string>
#include <vector>

#include "carbon/allocation.hpp"
#include "carbon/clearing.hpp"
#include "carbon/equilibrium.hpp"
#include "carbon/pricing.hpp"
#include "carbon/properties.hpp"
#include "carbon/types.hpp"

namespace carbon {

/// Case document format (JSON object):
///   name: string
///   buses:      [{id, reference?}]
///   lines:      [{from, to, susceptance, limit?}]
///   generators: [{id, bus, cost, emission, pmin, pmax}]
///   consumers:  [{id, bus, utility, carbon_cost, pmin, pmax}]
/// Parse errors carry the offending location; the result is validated.
SystemCase parse_case_text(const std::string& text);
SystemCase parse_case(const std::string& path);
std::string serialize_case(const SystemCase& sys);

/// Directory format: buses.csv, lines.csv, generators.csv, consumers.csv with
/// headers matching the document field names ("limit" may be empty for
/// unconstrained lines).
SystemCase parse_case_csv(const std::string& dir);
void write_case_csv(const SystemCase& sys, const std::string& dir);

/// Loads a case from either a document file or a CSV directory.
SystemCase load_case(const std::string& path);

enum class ReportFormat { Csv, Structured };

/// Everything reportable about one solved case.
struct SolveArtifacts {
  ClearingResult result;
  PriceReport prices;
  SettlementReport settlement;
};

SolveArtifacts make_artifacts(const SystemCase& sys, ClearingResult result);

/// CSV uses RFC-4180 quoting, '\n' line endings and fixed 6-decimal numbers;
/// the structured format is a JSON document mirroring the solution, dual,
/// price and settlement fields.
std::string emit_report(const SystemCase& sys, const SolveArtifacts& art,
                        ReportFormat format);

/// Reads a structured report back into a solution/dual pair (used by the
/// verification command).
ClearingResult parse_solution(const SystemCase& sys, const std::string& text);

struct SweepSpec {
  std::string consumer_id;
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
};

struct SweepRow {
  double value = 0.0;  // carbon cost applied to the target consumer
  double total_demand = 0.0;
  double gen_cost = 0.0;
  double total_emissions = 0.0;
  double average_emissions = 0.0;
  std::vector<double> gen_price;
  std::vector<double> load_price;
};

/// One clearing solve per parameter value; rows ordered by value. Steps are
/// independent solves, so they run concurrently.
std::vector<SweepRow> run_sweep(const SystemCase& sys, const SweepSpec& spec,
                                const SolveOptions& opts = {});

std::string sweep_csv(const SystemCase& sys, const std::vector<SweepRow>& rows);

}  // namespace carbon
