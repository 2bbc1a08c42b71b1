#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "carbon/caseio.hpp"
#include "carbon/errors.hpp"

namespace carbon {

std::vector<SweepRow> run_sweep(const SystemCase& sys, const SweepSpec& spec,
                                const SolveOptions& opts) {
  if (!(spec.step > 0.0)) throw Error("sweep step must be positive");
  if (spec.start > spec.stop) throw Error("sweep start must not exceed stop");
  int target = -1;
  for (size_t d = 0; d < sys.consumers.size(); ++d)
    if (sys.consumers[d].id == spec.consumer_id) target = static_cast<int>(d);
  if (target < 0)
    throw UnknownConsumer("no consumer with id '" + spec.consumer_id + "'");

  std::vector<double> values;
  for (double v = spec.start; v <= spec.stop + 1e-9 * (1.0 + std::abs(spec.stop));
       v += spec.step)
    values.push_back(v);

  // Steps are pure solves of independent case copies.
  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(values.size());
  for (double v : values)
    jobs.push_back(std::async(std::launch::async, [&, v]() {
      SystemCase stepped = sys;
      stepped.consumers[target].carbon_cost = v;
      ClearingResult res = solve_clearing(stepped, opts);
      PriceReport prices = carbon_adjusted_prices(res.duals, stepped, res.solution);
      SweepRow row;
      row.value = v;
      row.total_demand = res.solution.total_load();
      row.gen_cost = res.solution.gen_cost_total;
      row.total_emissions = res.solution.total_emissions(stepped);
      row.average_emissions =
          row.total_demand > 0.0 ? row.total_emissions / row.total_demand : 0.0;
      row.gen_price = std::move(prices.gen_price);
      row.load_price = std::move(prices.load_price);
      return row;
    }));

  std::vector<SweepRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::string sweep_csv(const SystemCase& sys, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "carbon_cost,total_demand,gen_cost,total_emissions,average_emissions";
  for (const auto& g : sys.generators) os << ",gen_price_" << g.id;
  for (const auto& d : sys.consumers) os << ",load_price_" << d.id;
  os << "\n";
  char buf[64];
  auto put = [&](double v) {
    if (std::abs(v) < 5e-7) v = 0.0;
    std::snprintf(buf, sizeof buf, "%.6f", v);
    os << buf;
  };
  for (const auto& r : rows) {
    put(r.value);
    os << ",";
    put(r.total_demand);
    os << ",";
    put(r.gen_cost);
    os << ",";
    put(r.total_emissions);
    os << ",";
    put(r.average_emissions);
    for (double v : r.gen_price) {
      os << ",";
      put(v);
    }
    for (double v : r.load_price) {
      os << ",";
      put(v);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace carbon
