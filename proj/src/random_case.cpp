#include "carbon/random_case.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "carbon/errors.hpp"

namespace carbon {

namespace {

// Uniform helpers on top of mt19937_64 so the generated cases are identical
// across standard library implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace

SystemCase random_case(int num_buses, int num_gens, int num_loads,
                       std::uint64_t seed) {
  if (num_buses <= 0) throw InvalidDimension("num_buses must be positive");
  if (num_gens <= 0) throw InvalidDimension("num_gens must be positive");
  if (num_loads <= 0) throw InvalidDimension("num_loads must be positive");

  std::mt19937_64 rng(seed);
  SystemCase sys;
  sys.name = "random-" + std::to_string(seed);

  sys.buses.reserve(num_buses);
  for (int i = 0; i < num_buses; ++i)
    sys.buses.push_back({"b" + std::to_string(i + 1), i == 0});

  // Spanning tree first so the network is connected, then extra edges for
  // meshing. Roughly half of all lines carry a finite limit.
  std::set<std::pair<int, int>> used;
  auto add_line = [&](int a, int b) {
    if (a == b) return false;
    auto key = std::minmax(a, b);
    if (!used.insert(key).second) return false;
    Line l;
    l.from_bus = sys.buses[key.first].id;
    l.to_bus = sys.buses[key.second].id;
    l.susceptance = uniform(rng, 1.0, 10.0);
    if (uniform(rng, 0.0, 1.0) < 0.5)
      l.limit = uniform(rng, 20.0, 150.0);
    sys.lines.push_back(std::move(l));
    return true;
  };
  for (int i = 1; i < num_buses; ++i) add_line(uniform_int(rng, 0, i - 1), i);
  int extras = num_buses / 2;
  for (int k = 0; k < extras && num_buses > 2; ++k)
    add_line(uniform_int(rng, 0, num_buses - 1), uniform_int(rng, 0, num_buses - 1));

  static constexpr double kFactors[4] = {0.0, 0.6042, 0.7434, 0.9606};
  sys.generators.reserve(num_gens);
  for (int g = 0; g < num_gens; ++g) {
    Generator gen;
    gen.id = "g" + std::to_string(g + 1);
    gen.bus = sys.buses[uniform_int(rng, 0, num_buses - 1)].id;
    gen.emission = kFactors[uniform_int(rng, 0, 3)];
    gen.cost = gen.emission == 0.0 ? 0.0 : uniform(rng, 5.0, 74.64);
    gen.p_min = 0.0;
    gen.p_max = uniform(rng, 20.0, 200.0);
    sys.generators.push_back(std::move(gen));
  }

  sys.consumers.reserve(num_loads);
  for (int d = 0; d < num_loads; ++d) {
    Consumer c;
    c.id = "d" + std::to_string(d + 1);
    c.bus = sys.buses[uniform_int(rng, 0, num_buses - 1)].id;
    c.utility = uniform(rng, 20.0, 80.0);
    c.carbon_cost = uniform(rng, 10.0, 30.0);
    c.p_min = 0.0;
    c.p_max = uniform(rng, 10.0, 100.0);
    sys.consumers.push_back(std::move(c));
  }

  // A fixed quarter of the consumers bid zero carbon cost; the subset is a
  // deterministic function of the seed.
  int zero_count = num_loads / 4;
  std::vector<int> order(num_loads);
  for (int i = 0; i < num_loads; ++i) order[i] = i;
  for (int i = num_loads - 1; i > 0; --i)
    std::swap(order[i], order[uniform_int(rng, 0, i)]);
  for (int k = 0; k < zero_count; ++k) sys.consumers[order[k]].carbon_cost = 0.0;

  return sys;
}

}  // namespace carbon
