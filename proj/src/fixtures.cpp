#include "carbon/fixtures.hpp"

namespace carbon {

SystemCase fixture_t1(const std::array<double, 3>& carbon_costs) {
  SystemCase sys;
  sys.name = "t1";
  sys.buses = {{"1", true}, {"2", false}, {"3", false}};
  // The fixture is uncongested; unit susceptance on every pair keeps flows
  // well defined without ever binding.
  sys.lines = {{"1", "2", 1.0, std::nullopt},
               {"1", "3", 1.0, std::nullopt},
               {"2", "3", 1.0, std::nullopt}};
  sys.generators = {{"g1", "1", 8.0, 0.6, 0.0, 20.0},
                    {"g2", "2", 10.0, 0.2, 0.0, 10.0},
                    {"g3", "3", 6.0, 1.0, 0.0, 25.0}};
  sys.consumers = {{"d1", "1", 18.0, carbon_costs[0], 0.0, 15.0},
                   {"d2", "2", 18.0, carbon_costs[1], 0.0, 15.0},
                   {"d3", "3", 18.0, carbon_costs[2], 0.0, 15.0}};
  return sys;
}

}  // namespace carbon
