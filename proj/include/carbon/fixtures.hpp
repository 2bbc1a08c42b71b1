#pragma once

#include <array>

#include "carbon/types.hpp"

namespace carbon {

/// Canonical three-bus fixture: one generator and one consumer per bus,
/// unconstrained unit-susceptance lines between each bus pair, bus 1 as
/// reference. Consumer carbon costs are the only free parameter.
///
/// Consumers: p_min 0, p_max 15 MW, utility 18 $/MWh.
/// Generators: capacity 20/10/25 MW, cost 8/10/6 $/MWh,
/// emission factor 0.6/0.2/1.0 tCO2/MWh.
SystemCase fixture_t1(const std::array<double, 3>& carbon_costs);

}  // namespace carbon
