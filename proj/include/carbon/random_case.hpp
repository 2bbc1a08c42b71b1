#pragma once

#include <cstdint>

#include "carbon/types.hpp"

namespace carbon {

/// Deterministic synthetic case generator. The network is a random spanning
/// tree plus extra edges, so it is always connected. Consumer utilities are
/// uniform in [20, 80] $/MWh; carbon costs uniform in [10, 30] $/tCO2 with a
/// fixed quarter (floor(num_loads / 4)) of consumers forced to zero; emission
/// factors are drawn from {0, 0.6042, 0.7434, 0.9606} and zero-emission
/// generators bid zero cost. All lower bounds are zero, which keeps every
/// generated case feasible.
///
/// Throws InvalidDimension when any count is zero.
SystemCase random_case(int num_buses, int num_gens, int num_loads,
                       std::uint64_t seed);

}  // namespace carbon
