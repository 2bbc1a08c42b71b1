#pragma once

#include "carbon/errors.hpp"
#include "carbon/types.hpp"

namespace carbon {

/// Checks every structural invariant of the case: unique ids, resolvable bus
/// references, exactly one reference bus, ordered non-negative bounds,
/// positive susceptances, aggregate feasibility and network connectivity.
/// Returns one issue per violation; an empty list means the case is valid.
std::vector<ValidationIssue> validate_case(const SystemCase& sys);

/// Throws ValidationError when validate_case reports anything.
const SystemCase& require_valid(const SystemCase& sys);

bool is_connected(const SystemCase& sys);

}  // namespace carbon
