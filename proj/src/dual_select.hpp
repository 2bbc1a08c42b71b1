#pragma once

#include <optional>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/types.hpp"

namespace carbon::detail {

struct FaceInputs {
  const SystemCase* sys = nullptr;
  const CaseIndex* idx = nullptr;
  const ClearingSolution* sol = nullptr;       // primal optimum
  const std::vector<double>* gen_cost = nullptr;  // costs used in the solve
  bool with_allocation = false;
};

/// Optimizes over the dual-optimal face of the clearing problem (encoded via
/// complementarity with the given primal optimum): first maximize the sum of
/// consumer prices, then minimize the sum of generator prices. Returns the
/// selected lambda_p / lambda_g / lambda_d and line multipliers, or nullopt
/// when the face problem exceeds `row_cap` or cannot be solved.
std::optional<DualSolution> demand_marginal_duals(const FaceInputs& in,
                                                  int row_cap);

}  // namespace carbon::detail
