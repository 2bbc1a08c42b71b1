#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "carbon/clearing.hpp"
#include "carbon/fixtures.hpp"
#include "carbon/types.hpp"

namespace testutil {

inline bool near(double a, double b, double tol = 1e-6) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline bool near_abs(double a, double b, double tol = 1e-6) {
  return std::abs(a - b) <= tol;
}

// Small deterministic generator for property-style loops.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed ? seed : 1) {}
  std::uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

// Two buses joined by a limited line; the cheap generator sits across the
// line from the load, so the limit binds and prices split.
inline carbon::SystemCase congested_pair() {
  carbon::SystemCase sys;
  sys.name = "congested-pair";
  sys.buses = {{"a", true}, {"b", false}};
  sys.lines = {{"a", "b", 1.0, 30.0}};
  sys.generators = {{"g_cheap", "a", 5.0, 0.5, 0.0, 100.0}};
  sys.consumers = {{"load", "b", 50.0, 0.0, 0.0, 80.0}};
  return sys;
}

}  // namespace testutil
