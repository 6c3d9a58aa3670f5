#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hobo/polynomial.hpp"

namespace hobo {

struct BruteForceOptions {
  std::size_t max_variables = 24;
  // Ground states beyond this many are counted but not materialized.
  std::size_t max_ground_states = std::size_t{1} << 16;
  // Energies within this relative distance of the minimum count as ties.
  double tie_tolerance = 1e-9;
};

struct BruteForceResult {
  double ground_energy = 0.0;
  std::uint64_t ground_state_count = 0;
  std::vector<Configuration> ground_states;  // in Gray-code visiting order
};

// Exhaustive enumeration of all 2^n configurations. Throws
// std::invalid_argument when n exceeds opts.max_variables.
BruteForceResult brute_force(const Polynomial& poly, const BruteForceOptions& opts = {});

}  // namespace hobo
