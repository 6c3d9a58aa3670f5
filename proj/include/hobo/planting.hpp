#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "hobo/polynomial.hpp"

namespace hobo {

inline constexpr const char* kGeneratorVersion = "hobo-planting/1";

// A spin polynomial with a known minimizing configuration.
struct PlantedInstance {
  Polynomial poly;
  Configuration planted_config;
  double planted_energy = 0.0;
  // True when planted_energy is known to be the global minimum, either by
  // construction or by exhaustive check.
  bool certified = false;
  nlohmann::json meta = nlohmann::json::object();
};

// Throws std::logic_error when the stored planted energy does not match the
// polynomial at the planted configuration, or degree != meta["k"].
void check_planted(const PlantedInstance& inst);

// Coupler pattern of one 4-spin plaquette. The plaquette energy is
// -sum_e J_e s_a s_b over its edges in cyclic order; the all-up state is a
// ground state for every class.
struct PlaquetteClass {
  int id = 0;
  std::array<int, 4> couplers{};

  // Minimum single-plaquette energy, reached at the all-up state.
  double ground_energy() const;
  // Single-plaquette frustration (misfit) of the pattern.
  double frustration() const;
};

// The four classes C1..C4 in increasing order of frustration. Each one is
// checked by enumeration of its 16 states on first access.
const std::array<PlaquetteClass, 4>& plaquette_classes();

struct ClassProbabilities {
  double p1 = 0.25;
  double p2 = 0.25;
  double p3 = 0.25;

  double p4() const { return 1.0 - p1 - p2 - p3; }
  // Throws std::invalid_argument unless all four lie in [0, 1].
  void validate() const;
};

// Tile-planted 2-local problem on an L x L periodic square lattice. The
// L^2/2 checkerboard plaquettes cover all 2L^2 edges once. For L = 2 the
// periodic wrap makes opposite edges coincide and their couplers merge.
PlantedInstance plant_square_tile(std::size_t L, const ClassProbabilities& probs,
                                  std::uint64_t seed);

// m spins in a bimodal field: H = sum_i h_i s_i with h_i = +-1.
PlantedInstance plant_field(std::size_t m, std::uint64_t seed);

// Applies s_v -> g_v s_v. The spectrum is unchanged.
PlantedInstance gauge_transform(const PlantedInstance& inst, const Configuration& gauge);
PlantedInstance gauge_randomize(const PlantedInstance& inst, std::uint64_t seed);
// Gauge that moves the planted state onto target.
PlantedInstance align_planted(const PlantedInstance& inst, const Configuration& target);

enum class Layout {
  // Parts are relabeled onto consecutive, non-overlapping variable ranges.
  disjoint,
  // Parts live on the same variables and must share one planted state.
  shared,
};

std::string to_string(Layout l);
Layout parse_layout(const std::string& s);

// Product composite -prod_i (Emax_i - H_i), where Emax_i is the coefficient
// bound constant + sum|c|. Every factor is non-negative and maximal at its
// planted state, so the composite is minimized by the joint planted state.
PlantedInstance compose(std::span<const PlantedInstance> parts, Layout layout);

struct BenchmarkSpec {
  int k = 3;
  std::size_t n = 16;
  Layout layout = Layout::shared;
  ClassProbabilities probs;
};

// How a k-local instance of size N is assembled from lattices and fields.
struct SizeSplit {
  std::vector<std::size_t> lattice_sides;
  std::size_t field_spins = 0;
};

// Throws std::invalid_argument when N cannot be split under the layout's
// rule.
SizeSplit split_size(int k, std::size_t n, Layout layout);

// Deterministic per (seed, k, N, index).
PlantedInstance generate_benchmark_instance(const BenchmarkSpec& spec, std::size_t index,
                                            std::uint64_t seed);

std::vector<PlantedInstance> generate_benchmark_set(int k, std::span<const std::size_t> sizes,
                                                    std::size_t count, std::uint64_t seed,
                                                    Layout layout = Layout::shared,
                                                    const ClassProbabilities& probs = {});

}  // namespace hobo
