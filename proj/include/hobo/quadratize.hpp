#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hobo/planting.hpp"
#include "hobo/polynomial.hpp"

namespace hobo {

enum class PenaltyStrategy {
  // One coefficient for every substitution: sum of |c| over the input + 1.
  rosenberg_global,
  // Per substitution: sum of |c| over the terms containing the pair + 1.
  per_term_tight,
};

std::string to_string(PenaltyStrategy s);
PenaltyStrategy parse_penalty_strategy(const std::string& s);

enum class PairRule {
  most_frequent,  // greedy, lexicographic tie-break
  random,         // uniformly random pair of a random high-degree term
};

using VarPair = std::pair<Index, Index>;

// y = x_a * x_b, enforced by penalty * (x_a x_b - 2 x_a y - 2 x_b y + 3 y).
struct Substitution {
  Index a = 0;
  Index b = 0;
  Index aux = 0;
  double penalty = 0.0;

  bool operator==(const Substitution&) const = default;
};

struct ReductionResult {
  Polynomial qubo;  // boolean, degree <= 2
  std::vector<Substitution> substitutions;
  std::size_t n_original = 0;
  std::size_t n_total = 0;
  PenaltyStrategy strategy = PenaltyStrategy::per_term_tight;
};

double penalty_global(const Polynomial& poly);
// Throws std::invalid_argument when the pair occurs in no term of degree > 2.
double penalty_tight(const Polynomial& poly, VarPair pair);

// The pair shared by the most terms of degree > 2, ties broken by smallest
// (a, b). Throws std::invalid_argument when degree <= 2.
VarPair select_pair(const Polynomial& poly);

struct ReduceOptions {
  PenaltyStrategy strategy = PenaltyStrategy::per_term_tight;
  PairRule pair_rule = PairRule::most_frequent;
  std::uint64_t seed = 0;  // used by PairRule::random only
};

// Iterated reduction by substitution. Input must be boolean; a polynomial of
// degree <= 2 is returned unchanged with no substitutions.
ReductionResult reduce_to_quadratic(const Polynomial& poly, const ReduceOptions& opts = {});

// Sets every auxiliary variable to the product of its pair, in substitution
// order.
Configuration lift_solution(const ReductionResult& red, const Configuration& originals);
// First n_original entries.
Configuration project_solution(const ReductionResult& red, const Configuration& all);

struct ReducedInstance {
  PlantedInstance instance;  // spin domain, 2-local
  ReductionResult reduction;  // boolean-domain record
};

// spin -> boolean -> reduce -> spin, carrying the planted state across.
ReducedInstance reduce_instance(const PlantedInstance& inst, PenaltyStrategy strategy);

}  // namespace hobo
