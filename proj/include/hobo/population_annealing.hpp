#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hobo/annealing.hpp"
#include "hobo/polynomial.hpp"

namespace hobo {

// Shannon entropy (natural log) of family fractions. Zero fractions
// contribute nothing. Throws std::invalid_argument unless the fractions are
// non-negative and sum to 1 within 1e-9.
double family_entropy(std::span<const double> fractions);

struct PamcStep {
  double beta = 0.0;
  double mean_energy = 0.0;
  double entropy = 0.0;
  std::size_t families = 0;
};

struct PamcEstimate {
  std::size_t population_size = 0;
  std::vector<PamcStep> steps;
  std::vector<double> final_fractions;  // per surviving family, sums to 1
  double entropy = 0.0;                 // at the last beta
  double rho_s = 0.0;                   // population_size / exp(entropy)
  double best_energy = 0.0;
};

// Population annealing with systematic resampling and family tracking.
// The caller is expected to pass a normalized polynomial.
PamcEstimate population_annealing(const Polynomial& poly, std::size_t population_size,
                                  const Schedule& schedule, std::size_t sweeps_per_step,
                                  std::uint64_t seed);

struct RhoProtocol {
  std::size_t initial_size = 8;
  std::size_t restarts = 100;
  std::size_t max_size = 1 << 14;
  double time_budget_s = 0.0;  // 0 = unlimited
  Schedule schedule;
  std::size_t sweeps_per_step = 10;
};

struct RhoLevel {
  std::size_t population_size = 0;
  std::size_t restarts = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_ = 0.0;
};

struct RhoConvergence {
  std::vector<RhoLevel> levels;
  double rho_s = 0.0;  // mean at the last completed level
  double rho_s_std = 0.0;
  bool converged = false;
  // Per-step trace of the first restart at every level.
  std::vector<PamcEstimate> traces;
};

// Doubles the population until two consecutive mean rho_s agree within
// their combined standard error. Stops unconverged once max_size or the time
// budget is reached; the completed levels are kept. Throws
// std::runtime_error if not even the first level fits in the budget.
RhoConvergence rho_s_converged(const Polynomial& poly, const RhoProtocol& protocol,
                               std::uint64_t seed);

}  // namespace hobo
