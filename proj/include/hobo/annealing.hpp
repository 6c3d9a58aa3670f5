#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "hobo/polynomial.hpp"

namespace hobo {

enum class ScheduleKind { linear_beta, geometric_temperature };

struct Schedule {
  ScheduleKind kind = ScheduleKind::linear_beta;
  double beta_start = 0.0;
  double beta_end = 20.0;
  std::size_t steps = 100;

  // Throws std::invalid_argument on beta_start >= beta_end, steps < 2, or a
  // geometric schedule starting at beta = 0.
  void validate() const;
  // The steps inverse temperatures, first = beta_start, last = beta_end.
  std::vector<double> betas() const;
};

// Stop conditions shared by the solvers. Any one that triggers ends the run.
struct StopRule {
  double timeout_s = 0.0;         // core-loop wall time bound; 0 = none
  std::uint64_t max_sweeps = 0;   // per-replica sweep budget; 0 = none
  std::optional<double> target;   // stop once best <= target (+ tolerance)
  double target_tolerance = 1e-9; // relative
};

struct SolveRun {
  double best_energy = 0.0;
  Configuration best_config;
  double tau_s = 0.0;      // wall time including setup
  double core_s = 0.0;     // core-loop time, bounded by timeout_s
  double timeout_s = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t sweeps = 0;
  bool hit_target = false;
  bool timed_out = false;
  // Best energy after each improvement, in order (non-increasing).
  std::vector<double> best_trace;
  nlohmann::json params = nlohmann::json::object();
};

bool energy_matches(double energy, double target, double rel_tol = 1e-9);

SolveRun simulated_annealing(const Polynomial& poly, const Schedule& schedule,
                             std::size_t sweeps_per_step, std::uint64_t seed,
                             const StopRule& stop = {});

struct Ladder {
  double t_min = 0.0;
  double t_max = 0.0;
};

// t_max: hottest replica accepts >= 80% of flips even at the largest
// possible |dE| of each variable (2 * incident sum |c|), averaged over
// variables. t_min: exp(-2 min|c| / t_min) = 0.01.
Ladder auto_tune_ladder(const Polynomial& poly);

// 2 * ceil(log2 n) clamped to [8, 64].
std::size_t default_replica_count(std::size_t n);

std::vector<double> geometric_temperatures(double t_min, double t_max, std::size_t count);

struct TemperingParams {
  std::size_t replicas = 0;          // 0 = default_replica_count
  std::optional<Ladder> ladder;      // empty = auto_tune_ladder
  std::size_t sweeps_between_exchanges = 1;
};

SolveRun parallel_tempering(const Polynomial& poly, const TemperingParams& params,
                            std::uint64_t seed, const StopRule& stop);

// Probability of accepting a swap of two replicas with inverse temperatures
// beta_a, beta_b holding energies e_a, e_b.
double exchange_acceptance(double beta_a, double e_a, double beta_b, double e_b);

}  // namespace hobo
