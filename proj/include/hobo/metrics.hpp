#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hobo {

// One solver run as stored in a results table.
struct RunRecord {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  double timeout_s = 0.0;
  double tau_s = 0.0;
  double best_energy = 0.0;
};

struct BenchmarkRecord {
  std::string instance_id;
  int k = 0;
  std::size_t n = 0;
  double planted_energy = 0.0;
  std::vector<RunRecord> runs;
};

inline constexpr double kDefaultEnergyTol = 1e-9;

// |best - e_gs| <= tol * |e_gs|, with an absolute floor of 1e-6.
bool is_solved(double best, double e_gs, double tol = kDefaultEnergyTol);

double success_probability(const BenchmarkRecord& rec, double tol = kDefaultEnergyTol);

// Runs needed for 99% success. Throws std::domain_error for p outside (0, 1].
double r99(double p);

struct TtsEstimate {
  bool estimable = false;   // p >= 0.5
  double p_hat = 0.0;       // observed success fraction
  double p_median = 0.0;    // median of the bootstrap distribution of p
  double tau_median = 0.0;
  double tts = 0.0;
  double ci_lo = 0.0;       // 2.5 / 97.5 bootstrap percentiles
  double ci_hi = 0.0;
  double sigma = 0.0;       // bootstrap standard deviation (bars are 2 sigma)
};

struct BootstrapOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  double tol = kDefaultEnergyTol;
};

TtsEstimate tts(const BenchmarkRecord& rec, const BootstrapOptions& opts = {});

// (e_gs - e_best) / e_gs. Throws std::domain_error for e_gs = 0 and
// std::invalid_argument when e_best lies below e_gs.
double residual(double e_gs, double e_best);

// Pooled over all runs of all records. Throws on an empty input.
double fraction_solved(std::span<const BenchmarkRecord> records, double tol = kDefaultEnergyTol);

struct ScalingFit {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_stderr = 0.0;
  double beta_stderr = 0.0;
  std::vector<double> sizes;
};

// Least squares of log10(TTS) = alpha + beta N over the use_largest largest N.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points, std::size_t use_largest = 3);

double median(std::vector<double> v);
// Linear-interpolated percentile, q in [0, 1].
double percentile(std::vector<double> v, double q);

}  // namespace hobo
