#include "hobo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hobo/rng.hpp"

namespace hobo {

bool is_solved(double best, double e_gs, double tol) {
  return std::abs(best - e_gs) <= std::max(tol * std::abs(e_gs), 1e-6);
}

double success_probability(const BenchmarkRecord& rec, double tol) {
  if (rec.runs.empty()) throw std::invalid_argument("success_probability: no runs");
  std::size_t hits = 0;
  for (const auto& r : rec.runs) hits += is_solved(r.best_energy, rec.planted_energy, tol);
  return static_cast<double>(hits) / static_cast<double>(rec.runs.size());
}

double r99(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("r99: success probability must be in (0, 1]");
  if (p >= 0.99) return 1.0;
  return std::max(1.0, std::log(0.01) / std::log1p(-p));
}

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q must be in [0, 1]");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double f = pos - static_cast<double>(i);
  if (f == 0.0 || v[i] == v[i + 1]) return v[i];  // also keeps inf from becoming NaN
  return v[i] + f * (v[i + 1] - v[i]);
}

TtsEstimate tts(const BenchmarkRecord& rec, const BootstrapOptions& opts) {
  if (rec.runs.empty()) throw std::invalid_argument("tts: no runs");
  if (opts.resamples < 2) throw std::invalid_argument("tts: needs at least two resamples");
  const std::size_t n = rec.runs.size();
  std::vector<double> tau(n);
  std::vector<char> hit(n);
  for (std::size_t i = 0; i < n; ++i) {
    tau[i] = rec.runs[i].tau_s;
    hit[i] = is_solved(rec.runs[i].best_energy, rec.planted_energy, opts.tol);
  }
  TtsEstimate est;
  est.p_hat = success_probability(rec, opts.tol);
  est.tau_median = median(tau);

  // Runs are resampled jointly, so tau and success stay paired.
  Rng rng(derive_seed(opts.seed, {0xb0}));
  std::vector<double> ps(opts.resamples), tts_b(opts.resamples);
  std::vector<double> tau_b(n);
  for (std::size_t b = 0; b < opts.resamples; ++b) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = rng.below(n);
      hits += hit[j];
      tau_b[i] = tau[j];
    }
    ps[b] = static_cast<double>(hits) / static_cast<double>(n);
    tts_b[b] = hits ? median(tau_b) * r99(ps[b]) : std::numeric_limits<double>::infinity();
  }
  est.p_median = median(ps);
  est.estimable = est.p_hat >= 0.5;
  if (!est.estimable) return est;

  est.tts = est.tau_median * r99(est.p_median);
  est.ci_lo = percentile(tts_b, 0.025);
  est.ci_hi = percentile(tts_b, 0.975);
  double mean = 0.0, ss = 0.0;
  std::size_t finite = 0;
  for (double t : tts_b)
    if (std::isfinite(t)) {
      mean += t;
      ++finite;
    }
  if (finite > 1) {
    mean /= static_cast<double>(finite);
    for (double t : tts_b)
      if (std::isfinite(t)) ss += (t - mean) * (t - mean);
    est.sigma = std::sqrt(ss / static_cast<double>(finite - 1));
  }
  return est;
}

double residual(double e_gs, double e_best) {
  if (e_gs == 0.0) throw std::domain_error("residual: undefined for zero ground-state energy");
  if (e_best < e_gs - 1e-9 * std::max(1.0, std::abs(e_gs)))
    throw std::invalid_argument("residual: best energy below the ground-state energy");
  const double r = (e_gs - e_best) / e_gs;
  return r == 0.0 ? 0.0 : r;
}

double fraction_solved(std::span<const BenchmarkRecord> records, double tol) {
  std::size_t hits = 0, total = 0;
  for (const auto& rec : records)
    for (const auto& r : rec.runs) {
      hits += is_solved(r.best_energy, rec.planted_energy, tol);
      ++total;
    }
  if (total == 0) throw std::invalid_argument("fraction_solved: no runs");
  return static_cast<double>(hits) / static_cast<double>(total);
}

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points, std::size_t use_largest) {
  if (use_largest < 3) throw std::invalid_argument("fit_scaling: needs at least three sizes");
  if (points.size() < use_largest) throw std::invalid_argument("fit_scaling: not enough points");
  std::vector<std::pair<double, double>> pts(points.begin(), points.end());
  for (const auto& [n, t] : pts)
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("fit_scaling: TTS values must be positive and finite");
  std::sort(pts.begin(), pts.end());
  pts.erase(pts.begin(), pts.end() - static_cast<std::ptrdiff_t>(use_largest));

  const double m = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, t] : pts) {
    sx += n;
    sy += std::log10(t);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, t] : pts) {
    sxx += (n - mx) * (n - mx);
    sxy += (n - mx) * (std::log10(t) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_scaling: sizes must differ");
  ScalingFit fit;
  fit.beta = sxy / sxx;
  fit.alpha = my - fit.beta * mx;
  double ssr = 0.0;
  for (const auto& [n, t] : pts) {
    const double r = std::log10(t) - fit.alpha - fit.beta * n;
    ssr += r * r;
  }
  const double s2 = ssr / (m - 2.0);
  fit.beta_stderr = std::sqrt(s2 / sxx);
  fit.alpha_stderr = std::sqrt(s2 * (1.0 / m + mx * mx / sxx));
  for (const auto& [n, t] : pts) fit.sizes.push_back(n);
  return fit;
}

}  // namespace hobo
