#include "hobo/poly_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hobo {

namespace {

// N choose k in floating point; exact for the sizes used here.
double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  return static_cast<double>(r);
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

}  // namespace

double density(const Polynomial& poly) {
  const std::size_t k = poly.degree();
  if (k < 2) throw std::domain_error("density requires a polynomial of degree >= 2");
  const auto counts = poly.count_by_degree();
  double rho = 0.0;
  for (std::size_t d = 2; d <= k; ++d)
    rho += static_cast<double>(counts[d]) / binomial(poly.n(), d);
  return rho / static_cast<double>(k - 1);
}

Histogram freedman_diaconis(std::vector<double> samples) {
  Histogram h;
  if (samples.empty()) return h;
  std::sort(samples.begin(), samples.end());
  const double lo = samples.front();
  const double hi = samples.back();
  const double n = static_cast<double>(samples.size());
  std::size_t bins = 1;
  if (hi > lo) {
    const double iqr = quantile_sorted(samples, 0.75) - quantile_sorted(samples, 0.25);
    if (iqr > 0.0) {
      const double width = 2.0 * iqr / std::cbrt(n);
      bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    } else {
      bins = static_cast<std::size_t>(std::ceil(std::log2(n))) + 1;
    }
    bins = std::clamp<std::size_t>(bins, 1, 10000);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + span * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double x : samples) {
    auto b = static_cast<std::size_t>((x - lo) / span * static_cast<double>(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

CouplerStats coupler_stats(const Polynomial& poly) {
  const auto& terms = poly.terms();
  if (terms.size() < 2)
    throw std::domain_error("coupler_stats needs at least two non-constant terms");
  CouplerStats s;
  s.count_by_degree = poly.count_by_degree();
  const double n = static_cast<double>(terms.size());
  double sum = 0.0;
  for (const auto& t : terms) sum += t.coeff;
  s.mean = sum / n;
  double m2 = 0.0, m4 = 0.0;
  for (const auto& t : terms) {
    const double d = t.coeff - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  s.stddev = std::sqrt(m2);
  if (m2 > 0.0) s.kurtosis = m4 / (m2 * m2);
  std::vector<double> coeffs;
  coeffs.reserve(terms.size());
  for (const auto& t : terms) coeffs.push_back(t.coeff);
  s.histogram = freedman_diaconis(std::move(coeffs));
  return s;
}

double misfit(const Polynomial& poly, double ground_energy) {
  const double bonds = poly.abs_coeff_sum();
  if (bonds == 0.0) throw std::domain_error("misfit of a constant polynomial is undefined");
  const double e_min = poly.constant() - bonds;
  return (ground_energy - e_min) / (2.0 * bonds);
}

double max_abs_coeff(const Polynomial& poly) {
  double m = 0.0;
  for (const auto& t : poly.terms()) m = std::max(m, std::abs(t.coeff));
  return m;
}

Polynomial normalize(const Polynomial& poly) {
  const double m = max_abs_coeff(poly);
  if (m == 0.0) throw std::domain_error("cannot normalize a constant polynomial");
  if (m == 1.0) return poly;
  std::vector<Term> terms = poly.terms();
  for (auto& t : terms) t.coeff /= m;
  return Polynomial(poly.n(), poly.domain(), std::move(terms), poly.constant() / m);
}

}  // namespace hobo
