#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hobo/polynomial.hpp"

namespace hobo {

// Mean per-degree fraction of present couplings, averaged over the degrees
// 2..k of a k-local polynomial. Linear and constant terms do not count.
// Requires degree >= 2, throws std::domain_error otherwise.
double density(const Polynomial& poly);

struct Histogram {
  std::vector<double> edges;  // size = counts.size() + 1
  std::vector<std::size_t> counts;
};

// Moments of the multiset of non-constant coefficients.
struct CouplerStats {
  std::vector<std::size_t> count_by_degree;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  // Pearson kurtosis m4 / m2^2 (not excess). Empty when the variance is 0.
  std::optional<double> kurtosis;
  Histogram histogram;
};

// Requires at least two non-constant terms.
CouplerStats coupler_stats(const Polynomial& poly);

// Freedman-Diaconis binning over the given samples. Falls back to Sturges'
// rule when the interquartile range is zero.
Histogram freedman_diaconis(std::vector<double> samples);

// Frustration measure (E0 - Emin_ideal) / (Emax_ideal - Emin_ideal) where the
// ideal energies assume every term attains -|c| (respectively +|c|).
double misfit(const Polynomial& poly, double ground_energy);

// Divides every coefficient, constant included, by the largest |c| of a
// non-constant term.
Polynomial normalize(const Polynomial& poly);

// Largest |c| over non-constant terms; 0 for a constant polynomial.
double max_abs_coeff(const Polynomial& poly);

}  // namespace hobo
