#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hobo/polynomial.hpp"
#include "hobo/rng.hpp"

namespace hobo {

// Read-only compiled form of a spin polynomial for Monte Carlo: coefficients
// plus a variable -> term incidence list. Shared across replicas.
class SpinSystem {
 public:
  explicit SpinSystem(const Polynomial& poly);

  std::size_t n() const { return n_; }
  std::size_t term_count() const { return coeff_.size(); }
  double constant() const { return constant_; }
  std::span<const double> coeffs() const { return coeff_; }
  std::span<const std::vector<Index>> term_vars() const { return vars_; }
  std::span<const std::uint32_t> terms_of(Index v) const {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }

 private:
  std::size_t n_ = 0;
  double constant_ = 0.0;
  std::vector<double> coeff_;
  std::vector<std::vector<Index>> vars_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> incidence_;
};

// Mutable per-replica state. Each term keeps its current signed value
// c_t * prod s, so a flip costs O(deg v) for both the delta and the update.
class SpinState {
 public:
  SpinState(const SpinSystem& sys, std::vector<std::int8_t> spins);
  SpinState(const SpinSystem& sys, Rng& rng);  // uniform random spins

  double energy() const { return energy_; }
  // Exact recomputation from the term values; also resets the running sum.
  double recompute_energy();

  double delta(Index v) const {
    double s = 0.0;
    for (auto t : sys_->terms_of(v)) s += term_value_[t];
    return -2.0 * s;
  }

  void flip(Index v, double delta) {
    for (auto t : sys_->terms_of(v)) term_value_[t] = -term_value_[t];
    spins_[v] = static_cast<std::int8_t>(-spins_[v]);
    energy_ += delta;
  }

  // One Metropolis sweep in sequential variable order at inverse
  // temperature beta. Calls on_improve(state) whenever the energy drops
  // below *best (which it updates). Returns the number of accepted flips.
  template <typename F>
  std::size_t sweep(double beta, Rng& rng, double* best, F&& on_improve) {
    std::size_t accepted = 0;
    const auto n = static_cast<Index>(spins_.size());
    for (Index v = 0; v < n; ++v) {
      const double d = delta(v);
      if (d <= 0.0 || rng.uniform() < std::exp(-beta * d)) {
        flip(v, d);
        ++accepted;
        if (best && energy_ < *best) {
          *best = energy_;
          on_improve(*this);
        }
      }
    }
    return accepted;
  }

  const std::vector<std::int8_t>& spins() const { return spins_; }
  Configuration config() const { return {Domain::spin, spins_}; }

 private:
  const SpinSystem* sys_;
  std::vector<std::int8_t> spins_;
  std::vector<double> term_value_;
  double energy_ = 0.0;
};

}  // namespace hobo
