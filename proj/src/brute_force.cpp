#include "hobo/brute_force.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hobo {

namespace {

Configuration from_mask(std::uint64_t mask, std::size_t n, Domain d) {
  Configuration c{d, std::vector<std::int8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const bool bit = (mask >> i) & 1;
    c.values[i] = d == Domain::spin ? (bit ? -1 : 1) : (bit ? 1 : 0);
  }
  return c;
}

// Incremental term state for Gray-code enumeration. Bit i set means
// s_i = -1 (spin) or x_i = 1 (boolean).
class GrayWalker {
 public:
  GrayWalker(const Polynomial& p, const IncidenceIndex& inc)
      : poly_(p), inc_(inc), spin_(p.domain() == Domain::spin) {
    const auto& terms = p.terms();
    energy_ = p.constant();
    state_.resize(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (spin_) {
        state_[t] = terms[t].coeff;  // all spins +1
        energy_ += terms[t].coeff;
      } else {
        state_[t] = static_cast<double>(terms[t].vars.size());  // zeros count
      }
    }
  }

  void flip(Index v, bool to_set) {
    const auto& terms = poly_.terms();
    for (auto t : inc_.terms_of(v)) {
      if (spin_) {
        energy_ -= 2.0 * state_[t];
        state_[t] = -state_[t];
      } else if (to_set) {
        state_[t] -= 1.0;
        if (state_[t] == 0.0) energy_ += terms[t].coeff;
      } else {
        if (state_[t] == 0.0) energy_ -= terms[t].coeff;
        state_[t] += 1.0;
      }
    }
  }

  double energy() const { return energy_; }

 private:
  const Polynomial& poly_;
  const IncidenceIndex& inc_;
  bool spin_;
  std::vector<double> state_;
  double energy_ = 0.0;
};

}  // namespace

BruteForceResult brute_force(const Polynomial& poly, const BruteForceOptions& opts) {
  const std::size_t n = poly.n();
  if (n > opts.max_variables || n >= 63)
    throw std::invalid_argument("brute_force: " + std::to_string(n) +
                                " variables exceeds cap of " +
                                std::to_string(opts.max_variables));
  const IncidenceIndex inc(poly);
  GrayWalker walker(poly, inc);
  const double scale = std::max(1.0, poly.abs_coeff_sum() + std::abs(poly.constant()));
  const double tol = opts.tie_tolerance * scale;

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> candidates;
  std::uint64_t count = 0;
  std::uint64_t mask = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 0;; ++step) {
    const double e = walker.energy();
    if (e < best - tol) {
      best = e;
      candidates.clear();
      count = 0;
    }
    if (e <= best + tol) {
      if (e < best) best = e;
      ++count;
      if (candidates.size() < opts.max_ground_states) candidates.push_back(mask);
    }
    if (step + 1 == total) break;
    const auto v = static_cast<Index>(std::countr_zero(step + 1));
    mask ^= std::uint64_t{1} << v;
    walker.flip(v, (mask >> v) & 1);
  }

  // Re-evaluate exactly to shed accumulated rounding from the walk.
  BruteForceResult r;
  r.ground_energy = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Configuration>> exact;
  exact.reserve(candidates.size());
  for (auto m : candidates) {
    auto c = from_mask(m, n, poly.domain());
    const double e = evaluate(poly, c);
    r.ground_energy = std::min(r.ground_energy, e);
    exact.emplace_back(e, std::move(c));
  }
  std::uint64_t dropped = 0;
  for (auto& [e, c] : exact) {
    if (e <= r.ground_energy + tol)
      r.ground_states.push_back(std::move(c));
    else
      ++dropped;
  }
  r.ground_state_count = count - dropped;
  return r;
}

}  // namespace hobo
