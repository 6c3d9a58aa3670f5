#include "hobo/spin_system.hpp"

#include <stdexcept>

namespace hobo {

SpinSystem::SpinSystem(const Polynomial& poly)
    : n_(poly.n()), constant_(poly.constant()), offsets_(poly.n() + 1, 0) {
  if (poly.domain() != Domain::spin)
    throw std::invalid_argument("Monte Carlo solvers operate on spin polynomials");
  coeff_.reserve(poly.terms().size());
  vars_.reserve(poly.terms().size());
  for (const auto& t : poly.terms()) {
    coeff_.push_back(t.coeff);
    vars_.push_back(t.vars);
    for (auto v : t.vars) ++offsets_[v + 1];
  }
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  incidence_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t t = 0; t < vars_.size(); ++t)
    for (auto v : vars_[t]) incidence_[fill[v]++] = static_cast<std::uint32_t>(t);
}

SpinState::SpinState(const SpinSystem& sys, std::vector<std::int8_t> spins)
    : sys_(&sys), spins_(std::move(spins)), term_value_(sys.term_count()) {
  if (spins_.size() != sys.n()) throw std::invalid_argument("SpinState: wrong length");
  recompute_energy();
}

SpinState::SpinState(const SpinSystem& sys, Rng& rng)
    : sys_(&sys), spins_(sys.n()), term_value_(sys.term_count()) {
  for (auto& s : spins_) s = static_cast<std::int8_t>(rng.spin());
  recompute_energy();
}

double SpinState::recompute_energy() {
  const auto coeffs = sys_->coeffs();
  const auto vars = sys_->term_vars();
  energy_ = sys_->constant();
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    int p = 1;
    for (auto v : vars[t]) p *= spins_[v];
    term_value_[t] = p * coeffs[t];
    energy_ += term_value_[t];
  }
  return energy_;
}

}  // namespace hobo
