#include "hobo/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hobo {

std::string to_string(Domain d) { return d == Domain::spin ? "spin" : "bool"; }

Domain parse_domain(const std::string& s) {
  if (s == "spin") return Domain::spin;
  if (s == "bool" || s == "boolean") return Domain::boolean;
  throw std::invalid_argument("unknown domain '" + s + "'");
}

bool term_key_less(std::span<const Index> a, std::span<const Index> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Polynomial::Polynomial(std::size_t n, Domain domain, std::vector<Term> terms,
                       double constant)
    : n_(n), domain_(domain), constant_(constant) {
  std::vector<Term> staged;
  staged.reserve(terms.size());
  for (auto& t : terms) {
    std::sort(t.vars.begin(), t.vars.end());
    if (std::adjacent_find(t.vars.begin(), t.vars.end()) != t.vars.end())
      throw std::invalid_argument("term has a repeated variable");
    if (!t.vars.empty() && t.vars.back() >= n)
      throw std::invalid_argument("term variable index out of range");
    if (t.vars.empty()) {
      constant_ += t.coeff;
      continue;
    }
    staged.push_back(std::move(t));
  }
  std::stable_sort(staged.begin(), staged.end(),
                   [](const Term& a, const Term& b) {
                     return term_key_less(a.vars, b.vars);
                   });
  terms_.reserve(staged.size());
  for (auto& t : staged) {
    if (!terms_.empty() && terms_.back().vars == t.vars) {
      terms_.back().coeff += t.coeff;
    } else {
      if (!terms_.empty() && terms_.back().coeff == 0.0) terms_.pop_back();
      terms_.push_back(std::move(t));
    }
  }
  if (!terms_.empty() && terms_.back().coeff == 0.0) terms_.pop_back();
}

std::size_t Polynomial::degree() const {
  // Terms are ordered by length first.
  return terms_.empty() ? 0 : terms_.back().vars.size();
}

std::vector<std::size_t> Polynomial::count_by_degree() const {
  std::vector<std::size_t> counts(degree() + 1, 0);
  for (const auto& t : terms_) ++counts[t.vars.size()];
  return counts;
}

double Polynomial::abs_coeff_sum() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coeff);
  return s;
}

double Polynomial::coefficient(std::span<const Index> vars) const {
  if (vars.empty()) return constant_;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), vars,
                             [](const Term& t, std::span<const Index> key) {
                               return term_key_less(t.vars, key);
                             });
  if (it != terms_.end() &&
      std::equal(it->vars.begin(), it->vars.end(), vars.begin(), vars.end()))
    return it->coeff;
  return 0.0;
}

void check_compatible(const Polynomial& poly, const Configuration& config) {
  if (config.domain != poly.domain())
    throw std::invalid_argument("configuration domain does not match polynomial");
  if (config.values.size() != poly.n())
    throw std::invalid_argument("configuration length does not match polynomial");
  for (auto v : config.values) {
    const bool ok = config.domain == Domain::spin ? (v == 1 || v == -1)
                                                  : (v == 0 || v == 1);
    if (!ok) throw std::invalid_argument("configuration value outside domain alphabet");
  }
}

double evaluate(const Polynomial& poly, const Configuration& config) {
  check_compatible(poly, config);
  double e = poly.constant();
  for (const auto& t : poly.terms()) {
    int prod = 1;
    for (auto v : t.vars) prod *= config.values[v];
    if (prod != 0) e += prod * t.coeff;
  }
  return e;
}

Configuration to_boolean(const Configuration& spins) {
  if (spins.domain != Domain::spin)
    throw std::invalid_argument("configuration is already boolean");
  Configuration out{Domain::boolean, spins.values};
  for (auto& v : out.values) v = static_cast<std::int8_t>((1 - v) / 2);
  return out;
}

Configuration to_spin(const Configuration& bits) {
  if (bits.domain != Domain::boolean)
    throw std::invalid_argument("configuration is already spin");
  Configuration out{Domain::spin, bits.values};
  for (auto& v : out.values) v = static_cast<std::int8_t>(1 - 2 * v);
  return out;
}

IncidenceIndex::IncidenceIndex(const Polynomial& poly)
    : offsets_(poly.n() + 1, 0), term_count_(poly.terms().size()) {
  const auto& terms = poly.terms();
  for (const auto& t : terms)
    for (auto v : t.vars) ++offsets_[v + 1];
  for (std::size_t i = 0; i < poly.n(); ++i) offsets_[i + 1] += offsets_[i];
  terms_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t ti = 0; ti < terms.size(); ++ti)
    for (auto v : terms[ti].vars)
      terms_[fill[v]++] = static_cast<std::uint32_t>(ti);
}

double flip_delta(const Polynomial& poly, const Configuration& config,
                  const IncidenceIndex& incidence, Index v) {
  if (v >= poly.n()) throw std::out_of_range("flip_delta: variable out of range");
  const auto& terms = poly.terms();
  double delta = 0.0;
  if (poly.domain() == Domain::spin) {
    for (auto ti : incidence.terms_of(v)) {
      int prod = 1;
      for (auto u : terms[ti].vars) prod *= config.values[u];
      delta -= 2.0 * terms[ti].coeff * prod;
    }
  } else {
    const int step = 1 - 2 * config.values[v];
    for (auto ti : incidence.terms_of(v)) {
      int prod = 1;
      for (auto u : terms[ti].vars)
        if (u != v) prod *= config.values[u];
      if (prod != 0) delta += step * terms[ti].coeff;
    }
  }
  return delta;
}

void flip(Configuration& config, Index v) {
  auto& x = config.values.at(v);
  x = config.domain == Domain::spin ? static_cast<std::int8_t>(-x)
                                    : static_cast<std::int8_t>(1 - x);
}

namespace {

// Expands c * prod_{v in vars} (a + b z_v) over all subsets of vars.
void expand_affine(const Term& t, double a, double b, std::vector<Term>& out,
                   double& constant) {
  const std::size_t d = t.vars.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    Term sub;
    double c = t.coeff;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask >> i & 1) {
        sub.vars.push_back(t.vars[i]);
        c *= b;
      } else {
        c *= a;
      }
    }
    if (c == 0.0) continue;
    if (sub.vars.empty()) {
      constant += c;
    } else {
      sub.coeff = c;
      out.push_back(std::move(sub));
    }
  }
}

}  // namespace

Polynomial to_boolean(const Polynomial& spin_poly) {
  if (spin_poly.domain() != Domain::spin)
    throw std::invalid_argument("to_boolean: polynomial is already boolean");
  std::vector<Term> out;
  double constant = spin_poly.constant();
  for (const auto& t : spin_poly.terms()) expand_affine(t, 1.0, -2.0, out, constant);
  return Polynomial(spin_poly.n(), Domain::boolean, std::move(out), constant);
}

Polynomial to_spin(const Polynomial& bool_poly) {
  if (bool_poly.domain() != Domain::boolean)
    throw std::invalid_argument("to_spin: polynomial is already spin");
  std::vector<Term> out;
  double constant = bool_poly.constant();
  for (const auto& t : bool_poly.terms()) expand_affine(t, 0.5, -0.5, out, constant);
  return Polynomial(bool_poly.n(), Domain::spin, std::move(out), constant);
}

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  if (a.domain() != b.domain())
    throw std::invalid_argument("multiply: domain mismatch");
  const bool spin = a.domain() == Domain::spin;
  std::vector<Term> out;
  out.reserve((a.terms().size() + 1) * (b.terms().size() + 1));

  auto push = [&](std::span<const Index> x, std::span<const Index> y, double c) {
    Term t;
    t.coeff = c;
    t.vars.reserve(x.size() + y.size());
    // Merge of two sorted lists; a shared variable squares to 1 (spin) or
    // to itself (boolean).
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
      if (j == y.size() || (i < x.size() && x[i] < y[j])) {
        t.vars.push_back(x[i++]);
      } else if (i == x.size() || y[j] < x[i]) {
        t.vars.push_back(y[j++]);
      } else {
        if (!spin) t.vars.push_back(x[i]);
        ++i;
        ++j;
      }
    }
    out.push_back(std::move(t));
  };

  const std::vector<Index> none;
  double constant = a.constant() * b.constant();
  for (const auto& ta : a.terms()) {
    if (b.constant() != 0.0) push(ta.vars, none, ta.coeff * b.constant());
    for (const auto& tb : b.terms()) push(ta.vars, tb.vars, ta.coeff * tb.coeff);
  }
  if (a.constant() != 0.0)
    for (const auto& tb : b.terms()) push(none, tb.vars, a.constant() * tb.coeff);
  return Polynomial(std::max(a.n(), b.n()), a.domain(), std::move(out), constant);
}

Polynomial scale(const Polynomial& p, double factor) {
  std::vector<Term> terms = p.terms();
  for (auto& t : terms) t.coeff *= factor;
  return Polynomial(p.n(), p.domain(), std::move(terms), p.constant() * factor);
}

Polynomial add_constant(const Polynomial& p, double shift) {
  return Polynomial(p.n(), p.domain(), p.terms(), p.constant() + shift);
}

Polynomial relabel(const Polynomial& p, std::size_t offset, std::size_t n) {
  if (offset + p.n() > n) throw std::invalid_argument("relabel: target too small");
  std::vector<Term> terms = p.terms();
  for (auto& t : terms)
    for (auto& v : t.vars) v += static_cast<Index>(offset);
  return Polynomial(n, p.domain(), std::move(terms), p.constant());
}

}  // namespace hobo
