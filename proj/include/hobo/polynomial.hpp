#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hobo {

using Index = std::uint32_t;

enum class Domain { spin, boolean };

std::string to_string(Domain d);
Domain parse_domain(const std::string& s);

// One monomial c * prod_{v in vars} z_v. vars is strictly increasing.
struct Term {
  std::vector<Index> vars;
  double coeff = 0.0;

  std::size_t degree() const { return vars.size(); }
  bool operator==(const Term&) const = default;
};

// Multilinear polynomial over n binary variables (spin or boolean).
//
// Terms are kept sorted by their variable key (shorter keys first, then
// lexicographic). Duplicate monomials are merged on construction and zero
// coefficients are dropped. A term with no variables is folded into the
// constant. The object is immutable once built.
class Polynomial {
 public:
  Polynomial() = default;

  // Builds from an arbitrary term list. Variables inside a term may come in
  // any order but must be distinct and < n; throws std::invalid_argument
  // otherwise.
  Polynomial(std::size_t n, Domain domain, std::vector<Term> terms,
             double constant = 0.0);

  std::size_t n() const { return n_; }
  Domain domain() const { return domain_; }
  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }

  // Highest term degree; 0 for a polynomial with only a constant.
  std::size_t degree() const;

  // counts[d] = number of stored terms of degree d, size degree()+1.
  std::vector<std::size_t> count_by_degree() const;

  // Sum of |c| over non-constant terms.
  double abs_coeff_sum() const;

  // Coefficient of the monomial with these (sorted) variables, 0 if absent.
  double coefficient(std::span<const Index> vars) const;

  bool operator==(const Polynomial&) const = default;

 private:
  std::size_t n_ = 0;
  Domain domain_ = Domain::spin;
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

// Ordering used for term storage.
bool term_key_less(std::span<const Index> a, std::span<const Index> b);

// Assignment of all n variables. Spin entries are -1/+1, boolean entries 0/1.
struct Configuration {
  Domain domain = Domain::spin;
  std::vector<std::int8_t> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const Configuration&) const = default;
};

// Throws std::invalid_argument if the configuration is not a valid
// assignment for poly (domain, length or alphabet mismatch).
void check_compatible(const Polynomial& poly, const Configuration& config);

double evaluate(const Polynomial& poly, const Configuration& config);

// Spin <-> boolean mapping of a configuration: x = (1 - s) / 2.
Configuration to_boolean(const Configuration& spins);
Configuration to_spin(const Configuration& bits);

// Variable -> incident term indices, in compressed row form.
class IncidenceIndex {
 public:
  explicit IncidenceIndex(const Polynomial& poly);

  std::span<const std::uint32_t> terms_of(Index v) const {
    return {terms_.data() + offsets_[v], terms_.data() + offsets_[v + 1]};
  }
  std::size_t n() const { return offsets_.size() - 1; }
  std::size_t term_count() const { return term_count_; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> terms_;
  std::size_t term_count_ = 0;
};

// Energy change from toggling variable v. Touches only terms containing v.
double flip_delta(const Polynomial& poly, const Configuration& config,
                  const IncidenceIndex& incidence, Index v);

void flip(Configuration& config, Index v);

// s = 1 - 2x substitution. Energies agree on configurations related by
// x = (1 - s) / 2.
Polynomial to_boolean(const Polynomial& spin_poly);
// x = (1 - s) / 2 substitution; inverse of to_boolean.
Polynomial to_spin(const Polynomial& bool_poly);

// Product of two polynomials in the same domain, with z*z reduced to 1 (spin)
// or z (boolean). The result has max(a.n(), b.n()) variables.
Polynomial multiply(const Polynomial& a, const Polynomial& b);

// Returns a polynomial with every coefficient (and the constant) scaled.
Polynomial scale(const Polynomial& p, double factor);

// p + shift.
Polynomial add_constant(const Polynomial& p, double shift);

// Re-labels variable v to offset + v and widens the variable count to n.
Polynomial relabel(const Polynomial& p, std::size_t offset, std::size_t n);

}  // namespace hobo
