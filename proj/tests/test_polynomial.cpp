#include <cmath>
#include <set>

#include "doctest.h"
#include "generators.hpp"
#include "hobo/brute_force.hpp"
#include "hobo/poly_stats.hpp"
#include "hobo/polynomial.hpp"

using namespace hobo;
using hobo::testing::random_config;
using hobo::testing::random_poly;
using hobo::testing::random_terms;
using hobo::testing::raw_energy;

namespace {

Configuration spins(std::initializer_list<int> v) {
  Configuration c{Domain::spin, {}};
  for (int x : v) c.values.push_back(static_cast<std::int8_t>(x));
  return c;
}

Configuration bits(std::initializer_list<int> v) {
  Configuration c{Domain::boolean, {}};
  for (int x : v) c.values.push_back(static_cast<std::int8_t>(x));
  return c;
}

Polynomial ferro_pair() { return Polynomial(2, Domain::spin, {{{0, 1}, -1.0}}); }

}  // namespace

TEST_CASE("construction merges duplicate monomials and drops zeros") {
  Polynomial p(4, Domain::spin,
               {{{1, 0}, 2.0}, {{0, 1}, -2.0}, {{2}, 1.0}, {{3, 2}, 1.5}, {{2, 3}, 1.0}, {{}, 4.0}},
               1.0);
  REQUIRE(p.terms().size() == 2);
  CHECK(p.terms()[0].vars == std::vector<Index>{2});
  CHECK(p.terms()[1].vars == std::vector<Index>{2, 3});
  CHECK(p.terms()[1].coeff == 2.5);
  CHECK(p.constant() == 5.0);
  CHECK(p.degree() == 2);
  CHECK(Polynomial(3, Domain::spin, {}, 2.0).degree() == 0);
}

TEST_CASE("construction rejects invalid terms") {
  CHECK_THROWS_AS(Polynomial(3, Domain::spin, {{{0, 0}, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Polynomial(3, Domain::spin, {{{0, 3}, 1.0}}), std::invalid_argument);
}

TEST_CASE("evaluate hand cases") {
  CHECK(evaluate(ferro_pair(), spins({1, 1})) == -1.0);
  Polynomial cubic(3, Domain::boolean, {{{0, 1, 2}, 1.0}});
  CHECK(evaluate(cubic, bits({1, 1, 1})) == 1.0);
  CHECK(evaluate(cubic, bits({1, 0, 1})) == 0.0);
}

TEST_CASE("evaluate rejects mismatched configurations") {
  CHECK_THROWS_AS(evaluate(ferro_pair(), bits({1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ferro_pair(), spins({1, 1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ferro_pair(), spins({1, 0})), std::invalid_argument);
}

TEST_CASE("evaluate matches term-by-term re-summation of the raw term list") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    for (auto d : {Domain::spin, Domain::boolean}) {
      auto raw = random_terms(rng, 6, 5, 1, 3);
      Polynomial p(6, d, raw, 0.5);
      auto c = random_config(rng, 6, d);
      CHECK(evaluate(p, c) == doctest::Approx(raw_energy(raw, 0.5, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("flip_delta hand cases") {
  auto p = ferro_pair();
  IncidenceIndex inc(p);
  CHECK(flip_delta(p, spins({1, 1}), inc, 0) == 2.0);

  Polynomial q(3, Domain::spin, {{{0, 1}, 1.0}});
  IncidenceIndex qi(q);
  CHECK(flip_delta(q, spins({1, -1, 1}), qi, 2) == 0.0);
  CHECK_THROWS_AS(flip_delta(q, spins({1, -1, 1}), qi, 3), std::out_of_range);
}

TEST_CASE("flip_delta equals full re-evaluation difference (property)") {
  Rng rng(12);
  int cases = 0;
  for (int trial = 0; trial < 250; ++trial) {
    for (auto d : {Domain::spin, Domain::boolean}) {
      auto p = random_poly(rng, 8, d, 10, 1, 3);
      IncidenceIndex inc(p);
      auto c = random_config(rng, 8, d);
      for (int rep = 0; rep < 3; ++rep) {
        const auto v = static_cast<Index>(rng.below(8));
        auto flipped = c;
        flip(flipped, v);
        // Integer coefficients keep both sides exact.
        CHECK(flip_delta(p, c, inc, v) == evaluate(p, flipped) - evaluate(p, c));
        ++cases;
      }
    }
  }
  CHECK(cases >= 1000);
}

TEST_CASE("to_boolean expansion of a ferromagnetic pair") {
  auto b = to_boolean(ferro_pair());
  Polynomial expected(2, Domain::boolean, {{{0}, 2.0}, {{1}, 2.0}, {{0, 1}, -4.0}}, -1.0);
  CHECK(b == expected);
  Polynomial k(3, Domain::spin, {}, 7.0);
  CHECK(to_boolean(k) == Polynomial(3, Domain::boolean, {}, 7.0));
  CHECK_THROWS_AS(to_boolean(b), std::invalid_argument);
}

TEST_CASE("to_spin of a single variable") {
  Polynomial x(1, Domain::boolean, {{{0}, 1.0}});
  CHECK(to_spin(x) == Polynomial(1, Domain::spin, {{{0}, -0.5}}, 0.5));
  CHECK(to_spin(to_boolean(ferro_pair())) == ferro_pair());
  CHECK_THROWS_AS(to_spin(ferro_pair()), std::invalid_argument);
}

TEST_CASE("domain mapping preserves energy and never raises degree (property)") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_poly(rng, 10, Domain::spin, 12, 1, 4);
    auto b = to_boolean(p);
    CHECK(b.degree() <= p.degree());
    for (int i = 0; i < 100; ++i) {
      auto c = random_config(rng, 10, Domain::spin);
      const double e = evaluate(p, c);
      CHECK(evaluate(b, to_boolean(c)) == doctest::Approx(e).epsilon(1e-9));
    }
  }
}

TEST_CASE("spin/boolean round trip is bit exact for integer coefficients (property)") {
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = random_poly(rng, 9, Domain::spin, 8, 1, 3);
    CHECK(to_spin(to_boolean(p)) == p);
  }
}

TEST_CASE("gauge transformation leaves the energy spectrum unchanged (property)") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 8;
    auto p = random_poly(rng, n, Domain::spin, 12, 1, 4);
    auto g = random_config(rng, n, Domain::spin);
    std::vector<Term> terms = p.terms();
    for (auto& t : terms)
      for (auto v : t.vars) t.coeff *= g.values[v];
    Polynomial q(n, Domain::spin, terms, p.constant());
    std::multiset<double> a, b;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
      Configuration c{Domain::spin, std::vector<std::int8_t>(n)};
      for (std::size_t i = 0; i < n; ++i) c.values[i] = (m >> i & 1) ? -1 : 1;
      a.insert(evaluate(p, c));
      b.insert(evaluate(q, c));
    }
    CHECK(a == b);
  }
}

TEST_CASE("multiply reduces repeated variables by domain rules") {
  Polynomial a(3, Domain::spin, {{{0, 1}, 2.0}}, 1.0);
  Polynomial b(3, Domain::spin, {{{1, 2}, 3.0}});
  auto ab = multiply(a, b);
  CHECK(ab == Polynomial(3, Domain::spin, {{{0, 2}, 6.0}, {{1, 2}, 3.0}}));

  Polynomial x(2, Domain::boolean, {{{0, 1}, 1.0}});
  CHECK(multiply(x, x) == x);

  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto d : {Domain::spin, Domain::boolean}) {
      auto p = random_poly(rng, 6, d, 4, 1, 2);
      auto q = random_poly(rng, 6, d, 4, 1, 2);
      auto pq = multiply(p, q);
      auto c = random_config(rng, 6, d);
      CHECK(evaluate(pq, c) == evaluate(p, c) * evaluate(q, c));
    }
  }
}

TEST_CASE("density") {
  const std::size_t n = 7;
  std::vector<Term> all_pairs;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) all_pairs.push_back({{i, j}, 1.0});
  CHECK(density(Polynomial(n, Domain::spin, all_pairs)) == doctest::Approx(1.0));
  // 2! 2! / 4! = 1/6
  CHECK(density(Polynomial(4, Domain::spin, {{{0, 1}, 1.0}, {{2}, 3.0}})) ==
        doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(density(Polynomial(4, Domain::spin, {{{0}, 1.0}})), std::domain_error);
}

TEST_CASE("density stays within [0, 1] (property)") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 4 + rng.below(8);
    auto p = random_poly(rng, n, Domain::spin, 1 + rng.below(60), 2, 4);
    if (p.degree() < 2) continue;
    const double rho = density(p);
    CHECK(rho >= 0.0);
    CHECK(rho <= 1.0 + 1e-12);
  }
}

TEST_CASE("coupler_stats") {
  auto s = coupler_stats(Polynomial(3, Domain::spin, {{{0, 1}, -1.0}, {{1, 2}, 1.0}}, 9.0));
  CHECK(s.mean == 0.0);
  CHECK(s.stddev == 1.0);
  REQUIRE(s.kurtosis.has_value());
  CHECK(*s.kurtosis == 1.0);

  auto flat = coupler_stats(Polynomial(3, Domain::spin, {{{0, 1}, 2.0}, {{1, 2}, 2.0}}));
  CHECK(flat.stddev == 0.0);
  CHECK_FALSE(flat.kurtosis.has_value());

  CHECK_THROWS_AS(coupler_stats(Polynomial(3, Domain::spin, {{{0, 1}, 2.0}})),
                  std::domain_error);
}

TEST_CASE("coupler_stats invariants (property)") {
  Rng rng(18);
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = random_poly(rng, 10, Domain::spin, 2 + rng.below(40), 1, 4);
    if (p.terms().size() < 2) continue;
    auto s = coupler_stats(p);
    CHECK(s.stddev >= 0.0);
    if (s.kurtosis) CHECK(*s.kurtosis >= 1.0 - 1e-12);
    std::size_t total = 0;
    for (auto c : s.histogram.counts) total += c;
    CHECK(total == p.terms().size());
    CHECK(s.histogram.edges.size() == s.histogram.counts.size() + 1);
  }
}

TEST_CASE("misfit") {
  // Unfrustrated ferromagnetic ring: every bond satisfiable.
  std::vector<Term> ring;
  for (Index i = 0; i < 6; ++i) ring.push_back({{i, static_cast<Index>((i + 1) % 6)}, -1.0});
  Polynomial ferro(6, Domain::spin, ring);
  CHECK(misfit(ferro, brute_force(ferro).ground_energy) == 0.0);

  // Antiferromagnetic triangle: E0 = -1 by enumeration of 2^3 states.
  Polynomial tri(3, Domain::spin, {{{0, 1}, 1.0}, {{1, 2}, 1.0}, {{0, 2}, 1.0}});
  const double e0 = brute_force(tri).ground_energy;
  CHECK(e0 == -1.0);
  CHECK(misfit(tri, e0) == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(misfit(Polynomial(2, Domain::spin, {}, 1.0), 1.0), std::domain_error);
}

TEST_CASE("misfit lies in [0, 1] at the true minimum (property)") {
  Rng rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    auto d = trial % 2 ? Domain::spin : Domain::boolean;
    auto p = random_poly(rng, 4 + rng.below(9), d, 1 + rng.below(20), 1, 4);
    if (p.terms().empty()) continue;
    const double mu = misfit(p, brute_force(p).ground_energy);
    CHECK(mu >= 0.0);
    CHECK(mu <= 1.0);
  }
}

TEST_CASE("normalize") {
  Polynomial p(3, Domain::spin, {{{0}, 2.0}, {{1}, -4.0}, {{2}, 1.0}}, 8.0);
  auto q = normalize(p);
  CHECK(q == Polynomial(3, Domain::spin, {{{0}, 0.5}, {{1}, -1.0}, {{2}, 0.25}}, 2.0));
  CHECK(normalize(q) == q);
  CHECK_THROWS_AS(normalize(Polynomial(2, Domain::spin, {}, 3.0)), std::domain_error);
}

TEST_CASE("normalize keeps the argmin set (brute-force oracle)") {
  Rng rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_poly(rng, 8, Domain::spin, 10, 1, 3, 9);
    auto a = brute_force(p);
    auto b = brute_force(normalize(p));
    CHECK(a.ground_states == b.ground_states);
  }
}

TEST_CASE("brute_force hand cases") {
  auto r = brute_force(ferro_pair());
  CHECK(r.ground_energy == -1.0);
  REQUIRE(r.ground_states.size() == 2);
  CHECK(r.ground_states[0] == spins({1, 1}));
  CHECK(r.ground_states[1] == spins({-1, -1}));

  auto flat = brute_force(Polynomial(5, Domain::boolean, {}, 2.5));
  CHECK(flat.ground_energy == 2.5);
  CHECK(flat.ground_state_count == 32);
  CHECK(flat.ground_states.size() == 32);

  CHECK_THROWS_AS(brute_force(Polynomial(25, Domain::spin, {})), std::invalid_argument);
}

TEST_CASE("brute_force agrees with naive enumeration (property)") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto d = trial % 2 ? Domain::spin : Domain::boolean;
    const std::size_t n = 1 + rng.below(9);
    auto p = random_poly(rng, n, d, 1 + rng.below(12), 1, 4);
    double best = 1e300;
    std::size_t ties = 0;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
      Configuration c{d, std::vector<std::int8_t>(n)};
      for (std::size_t i = 0; i < n; ++i)
        c.values[i] = d == Domain::spin ? ((m >> i & 1) ? -1 : 1) : (m >> i & 1);
      const double e = evaluate(p, c);
      if (e < best) {
        best = e;
        ties = 0;
      }
      if (e == best) ++ties;
    }
    auto r = brute_force(p);
    CHECK(r.ground_energy == best);
    CHECK(r.ground_state_count == ties);
    for (const auto& g : r.ground_states) CHECK(evaluate(p, g) == best);
  }
}
