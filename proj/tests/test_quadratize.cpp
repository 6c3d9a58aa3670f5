#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "hobo/brute_force.hpp"
#include "hobo/planting.hpp"
#include "hobo/quadratize.hpp"

using namespace hobo;
using hobo::testing::random_config;
using hobo::testing::random_poly;

namespace {

Configuration bits(std::initializer_list<int> v) {
  Configuration c{Domain::boolean, {}};
  for (int x : v) c.values.push_back(static_cast<std::int8_t>(x));
  return c;
}

// Sum over terms of max(degree - 2, 0).
std::size_t excess(const Polynomial& p) {
  std::size_t s = 0;
  for (const auto& t : p.terms()) s += t.vars.size() > 2 ? t.vars.size() - 2 : 0;
  return s;
}

// A degree 3..4 polynomial on n variables that really is cubic or quartic.
Polynomial random_hobo(Rng& rng, std::size_t n) {
  for (;;) {
    auto p = random_poly(rng, n, Domain::boolean, 3 + rng.below(6), 1, 4);
    if (p.degree() >= 3) return p;
  }
}

}  // namespace

TEST_CASE("single cubic term reduces to the textbook gadget") {
  Polynomial p(3, Domain::boolean, {{{0, 1, 2}, 1.0}});
  for (auto strategy : {PenaltyStrategy::rosenberg_global, PenaltyStrategy::per_term_tight}) {
    const auto r = reduce_to_quadratic(p, {strategy});
    REQUIRE(r.substitutions.size() == 1);
    const auto& s = r.substitutions[0];
    CHECK(s.a == 0);
    CHECK(s.b == 1);
    CHECK(s.aux == 3);
    CHECK(s.penalty == 2.0);
    const double c = s.penalty;
    Polynomial expected(4, Domain::boolean,
                        {{{2, 3}, 1.0}, {{0, 1}, c}, {{0, 3}, -2 * c}, {{1, 3}, -2 * c}, {{3}, 3 * c}});
    CHECK(r.qubo == expected);
    CHECK(r.n_original == 3);
    CHECK(r.n_total == 4);
  }
}

TEST_CASE("quadratic input passes through") {
  Polynomial p(3, Domain::boolean, {{{0, 1}, 2.0}, {{2}, -1.0}}, 1.0);
  const auto r = reduce_to_quadratic(p);
  CHECK(r.qubo == p);
  CHECK(r.substitutions.empty());
  CHECK(r.n_total == 3);
}

TEST_CASE("reduction requires boolean input") {
  Polynomial p(3, Domain::spin, {{{0, 1, 2}, 1.0}});
  CHECK_THROWS_AS(reduce_to_quadratic(p), std::invalid_argument);
}

TEST_CASE("penalty bounds") {
  Polynomial p(3, Domain::boolean, {{{0}, 2.0}, {{1}, -3.0}, {{0, 1, 2}, 1.0}});
  CHECK(penalty_global(p) == 7.0);
  CHECK(penalty_global(Polynomial(3, Domain::boolean, {{{0, 1, 2}, 1.0}})) == 2.0);
  CHECK_THROWS_AS(penalty_global(Polynomial(3, Domain::boolean, {}, 4.0)), std::invalid_argument);

  Polynomial two(6, Domain::boolean, {{{0, 1, 2}, 1.0}, {{3, 4, 5}, 5.0}});
  CHECK(penalty_tight(two, {0, 1}) == 2.0);
  CHECK(penalty_global(two) == 7.0);
  Polynomial one(3, Domain::boolean, {{{0, 1, 2}, 1.0}});
  CHECK(penalty_tight(one, {0, 1}) == penalty_global(one));
  CHECK_THROWS_AS(penalty_tight(two, {0, 3}), std::invalid_argument);
}

TEST_CASE("pair selection") {
  Polynomial p(4, Domain::boolean, {{{0, 1, 2}, 1.0}, {{0, 1, 3}, 1.0}});
  CHECK(select_pair(p) == VarPair{0, 1});
  Polynomial q(3, Domain::boolean, {{{0, 1, 2}, 1.0}});
  CHECK(select_pair(q) == VarPair{0, 1});
  Polynomial r(4, Domain::boolean, {{{0, 2, 3}, 1.0}, {{1, 2, 3}, 1.0}});
  CHECK(select_pair(r) == VarPair{2, 3});
  CHECK_THROWS_AS(select_pair(Polynomial(3, Domain::boolean, {{{0, 1}, 1.0}})), std::invalid_argument);
}

TEST_CASE("greedy pair choice needs no more auxiliaries than random choice") {
  Rng rng(5);
  std::size_t greedy = 0, random = 0;
  for (int i = 0; i < 30; ++i) {
    auto p = random_poly(rng, 10, Domain::boolean, 12, 3, 3);
    greedy += reduce_to_quadratic(p, {PenaltyStrategy::per_term_tight, PairRule::most_frequent}).n_total;
    random += reduce_to_quadratic(p, {PenaltyStrategy::per_term_tight, PairRule::random, rng.next()}).n_total;
  }
  CHECK(greedy <= random);
}

TEST_CASE("lift and project") {
  Polynomial p(3, Domain::boolean, {{{0, 1, 2}, 1.0}});
  const auto r = reduce_to_quadratic(p);
  const auto l = lift_solution(r, bits({1, 1, 1}));
  CHECK(l.values == std::vector<std::int8_t>{1, 1, 1, 1});
  CHECK(evaluate(r.qubo, l) == 1.0);
  const auto z = lift_solution(r, bits({0, 1, 1}));
  CHECK(z.values[3] == 0);
  CHECK(evaluate(r.qubo, z) == 0.0);
  CHECK(project_solution(r, l).values == bits({1, 1, 1}).values);
  CHECK_THROWS_AS(lift_solution(r, bits({1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(project_solution(r, bits({1, 1, 1})), std::invalid_argument);
}

TEST_CASE("reduction structure: aux range, degree, penalties, termination") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_hobo(rng, 4 + rng.below(7));
    for (auto strategy : {PenaltyStrategy::rosenberg_global, PenaltyStrategy::per_term_tight}) {
      const auto r = reduce_to_quadratic(p, {strategy});
      REQUIRE(r.qubo.degree() <= 2);
      CHECK(r.n_total == r.n_original + r.substitutions.size());
      CHECK(r.substitutions.size() <= excess(p));
      for (std::size_t s = 0; s < r.substitutions.size(); ++s) {
        CHECK(r.substitutions[s].aux == r.n_original + s);
        CHECK(r.substitutions[s].a < r.substitutions[s].aux);
        CHECK(r.substitutions[s].b < r.substitutions[s].aux);
        CHECK(r.substitutions[s].penalty <= penalty_global(p));
        if (strategy == PenaltyStrategy::rosenberg_global) CHECK(r.substitutions[s].penalty == penalty_global(p));
      }
    }
  }
}

TEST_CASE("each substitution strictly lowers the excess degree") {
  // Replaying one substitution at a time by hand: substitute the chosen pair
  // into every term containing it and compare excess before and after.
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    auto p = random_hobo(rng, 8);
    std::size_t steps = 0;
    while (p.degree() > 2) {
      const auto [a, b] = select_pair(p);
      const auto y = static_cast<Index>(p.n());
      std::vector<Term> terms;
      for (const auto& t : p.terms()) {
        const bool has = std::binary_search(t.vars.begin(), t.vars.end(), a) &&
                         std::binary_search(t.vars.begin(), t.vars.end(), b) && t.vars.size() > 2;
        if (!has) {
          terms.push_back(t);
          continue;
        }
        Term u{{}, t.coeff};
        for (auto v : t.vars)
          if (v != a && v != b) u.vars.push_back(v);
        u.vars.push_back(y);
        terms.push_back(u);
      }
      Polynomial next(p.n() + 1, Domain::boolean, terms, p.constant());
      REQUIRE(excess(next) < excess(p));
      p = next;
      ++steps;
      REQUIRE(steps < 100);
    }
  }
}

TEST_CASE("lift preserves energy exactly") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_hobo(rng, 10);
    const auto r = reduce_to_quadratic(p);
    for (int s = 0; s < 1000; ++s) {
      const auto x = random_config(rng, p.n(), Domain::boolean);
      REQUIRE(evaluate(r.qubo, lift_solution(r, x)) == evaluate(p, x));
    }
  }
}

TEST_CASE("minimum preservation and penalty-manifold optimality") {
  Rng rng(99);
  std::size_t tested = 0;
  while (tested < 200) {
    const auto p = random_hobo(rng, 4 + rng.below(7));
    const auto bf = brute_force(p);
    const auto g = reduce_to_quadratic(p, {PenaltyStrategy::rosenberg_global});
    const auto t = reduce_to_quadratic(p, {PenaltyStrategy::per_term_tight});
    if (g.n_total > 20 || t.n_total > 20) continue;
    for (const auto& r : {g, t}) {
      const auto rbf = brute_force(r.qubo);
      REQUIRE(rbf.ground_energy == bf.ground_energy);
      for (const auto& gs : rbf.ground_states) {
        for (const auto& s : r.substitutions) REQUIRE(gs.values[s.aux] == gs.values[s.a] * gs.values[s.b]);
        REQUIRE(evaluate(p, project_solution(r, gs)) == bf.ground_energy);
      }
    }
    ++tested;
  }
}

TEST_CASE("projection never costs energy") {
  Rng rng(17);
  for (int i = 0; i < 30; ++i) {
    const auto p = random_hobo(rng, 8);
    const auto r = reduce_to_quadratic(p);
    for (int s = 0; s < 200; ++s) {
      const auto x = random_config(rng, r.n_total, Domain::boolean);
      REQUIRE(evaluate(p, project_solution(r, x)) <= evaluate(r.qubo, x));
    }
  }
}

TEST_CASE("tight penalties on random cubics keep the minimum") {
  Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    const auto p = random_poly(rng, 8, Domain::boolean, 10, 3, 3);
    if (p.degree() < 3) continue;
    const auto r = reduce_to_quadratic(p, {PenaltyStrategy::per_term_tight});
    CHECK(brute_force(r.qubo, {.max_variables = 30}).ground_energy == brute_force(p).ground_energy);
  }
}

TEST_CASE("reduced instances keep the planted energy") {
  for (int k : {3, 4}) {
    BenchmarkSpec spec{k, 16, Layout::shared, {}};
    const auto inst = generate_benchmark_instance(spec, 0, 42);
    const auto red = reduce_instance(inst, PenaltyStrategy::per_term_tight);
    CHECK(red.instance.poly.degree() <= 2);
    CHECK(red.instance.poly.domain() == Domain::spin);
    CHECK(red.instance.planted_energy == inst.planted_energy);
    CHECK(evaluate(red.instance.poly, red.instance.planted_config) == red.instance.planted_energy);
    CHECK(red.instance.meta["reduced_from_k"] == k);
    CHECK(red.instance.poly.n() == red.reduction.n_total);
  }
  CHECK_THROWS_AS(reduce_instance(plant_square_tile(4, {}, 0), PenaltyStrategy::per_term_tight),
                  std::invalid_argument);
}

TEST_CASE("strategy names") {
  CHECK(parse_penalty_strategy("global") == PenaltyStrategy::rosenberg_global);
  CHECK(parse_penalty_strategy(to_string(PenaltyStrategy::per_term_tight)) == PenaltyStrategy::per_term_tight);
  CHECK_THROWS_AS(parse_penalty_strategy("loose"), std::invalid_argument);
}
