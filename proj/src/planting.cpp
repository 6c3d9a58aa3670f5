#include "hobo/planting.hpp"

#include <cmath>
#include <stdexcept>

#include "hobo/poly_stats.hpp"
#include "hobo/rng.hpp"

namespace hobo {

void check_planted(const PlantedInstance& inst) {
  if (inst.poly.domain() != Domain::spin)
    throw std::logic_error("planted instance must be in the spin domain");
  if (evaluate(inst.poly, inst.planted_config) != inst.planted_energy)
    throw std::logic_error("planted energy does not match the planted configuration");
  if (inst.meta.contains("k") &&
      inst.meta["k"].get<std::size_t>() != inst.poly.degree())
    throw std::logic_error("instance degree does not match meta.k");
}

// -- plaquettes -------------------------------------------------------------

namespace {

double plaquette_energy(const std::array<int, 4>& j, std::uint32_t mask) {
  std::array<int, 4> s{};
  for (int i = 0; i < 4; ++i) s[i] = (mask >> i & 1) ? -1 : 1;
  double e = 0.0;
  for (int i = 0; i < 4; ++i) e -= j[i] * s[i] * s[(i + 1) % 4];
  return e;
}

std::array<PlaquetteClass, 4> make_classes() {
  std::array<PlaquetteClass, 4> classes{{
      {1, {1, 1, 1, 1}},
      {2, {-1, 2, 2, 2}},
      {3, {-1, 1, 1, 2}},
      {4, {-1, 1, 1, 1}},
  }};
  double last = -1.0;
  for (const auto& c : classes) {
    const double up = plaquette_energy(c.couplers, 0);
    for (std::uint32_t m = 1; m < 16; ++m)
      if (plaquette_energy(c.couplers, m) < up)
        throw std::logic_error("plaquette class does not admit the all-up ground state");
    if (c.frustration() <= last)
      throw std::logic_error("plaquette classes are not ordered by frustration");
    last = c.frustration();
  }
  return classes;
}

}  // namespace

double PlaquetteClass::ground_energy() const { return plaquette_energy(couplers, 0); }

double PlaquetteClass::frustration() const {
  double bonds = 0.0;
  for (int j : couplers) bonds += std::abs(j);
  return (ground_energy() + bonds) / (2.0 * bonds);
}

const std::array<PlaquetteClass, 4>& plaquette_classes() {
  static const std::array<PlaquetteClass, 4> classes = make_classes();
  return classes;
}

void ClassProbabilities::validate() const {
  for (double p : {p1, p2, p3, p4()})
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
      throw std::invalid_argument("class probabilities must lie in [0, 1] and sum to 1");
}

// -- generators -------------------------------------------------------------

namespace {

nlohmann::json probs_json(const ClassProbabilities& p) {
  return {p.p1, p.p2, p.p3, p.p4()};
}

std::size_t sample_class(Rng& rng, const ClassProbabilities& p) {
  const double u = rng.uniform();
  if (u < p.p1) return 0;
  if (u < p.p1 + p.p2) return 1;
  if (u < p.p1 + p.p2 + p.p3) return 2;
  return 3;
}

Configuration all_up(std::size_t n) {
  return {Domain::spin, std::vector<std::int8_t>(n, 1)};
}

}  // namespace

PlantedInstance plant_square_tile(std::size_t L, const ClassProbabilities& probs,
                                  std::uint64_t seed) {
  if (L < 2 || L % 2 != 0)
    throw std::invalid_argument("tile planting needs an even lattice side >= 2");
  probs.validate();
  Rng rng(derive_seed(seed, {0x711e}));
  const auto& classes = plaquette_classes();
  auto site = [L](std::size_t r, std::size_t c) {
    return static_cast<Index>((r % L) * L + (c % L));
  };

  std::vector<Term> terms;
  terms.reserve(2 * L * L);
  std::array<std::size_t, 4> class_counts{};
  double energy = 0.0;
  for (std::size_t r = 0; r < L; ++r) {
    for (std::size_t c = 0; c < L; ++c) {
      if ((r + c) % 2 != 0) continue;
      const auto cls = sample_class(rng, probs);
      ++class_counts[cls];
      energy += classes[cls].ground_energy();
      const auto rot = rng.below(4);
      // Cyclic corner order: top-left, top-right, bottom-right, bottom-left.
      const std::array<Index, 4> corner{site(r, c), site(r, c + 1), site(r + 1, c + 1),
                                        site(r + 1, c)};
      for (std::size_t e = 0; e < 4; ++e) {
        const int j = classes[cls].couplers[(e + rot) % 4];
        terms.push_back({{corner[e], corner[(e + 1) % 4]}, static_cast<double>(-j)});
      }
    }
  }

  PlantedInstance inst;
  inst.poly = Polynomial(L * L, Domain::spin, std::move(terms));
  inst.planted_config = all_up(L * L);
  inst.planted_energy = evaluate(inst.poly, inst.planted_config);
  if (inst.planted_energy != energy)
    throw std::logic_error("tile planting: plaquette energies do not add up");
  inst.certified = true;
  inst.meta = {{"generator", "square_tile"},
               {"version", kGeneratorVersion},
               {"k", inst.poly.degree()},
               {"lattice_side", L},
               {"class_probabilities", probs_json(probs)},
               {"class_counts", class_counts},
               {"seed", seed}};
  auto gauged = gauge_randomize(inst, derive_seed(seed, {0x6a09}));
  gauged.meta["gauged"] = true;
  return gauged;
}

PlantedInstance plant_field(std::size_t m, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("field planting needs at least one spin");
  Rng rng(derive_seed(seed, {0xf1e1d}));
  std::vector<Term> terms;
  Configuration planted{Domain::spin, std::vector<std::int8_t>(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const int h = rng.spin();
    terms.push_back({{static_cast<Index>(i)}, static_cast<double>(h)});
    planted.values[i] = static_cast<std::int8_t>(-h);
  }
  PlantedInstance inst;
  inst.poly = Polynomial(m, Domain::spin, std::move(terms));
  inst.planted_config = std::move(planted);
  inst.planted_energy = -static_cast<double>(m);
  inst.certified = true;
  inst.meta = {{"generator", "bimodal_field"},
               {"version", kGeneratorVersion},
               {"k", 1},
               {"field_size", m},
               {"seed", seed}};
  check_planted(inst);
  return inst;
}

PlantedInstance gauge_transform(const PlantedInstance& inst, const Configuration& gauge) {
  if (inst.poly.domain() != Domain::spin)
    throw std::invalid_argument("gauge transformations apply to spin instances only");
  check_compatible(inst.poly, gauge);
  std::vector<Term> terms = inst.poly.terms();
  for (auto& t : terms)
    for (auto v : t.vars) t.coeff *= gauge.values[v];
  PlantedInstance out = inst;
  out.poly = Polynomial(inst.poly.n(), Domain::spin, std::move(terms), inst.poly.constant());
  for (std::size_t i = 0; i < gauge.size(); ++i)
    out.planted_config.values[i] =
        static_cast<std::int8_t>(out.planted_config.values[i] * gauge.values[i]);
  return out;
}

PlantedInstance gauge_randomize(const PlantedInstance& inst, std::uint64_t seed) {
  if (inst.poly.domain() != Domain::spin)
    throw std::invalid_argument("gauge transformations apply to spin instances only");
  Rng rng(seed);
  Configuration g{Domain::spin, std::vector<std::int8_t>(inst.poly.n())};
  for (auto& v : g.values) v = static_cast<std::int8_t>(rng.spin());
  return gauge_transform(inst, g);
}

PlantedInstance align_planted(const PlantedInstance& inst, const Configuration& target) {
  check_compatible(inst.poly, target);
  Configuration g = target;
  for (std::size_t i = 0; i < g.size(); ++i)
    g.values[i] = static_cast<std::int8_t>(g.values[i] * inst.planted_config.values[i]);
  return gauge_transform(inst, g);
}

// -- composition ------------------------------------------------------------

std::string to_string(Layout l) { return l == Layout::shared ? "shared" : "disjoint"; }

Layout parse_layout(const std::string& s) {
  if (s == "shared") return Layout::shared;
  if (s == "disjoint") return Layout::disjoint;
  throw std::invalid_argument("unknown layout '" + s + "'");
}

PlantedInstance compose(std::span<const PlantedInstance> parts, Layout layout) {
  if (parts.empty()) throw std::invalid_argument("compose needs at least one part");
  for (const auto& p : parts) {
    if (!p.certified)
      throw std::invalid_argument("compose: part has an uncertified planted energy");
    if (p.poly.domain() != Domain::spin)
      throw std::invalid_argument("compose: parts must be spin instances");
  }

  std::size_t n = 0;
  Configuration planted{Domain::spin, {}};
  if (layout == Layout::disjoint) {
    for (const auto& p : parts) {
      n += p.poly.n();
      planted.values.insert(planted.values.end(), p.planted_config.values.begin(),
                            p.planted_config.values.end());
    }
  } else {
    n = parts.front().poly.n();
    planted = parts.front().planted_config;
    for (const auto& p : parts)
      if (p.poly.n() != n || p.planted_config != planted)
        throw std::invalid_argument(
            "compose: shared-layout parts must have the same variables and planted state");
  }

  Polynomial acc(n, Domain::spin, {}, -1.0);
  std::size_t offset = 0;
  std::size_t degree_sum = 0;
  nlohmann::json part_meta = nlohmann::json::array();
  for (const auto& p : parts) {
    const double e_max = p.poly.constant() + p.poly.abs_coeff_sum();
    // Emax - H >= 0 everywhere.
    auto factor = add_constant(scale(p.poly, -1.0), e_max);
    if (layout == Layout::disjoint) {
      factor = relabel(factor, offset, n);
      offset += p.poly.n();
    } else {
      factor = relabel(factor, 0, n);
    }
    acc = multiply(acc, factor);
    degree_sum += p.poly.degree();
    part_meta.push_back(p.meta);
  }

  PlantedInstance out;
  out.poly = std::move(acc);
  out.planted_config = std::move(planted);
  out.planted_energy = evaluate(out.poly, out.planted_config);

  // The construction already implies minimality; this catches bookkeeping
  // errors before an instance is written anywhere.
  Rng rng(derive_seed(n, {degree_sum, 0xc0de}));
  for (int i = 0; i < 1000; ++i) {
    Configuration c{Domain::spin, std::vector<std::int8_t>(n)};
    for (auto& v : c.values) v = static_cast<std::int8_t>(rng.spin());
    if (evaluate(out.poly, c) < out.planted_energy)
      throw std::logic_error("compose: found a configuration below the planted energy");
  }

  out.certified = true;
  out.meta = {{"generator", "composite"},
              {"version", kGeneratorVersion},
              {"k", out.poly.degree()},
              {"layout", to_string(layout)},
              {"parts", std::move(part_meta)}};
  return out;
}

// -- benchmark sets ---------------------------------------------------------

namespace {

bool is_even_square(std::size_t n, std::size_t& side) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n || r % 2 != 0 || r < 2) return false;
  side = r;
  return true;
}

}  // namespace

SizeSplit split_size(int k, std::size_t n, Layout layout) {
  if (k != 3 && k != 4) throw std::invalid_argument("benchmark sets support k = 3 or 4");
  SizeSplit s;
  if (layout == Layout::shared) {
    std::size_t L = 0;
    if (!is_even_square(n, L))
      throw std::invalid_argument("shared layout needs N to be the square of an even side");
    if (k == 3) {
      s.lattice_sides = {L};
      s.field_spins = n;
    } else {
      s.lattice_sides = {L, L};
    }
    return s;
  }
  if (k == 3) {
    std::size_t L = 0;
    for (std::size_t l = 2; l * l < n; l += 2) L = l;
    if (L == 0) throw std::invalid_argument("N too small for a lattice plus field split");
    s.lattice_sides = {L};
    s.field_spins = n - L * L;
    return s;
  }
  // Two lattices: prefer the most balanced pair of even sides.
  for (std::size_t b = 2; 2 * b * b <= n; b += 2) {
    std::size_t a = 0;
    if (is_even_square(n - b * b, a)) s.lattice_sides = {a, b};
  }
  if (s.lattice_sides.empty())
    throw std::invalid_argument("N is not a sum of two even squares");
  return s;
}

PlantedInstance generate_benchmark_instance(const BenchmarkSpec& spec, std::size_t index,
                                            std::uint64_t seed) {
  const auto split = split_size(spec.k, spec.n, spec.layout);
  const std::uint64_t inst_seed =
      derive_seed(seed, {static_cast<std::uint64_t>(spec.k), spec.n, index});
  std::vector<PlantedInstance> parts;
  std::uint64_t label = 0;
  for (auto L : split.lattice_sides)
    parts.push_back(plant_square_tile(L, spec.probs, derive_seed(inst_seed, {++label})));
  if (split.field_spins > 0)
    parts.push_back(plant_field(split.field_spins, derive_seed(inst_seed, {++label})));
  if (spec.layout == Layout::shared)
    for (std::size_t i = 1; i < parts.size(); ++i)
      parts[i] = align_planted(parts[i], parts[0].planted_config);

  auto inst = compose(parts, spec.layout);
  inst.meta["instance_seed"] = inst_seed;
  inst.meta["master_seed"] = seed;
  inst.meta["index"] = index;
  inst.meta["n"] = spec.n;
  inst.meta["class_probabilities"] = probs_json(spec.probs);
  return inst;
}

std::vector<PlantedInstance> generate_benchmark_set(int k, std::span<const std::size_t> sizes,
                                                    std::size_t count, std::uint64_t seed,
                                                    Layout layout,
                                                    const ClassProbabilities& probs) {
  std::vector<PlantedInstance> out;
  for (auto n : sizes) {
    BenchmarkSpec spec{k, n, layout, probs};
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(generate_benchmark_instance(spec, i, seed));
  }
  return out;
}

}  // namespace hobo
