#include "hobo/quadratize.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "hobo/rng.hpp"

namespace hobo {

std::string to_string(PenaltyStrategy s) {
  return s == PenaltyStrategy::rosenberg_global ? "rosenberg_global" : "per_term_tight";
}

PenaltyStrategy parse_penalty_strategy(const std::string& s) {
  if (s == "rosenberg_global" || s == "global") return PenaltyStrategy::rosenberg_global;
  if (s == "per_term_tight" || s == "tight") return PenaltyStrategy::per_term_tight;
  throw std::invalid_argument("unknown penalty strategy '" + s + "'");
}

namespace {

bool contains(const std::vector<Index>& vars, Index v) {
  return std::binary_search(vars.begin(), vars.end(), v);
}

std::uint64_t pair_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

VarPair unkey(std::uint64_t k) {
  return {static_cast<Index>(k >> 32), static_cast<Index>(k & 0xffffffffu)};
}

}  // namespace

double penalty_global(const Polynomial& poly) {
  if (poly.terms().empty())
    throw std::invalid_argument("penalty_global: polynomial has no non-constant terms");
  return poly.abs_coeff_sum() + 1.0;
}

double penalty_tight(const Polynomial& poly, VarPair pair) {
  auto [a, b] = pair;
  bool in_high = false;
  double sum = 0.0;
  for (const auto& t : poly.terms()) {
    if (contains(t.vars, a) && contains(t.vars, b)) {
      sum += std::abs(t.coeff);
      in_high = in_high || t.vars.size() > 2;
    }
  }
  if (!in_high)
    throw std::invalid_argument("penalty_tight: pair does not occur in a term of degree > 2");
  return sum + 1.0;
}

VarPair select_pair(const Polynomial& poly) {
  if (poly.degree() <= 2) throw std::invalid_argument("select_pair: polynomial is quadratic");
  std::map<std::uint64_t, std::size_t> counts;
  for (const auto& t : poly.terms()) {
    if (t.vars.size() <= 2) continue;
    for (std::size_t i = 0; i < t.vars.size(); ++i)
      for (std::size_t j = i + 1; j < t.vars.size(); ++j) ++counts[pair_key(t.vars[i], t.vars[j])];
  }
  std::uint64_t best = 0;
  std::size_t best_count = 0;
  for (auto [k, c] : counts)
    if (c > best_count) {
      best = k;
      best_count = c;
    }
  return unkey(best);
}

namespace {

// Working state of the reduction. High-degree terms are kept apart from the
// quadratic remainder so that pair frequencies can be maintained
// incrementally.
class Reducer {
 public:
  Reducer(const Polynomial& poly, const ReduceOptions& opts)
      : opts_(opts), n_(poly.n()), constant_(poly.constant()), rng_(opts.seed) {
    for (const auto& t : poly.terms()) {
      if (t.vars.size() > 2) {
        const auto id = static_cast<std::uint32_t>(high_vars_.size());
        high_vars_.push_back(t.vars);
        high_coeff_.push_back(t.coeff);
        alive_.push_back(true);
        ++alive_count_;
        for (std::size_t i = 0; i < t.vars.size(); ++i)
          for (std::size_t j = i + 1; j < t.vars.size(); ++j)
            add_pair(t.vars[i], t.vars[j], id);
      } else {
        low_[t.vars] += t.coeff;
      }
    }
    if (opts.strategy == PenaltyStrategy::rosenberg_global && alive_count_ > 0)
      global_penalty_ = penalty_global(poly);
  }

  ReductionResult run() {
    ReductionResult r;
    r.n_original = n_;
    r.strategy = opts_.strategy;
    while (alive_count_ > 0) {
      const VarPair p = opts_.pair_rule == PairRule::most_frequent ? most_frequent() : random_pair();
      r.substitutions.push_back(substitute(p));
    }
    std::vector<Term> terms;
    terms.reserve(low_.size());
    for (auto& [vars, c] : low_) terms.push_back({vars, c});
    r.n_total = n_;
    r.qubo = Polynomial(n_, Domain::boolean, std::move(terms), constant_);
    return r;
  }

 private:
  void add_pair(Index a, Index b, std::uint32_t id) {
    const auto k = pair_key(a, b);
    auto& c = count_[k];
    if (c > 0) order_.erase({-c, k});
    ++c;
    order_.insert({-c, k});
    pair_terms_[k].push_back(id);
  }

  void drop_pair(Index a, Index b) {
    const auto k = pair_key(a, b);
    auto it = count_.find(k);
    order_.erase({-it->second, k});
    if (--it->second > 0)
      order_.insert({-it->second, k});
    else
      count_.erase(it);
  }

  VarPair most_frequent() const { return unkey(order_.begin()->second); }

  VarPair random_pair() {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i = 0; i < alive_.size(); ++i)
      if (alive_[i]) ids.push_back(i);
    const auto& v = high_vars_[ids[rng_.below(ids.size())]];
    const auto i = rng_.below(v.size());
    auto j = rng_.below(v.size() - 1);
    if (j >= i) ++j;
    return v[i] < v[j] ? VarPair{v[i], v[j]} : VarPair{v[j], v[i]};
  }

  Substitution substitute(VarPair p) {
    const auto [a, b] = p;
    const auto key = pair_key(a, b);
    const auto y = static_cast<Index>(n_++);

    std::vector<std::uint32_t> ids;
    double affected = 0.0;
    for (auto id : pair_terms_[key]) {
      if (!alive_[id]) continue;
      const auto& v = high_vars_[id];
      if (contains(v, a) && contains(v, b)) {
        ids.push_back(id);
        affected += std::abs(high_coeff_[id]);
      }
    }
    pair_terms_.erase(key);

    Substitution s{a, b, y, 0.0};
    if (opts_.strategy == PenaltyStrategy::rosenberg_global) {
      s.penalty = global_penalty_;
    } else {
      auto q = low_.find({a, b});
      s.penalty = affected + (q != low_.end() ? std::abs(q->second) : 0.0) + 1.0;
    }

    for (auto id : ids) {
      auto& v = high_vars_[id];
      std::vector<Index> rest;
      for (auto x : v)
        if (x != a && x != b) rest.push_back(x);
      drop_pair(a, b);
      for (auto x : rest) {
        drop_pair(a, x);
        drop_pair(b, x);
      }
      rest.push_back(y);  // y is the largest index so far
      if (rest.size() > 2) {
        for (std::size_t i = 0; i + 1 < rest.size(); ++i) add_pair(rest[i], y, id);
        v = std::move(rest);
      } else {
        low_[rest] += high_coeff_[id];
        alive_[id] = false;
        --alive_count_;
        v.clear();
      }
    }

    const double c = s.penalty;
    low_[{a, b}] += c;
    low_[{a, y}] += -2.0 * c;
    low_[{b, y}] += -2.0 * c;
    low_[{y}] += 3.0 * c;
    return s;
  }

  ReduceOptions opts_;
  std::size_t n_;
  double constant_;
  Rng rng_;
  double global_penalty_ = 0.0;

  std::vector<std::vector<Index>> high_vars_;
  std::vector<double> high_coeff_;
  std::vector<bool> alive_;
  std::size_t alive_count_ = 0;

  std::unordered_map<std::uint64_t, int> count_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_terms_;
  // (-count, key): most frequent first, then smallest (a, b).
  std::set<std::pair<int, std::uint64_t>> order_;

  std::map<std::vector<Index>, double> low_;
};

}  // namespace

ReductionResult reduce_to_quadratic(const Polynomial& poly, const ReduceOptions& opts) {
  if (poly.domain() != Domain::boolean)
    throw std::invalid_argument("reduce_to_quadratic: convert spin polynomials to boolean first");
  if (poly.degree() <= 2) {
    ReductionResult r;
    r.qubo = poly;
    r.n_original = r.n_total = poly.n();
    r.strategy = opts.strategy;
    return r;
  }
  return Reducer(poly, opts).run();
}

Configuration lift_solution(const ReductionResult& red, const Configuration& originals) {
  if (originals.domain != Domain::boolean)
    throw std::invalid_argument("lift_solution: configuration must be boolean");
  if (originals.size() != red.n_original)
    throw std::invalid_argument("lift_solution: expected n_original values");
  Configuration out = originals;
  out.values.resize(red.n_total, 0);
  for (const auto& s : red.substitutions)
    out.values[s.aux] = static_cast<std::int8_t>(out.values[s.a] * out.values[s.b]);
  return out;
}

Configuration project_solution(const ReductionResult& red, const Configuration& all) {
  if (all.size() != red.n_total)
    throw std::invalid_argument("project_solution: expected n_total values");
  Configuration out = all;
  out.values.resize(red.n_original);
  return out;
}

ReducedInstance reduce_instance(const PlantedInstance& inst, PenaltyStrategy strategy) {
  if (inst.poly.domain() != Domain::spin)
    throw std::invalid_argument("reduce_instance: expected a spin instance");
  if (inst.poly.degree() <= 2)
    throw std::invalid_argument("reduce_instance: instance is already quadratic");
  ReducedInstance out;
  out.reduction = reduce_to_quadratic(to_boolean(inst.poly), {strategy});
  auto& r = out.instance;
  r.poly = to_spin(out.reduction.qubo);
  r.planted_config = to_spin(lift_solution(out.reduction, to_boolean(inst.planted_config)));
  r.planted_energy = evaluate(r.poly, r.planted_config);
  if (r.planted_energy != inst.planted_energy)
    throw std::logic_error("reduce_instance: lifted planted energy differs from the original");
  r.certified = inst.certified;
  r.meta = inst.meta;
  r.meta["k"] = r.poly.degree();
  r.meta["reduced_from_k"] = inst.poly.degree();
  r.meta["penalty_strategy"] = to_string(strategy);
  r.meta["n_original"] = out.reduction.n_original;
  r.meta["n_total"] = out.reduction.n_total;
  return out;
}

}  // namespace hobo
