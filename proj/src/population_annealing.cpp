#include "hobo/population_annealing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hobo/rng.hpp"
#include "hobo/spin_system.hpp"

namespace hobo {

double family_entropy(std::span<const double> fractions) {
  double sum = 0.0, s = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("family_entropy: negative fraction");
    sum += f;
    if (f > 0.0) s -= f * std::log(f);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("family_entropy: fractions do not sum to 1");
  return std::max(s, 0.0);
}

namespace {

struct Replica {
  SpinState state;
  std::uint32_t family;
};

void record_step(PamcEstimate& est, double beta, const std::vector<Replica>& pop,
                 std::vector<std::size_t>& counts) {
  std::fill(counts.begin(), counts.end(), 0);
  double e = 0.0;
  for (const auto& r : pop) {
    ++counts[r.family];
    e += r.state.energy();
  }
  const double R = static_cast<double>(pop.size());
  std::vector<double> fr;
  for (auto c : counts)
    if (c) fr.push_back(static_cast<double>(c) / R);
  PamcStep st;
  st.beta = beta;
  st.mean_energy = e / R;
  st.entropy = family_entropy(fr);
  st.families = fr.size();
  est.steps.push_back(st);
  est.final_fractions = std::move(fr);
}

}  // namespace

PamcEstimate population_annealing(const Polynomial& poly, std::size_t population_size,
                                  const Schedule& schedule, std::size_t sweeps_per_step,
                                  std::uint64_t seed) {
  if (population_size < 2) throw std::invalid_argument("population_annealing: population size must be >= 2");
  if (sweeps_per_step == 0) throw std::invalid_argument("population_annealing: sweeps_per_step must be >= 1");
  const auto betas = schedule.betas();
  const SpinSystem sys(poly);
  const std::size_t R = population_size;

  // One stream per population slot; a resampled replica continues on the
  // stream of the slot it lands in.
  std::vector<Rng> rngs;
  rngs.reserve(R);
  for (std::size_t j = 0; j < R; ++j) rngs.emplace_back(derive_seed(seed, {0xa1, j}));
  Rng resample_rng(derive_seed(seed, {0x7e}));

  std::vector<Replica> pop;
  pop.reserve(R);
  for (std::size_t j = 0; j < R; ++j) pop.push_back({SpinState(sys, rngs[j]), static_cast<std::uint32_t>(j)});

  PamcEstimate est;
  est.population_size = R;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : pop) best = std::min(best, r.state.energy());
  std::vector<std::size_t> counts(R);
  std::vector<double> cum(R);
  std::vector<Replica> next;
  next.reserve(R);
  auto ignore = [](const SpinState&) {};

  record_step(est, betas[0], pop, counts);
  for (std::size_t i = 1; i < betas.size(); ++i) {
    const double dbeta = betas[i] - betas[i - 1];
    double emin = std::numeric_limits<double>::infinity();
    for (const auto& r : pop) emin = std::min(emin, r.state.energy());
    double total = 0.0;
    for (std::size_t j = 0; j < R; ++j) {
      total += std::exp(-dbeta * (pop[j].state.energy() - emin));
      cum[j] = total;
    }
    // Systematic resampling: R evenly spaced pointers with one random offset.
    next.clear();
    const double step = total / static_cast<double>(R);
    double u = resample_rng.uniform() * step;
    std::size_t j = 0;
    for (std::size_t m = 0; m < R; ++m, u += step) {
      while (j + 1 < R && cum[j] <= u) ++j;
      next.push_back(pop[j]);
    }
    pop.swap(next);

    for (std::size_t m = 0; m < R; ++m)
      for (std::size_t s = 0; s < sweeps_per_step; ++s) pop[m].state.sweep(betas[i], rngs[m], &best, ignore);
    record_step(est, betas[i], pop, counts);
  }
  est.entropy = est.steps.back().entropy;
  est.rho_s = std::clamp(static_cast<double>(R) / std::exp(est.entropy), 1.0, static_cast<double>(R));
  est.best_energy = best;
  return est;
}

RhoConvergence rho_s_converged(const Polynomial& poly, const RhoProtocol& protocol,
                               std::uint64_t seed) {
  if (protocol.initial_size < 2 || protocol.restarts < 2)
    throw std::invalid_argument("rho_s_converged: needs initial size >= 2 and >= 2 restarts");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  const bool budgeted = protocol.time_budget_s > 0.0;

  RhoConvergence out;
  for (std::size_t R = protocol.initial_size; R <= protocol.max_size; R *= 2) {
    std::vector<double> rho;
    PamcEstimate first;
    bool out_of_time = false;
    for (std::size_t k = 0; k < protocol.restarts; ++k) {
      auto est = population_annealing(poly, R, protocol.schedule, protocol.sweeps_per_step,
                                      derive_seed(seed, {R, k}));
      rho.push_back(est.rho_s);
      if (k == 0) first = std::move(est);
      if (budgeted && elapsed() > protocol.time_budget_s) {
        out_of_time = true;
        break;
      }
    }
    if (out_of_time) break;  // an incomplete level is not used
    RhoLevel lv;
    lv.population_size = R;
    lv.restarts = rho.size();
    for (double r : rho) lv.mean += r;
    lv.mean /= static_cast<double>(rho.size());
    double ss = 0.0;
    for (double r : rho) ss += (r - lv.mean) * (r - lv.mean);
    lv.stddev = std::sqrt(ss / static_cast<double>(rho.size() - 1));
    lv.stderr_ = lv.stddev / std::sqrt(static_cast<double>(rho.size()));
    out.levels.push_back(lv);
    out.traces.push_back(std::move(first));
    out.rho_s = lv.mean;
    out.rho_s_std = lv.stddev;

    if (out.levels.size() >= 2) {
      const auto& a = out.levels[out.levels.size() - 2];
      const auto& b = out.levels.back();
      if (std::abs(a.mean - b.mean) <= std::hypot(a.stderr_, b.stderr_)) {
        out.converged = true;
        break;
      }
    }
    if (budgeted && elapsed() > protocol.time_budget_s) break;
  }
  if (out.levels.empty())
    throw std::runtime_error("rho_s_converged: budget exhausted before the first estimate");
  return out;
}

}  // namespace hobo
