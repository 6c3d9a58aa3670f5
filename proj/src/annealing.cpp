#include "hobo/annealing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hobo/rng.hpp"
#include "hobo/spin_system.hpp"

namespace hobo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Tracks the best configuration seen and evaluates the stop rule.
class BestTracker {
 public:
  explicit BestTracker(const StopRule& stop) : stop_(stop) {}

  double* best() { return &best_; }

  void improve(const SpinState& s) {
    best_config_ = s.spins();
    // Incremental energies drift by rounding; sub-tolerance gains are not new levels.
    if (!trace_.empty() && best_ > trace_.back() - 1e-9 * std::max(1.0, std::abs(trace_.back())))
      trace_.back() = std::min(trace_.back(), best_);
    else
      trace_.push_back(best_);
  }

  bool hit() const { return stop_.target && energy_matches(best_, *stop_.target, stop_.target_tolerance); }

  template <typename Fn>
  void finish(SolveRun& run, Fn&& exact_energy) {
    run.best_config = {Domain::spin, best_config_};
    run.best_energy = exact_energy(run.best_config);
    run.best_trace = std::move(trace_);
    if (!run.best_trace.empty()) run.best_trace.back() = run.best_energy;
    run.hit_target = stop_.target && energy_matches(run.best_energy, *stop_.target,
                                                    stop_.target_tolerance);
  }

 private:
  StopRule stop_;
  double best_ = std::numeric_limits<double>::infinity();
  std::vector<std::int8_t> best_config_;
  std::vector<double> trace_;
};

}  // namespace

bool energy_matches(double energy, double target, double rel_tol) {
  const double tol = std::max(rel_tol * std::abs(target), 1e-6);
  return energy <= target + tol;
}

void Schedule::validate() const {
  if (!(beta_start < beta_end)) throw std::invalid_argument("schedule: beta_start must be < beta_end");
  if (steps < 2) throw std::invalid_argument("schedule: at least two steps required");
  if (kind == ScheduleKind::geometric_temperature && beta_start <= 0.0)
    throw std::invalid_argument("schedule: geometric temperature schedule needs beta_start > 0");
}

std::vector<double> Schedule::betas() const {
  validate();
  std::vector<double> b(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
    if (kind == ScheduleKind::linear_beta) {
      b[i] = beta_start + f * (beta_end - beta_start);
    } else {
      // Temperatures geometric between 1/beta_start and 1/beta_end.
      b[i] = beta_start * std::pow(beta_end / beta_start, f);
    }
  }
  b.back() = beta_end;
  return b;
}

SolveRun simulated_annealing(const Polynomial& poly, const Schedule& schedule,
                             std::size_t sweeps_per_step, std::uint64_t seed,
                             const StopRule& stop) {
  const auto t0 = Clock::now();
  const auto betas = schedule.betas();
  if (sweeps_per_step == 0) throw std::invalid_argument("simulated_annealing: sweeps_per_step must be >= 1");
  const SpinSystem sys(poly);
  Rng rng(derive_seed(seed, {0x5a}));
  SpinState state(sys, rng);
  BestTracker tracker(stop);
  *tracker.best() = state.energy();
  tracker.improve(state);

  SolveRun run;
  run.seed = seed;
  run.timeout_s = stop.timeout_s;
  const auto core0 = Clock::now();
  auto on_improve = [&](const SpinState& s) { tracker.improve(s); };
  bool done = tracker.hit();
  for (double beta : betas) {
    for (std::size_t k = 0; k < sweeps_per_step && !done; ++k) {
      state.sweep(beta, rng, tracker.best(), on_improve);
      ++run.sweeps;
      if (tracker.hit()) done = true;
      if (stop.max_sweeps && run.sweeps >= stop.max_sweeps) done = true;
      if (stop.timeout_s > 0.0 && seconds_since(core0) >= stop.timeout_s) {
        run.timed_out = true;
        done = true;
      }
    }
    if (done) break;
  }
  run.core_s = seconds_since(core0);
  tracker.finish(run, [&](const Configuration& c) { return evaluate(poly, c); });
  run.params = {{"solver", "sa"},
                {"schedule", schedule.kind == ScheduleKind::linear_beta ? "linear_beta"
                                                                        : "geometric_temperature"},
                {"beta_start", schedule.beta_start},
                {"beta_end", schedule.beta_end},
                {"steps", schedule.steps},
                {"sweeps_per_step", sweeps_per_step}};
  run.tau_s = seconds_since(t0);
  return run;
}

std::size_t default_replica_count(std::size_t n) {
  const auto bits = n <= 1 ? 0 : static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
  return std::clamp<std::size_t>(2 * bits, 8, 64);
}

Ladder auto_tune_ladder(const Polynomial& poly) {
  if (poly.terms().empty())
    throw std::invalid_argument("auto_tune_ladder: polynomial has no non-constant terms");
  std::vector<double> incident(poly.n(), 0.0);
  double min_abs = std::numeric_limits<double>::infinity();
  for (const auto& t : poly.terms()) {
    min_abs = std::min(min_abs, std::abs(t.coeff));
    for (auto v : t.vars) incident[v] += std::abs(t.coeff);
  }
  std::vector<double> worst;
  for (double s : incident)
    if (s > 0.0) worst.push_back(2.0 * s);

  auto mean_acceptance = [&](double t) {
    double a = 0.0;
    for (double d : worst) a += std::exp(-d / t);
    return a / static_cast<double>(worst.size());
  };
  // mean_acceptance is increasing in t; bisect in log space.
  double lo = *std::min_element(worst.begin(), worst.end()) / std::log(1.0 / 0.8);
  double hi = *std::max_element(worst.begin(), worst.end()) / std::log(1.0 / 0.8);
  for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (mean_acceptance(mid) >= 0.8)
      hi = mid;
    else
      lo = mid;
  }
  Ladder l;
  l.t_max = hi;
  l.t_min = 2.0 * min_abs / std::log(100.0);
  return l;
}

std::vector<double> geometric_temperatures(double t_min, double t_max, std::size_t count) {
  if (count < 2) throw std::invalid_argument("ladder needs at least two replicas");
  if (!(t_min > 0.0 && t_min < t_max)) throw std::invalid_argument("ladder needs 0 < t_min < t_max");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i)
    t[i] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / static_cast<double>(count - 1));
  t.back() = t_max;
  return t;
}

double exchange_acceptance(double beta_a, double e_a, double beta_b, double e_b) {
  const double x = (beta_a - beta_b) * (e_a - e_b);
  return x >= 0.0 ? 1.0 : std::exp(x);
}

SolveRun parallel_tempering(const Polynomial& poly, const TemperingParams& params,
                            std::uint64_t seed, const StopRule& stop) {
  const auto t0 = Clock::now();
  if (!(stop.timeout_s > 0.0) && stop.max_sweeps == 0 && !stop.target)
    throw std::invalid_argument("parallel_tempering: needs a timeout, sweep budget or target");
  if (stop.timeout_s < 0.0) throw std::invalid_argument("parallel_tempering: timeout must be positive");
  if (params.sweeps_between_exchanges == 0)
    throw std::invalid_argument("parallel_tempering: sweeps_between_exchanges must be >= 1");
  const std::size_t count = params.replicas ? params.replicas : default_replica_count(poly.n());
  if (count < 2) throw std::invalid_argument("parallel_tempering: needs at least two replicas");
  const Ladder ladder = params.ladder ? *params.ladder : auto_tune_ladder(poly);
  const auto temps = geometric_temperatures(ladder.t_min, ladder.t_max, count);
  std::vector<double> beta(count);
  for (std::size_t i = 0; i < count; ++i) beta[i] = 1.0 / temps[i];

  const SpinSystem sys(poly);
  std::vector<Rng> rngs;
  std::vector<SpinState> states;
  rngs.reserve(count);
  states.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    rngs.emplace_back(derive_seed(seed, {0x9e, i}));
    states.emplace_back(sys, rngs.back());
  }
  Rng exchange_rng(derive_seed(seed, {0xe7}));
  std::vector<std::size_t> slot(count);  // slot (temperature) -> replica
  std::iota(slot.begin(), slot.end(), std::size_t{0});

  BestTracker tracker(stop);
  for (const auto& s : states)
    if (s.energy() < *tracker.best()) {
      *tracker.best() = s.energy();
      tracker.improve(s);
    }
  auto on_improve = [&](const SpinState& s) { tracker.improve(s); };

  SolveRun run;
  run.seed = seed;
  run.timeout_s = stop.timeout_s;
  std::uint64_t exchanges = 0, accepted = 0;
  const auto core0 = Clock::now();
  bool done = tracker.hit();
  for (std::uint64_t epoch = 0; !done; ++epoch) {
    for (std::size_t k = 0; k < params.sweeps_between_exchanges && !done; ++k) {
      for (std::size_t i = 0; i < count; ++i)
        states[slot[i]].sweep(beta[i], rngs[i], tracker.best(), on_improve);
      ++run.sweeps;
      if (tracker.hit()) done = true;
      if (stop.max_sweeps && run.sweeps >= stop.max_sweeps) done = true;
      if (stop.timeout_s > 0.0 && seconds_since(core0) >= stop.timeout_s) {
        run.timed_out = !done;
        done = true;
      }
    }
    for (std::size_t i = epoch % 2; i + 1 < count; i += 2) {
      ++exchanges;
      const double p = exchange_acceptance(beta[i], states[slot[i]].energy(), beta[i + 1],
                                           states[slot[i + 1]].energy());
      if (p >= 1.0 || exchange_rng.uniform() < p) {
        std::swap(slot[i], slot[i + 1]);
        ++accepted;
      }
    }
  }
  run.core_s = seconds_since(core0);
  tracker.finish(run, [&](const Configuration& c) { return evaluate(poly, c); });
  run.params = {{"solver", "pt"},
                {"replicas", count},
                {"t_min", ladder.t_min},
                {"t_max", ladder.t_max},
                {"sweeps_between_exchanges", params.sweeps_between_exchanges},
                {"exchange_rate", exchanges ? static_cast<double>(accepted) / static_cast<double>(exchanges) : 0.0}};
  run.tau_s = seconds_since(t0);
  return run;
}

}  // namespace hobo
