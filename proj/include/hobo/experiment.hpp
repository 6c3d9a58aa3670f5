#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "hobo/annealing.hpp"
#include "hobo/instance_io.hpp"
#include "hobo/metrics.hpp"
#include "hobo/planting.hpp"
#include "hobo/population_annealing.hpp"
#include "hobo/quadratize.hpp"

namespace hobo {

// Bad configuration values or keys. Maps to the usage exit code.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::vector<int> localities{3, 4};
  std::vector<std::size_t> sizes{16, 64, 144};
  std::size_t instances_per_size = 30;
  std::size_t runs_per_instance = 30;
  double timeout_s = 100.0;
  double escalation_timeout_s = 500.0;
  bool escalate = true;
  std::uint64_t max_sweeps = 0;  // 0 = bounded by the timeout only
  PenaltyStrategy penalty = PenaltyStrategy::per_term_tight;
  Layout layout = Layout::shared;
  ClassProbabilities class_probabilities;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
  std::string solver = "pt";
  std::size_t replicas = 0;
  std::size_t sweeps_between_exchanges = 1;
  Schedule schedule;  // SA and PAMC
  std::size_t sweeps_per_step = 10;
  std::size_t pamc_initial_size = 8;
  std::size_t pamc_restarts = 100;
  std::size_t pamc_max_size = 1 << 14;
  double pamc_time_budget_s = 0.0;
  Domain metric_domain = Domain::boolean;
  std::size_t verify_max_n = 20;

  void validate() const;
  nlohmann::json to_json() const;
};

// Plain "key = value" lines; '#' starts a comment; lists are comma separated.
// Keys not mentioned keep their current value in base.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Runs fn(i) for i in [0, count) on up to workers threads. The first
// exception thrown by any item is rethrown after all threads finish.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Sub-directory of a set for one (k, N) group, e.g. "k3/N16".
std::filesystem::path group_dir(int k, std::size_t n);
std::string instance_name(std::size_t index);

// Writes the instance set plus manifest.json. Returns the manifest.
nlohmann::json generate_set(const ExperimentConfig& cfg, const std::filesystem::path& out);

// Lists instance stems under root recursively, sorted.
std::vector<std::filesystem::path> find_instances(const std::filesystem::path& root);

// Original locality and size of an instance (reduced instances report the
// values before reduction).
int instance_k(const PlantedInstance& inst);
std::size_t instance_n(const PlantedInstance& inst);

struct ReductionSummaryRow {
  int k = 0;
  std::size_t n = 0;
  std::size_t count = 0;
  double n_total_mean = 0.0;
  double n_total_std = 0.0;
  double density_original_mean = 0.0;
  double density_original_std = 0.0;
  double density_reduced_mean = 0.0;
  double density_reduced_std = 0.0;
};

// Reduces every instance under in into the same layout under out, writing
// the .reduction.json manifests and summary.json. Returns the summary.
std::vector<ReductionSummaryRow> reduce_set(const ExperimentConfig& cfg, const std::filesystem::path& in,
                                            const std::filesystem::path& out);
void print_reduction_summary(std::ostream& os, const std::vector<ReductionSummaryRow>& rows);

// The polynomial in the domain chosen for analysis metrics.
Polynomial metric_view(const Polynomial& spin_poly, Domain domain);

SolveRun solve_once(const ExperimentConfig& cfg, const PlantedInstance& inst, double timeout_s,
                    std::uint64_t seed);

struct SolveStats {
  std::size_t executed = 0;
  std::size_t skipped = 0;
};

// Runs runs_per_instance runs per instance into results_csv, appending one
// row per finished run. Rows already present (same instance, run and
// timeout) are skipped. With escalate set, groups whose fraction solved is
// below 1 get a second phase at escalation_timeout_s.
SolveStats solve_set(const ExperimentConfig& cfg, const std::filesystem::path& in,
                     const std::filesystem::path& results_csv, std::ostream* log = nullptr);

// Per-instance rho_s convergence. Writes rho_s.csv, rho_levels.csv and a
// per-step trace for every level under out/traces.
void pamc_set(const ExperimentConfig& cfg, const std::filesystem::path& in, const std::filesystem::path& out,
              std::ostream* log = nullptr);

// Groups result rows by (k, N, timeout) into benchmark records.
std::map<std::tuple<int, std::size_t, double>, std::vector<BenchmarkRecord>> group_results(
    const std::vector<ResultRow>& rows);

// Aggregates results (and optional rho_s and instance statistics) into
// plot-ready files under out. Throws IoError when there are no results.
void report(const ExperimentConfig& cfg, const std::filesystem::path& results_dir,
            const std::optional<std::filesystem::path>& instances, const std::filesystem::path& out,
            std::ostream* log = nullptr);

struct VerifyReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failures;
};

// Brute-force audit of instances with n <= verify_max_n, replay of
// reduction manifests and manifest checksums.
VerifyReport verify_set(const ExperimentConfig& cfg, const std::filesystem::path& in);

}  // namespace hobo
