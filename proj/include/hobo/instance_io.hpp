#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "hobo/planting.hpp"
#include "hobo/polynomial.hpp"
#include "hobo/quadratize.hpp"

namespace hobo {

// Raised for unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text format:
//   HOBO v1 domain=<spin|bool> n=<N>
//   # comment
//   const <value>
//   <coeff> <i1> <i2> ...
void write_hobo(std::ostream& os, const Polynomial& poly, const std::vector<std::string>& comments = {});
Polynomial read_hobo(std::istream& is);

void save_hobo(const std::filesystem::path& path, const Polynomial& poly,
               const std::vector<std::string>& comments = {});
Polynomial load_hobo(const std::filesystem::path& path);

nlohmann::json planted_to_json(const PlantedInstance& inst);
// Fills planted_config, planted_energy, certified and meta; poly is taken as given.
PlantedInstance planted_from_json(const nlohmann::json& j, Polynomial poly);

nlohmann::json reduction_to_json(const ReductionResult& red);
// The qubo itself is not stored in the manifest; it is left empty.
ReductionResult reduction_from_json(const nlohmann::json& j);

// <stem>.hobo plus <stem>.planted.json. Returns the paths written.
std::vector<std::filesystem::path> save_instance(const std::filesystem::path& stem,
                                                 const PlantedInstance& inst);
// Loads both files and checks the stored planted energy against the polynomial.
PlantedInstance load_instance(const std::filesystem::path& stem);

// Instance stems (path without extension) of all .hobo files in dir, sorted.
std::vector<std::filesystem::path> list_instances(const std::filesystem::path& dir);

std::string format_double(double x);

void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// SHA-256 of the file bytes as lowercase hex.
std::string file_checksum(const std::filesystem::path& path);

struct ResultRow {
  int k = 0;
  std::size_t n = 0;
  std::string instance_id;
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  double timeout_s = 0.0;
  double tau_s = 0.0;
  double best_energy = 0.0;
  double planted_energy = 0.0;
  bool solved = false;
  double residual = 0.0;
};

extern const char* const kResultsHeader;
std::string to_csv_line(const ResultRow& r);
ResultRow parse_result_line(const std::string& line);
// Missing file gives an empty table. Rows must follow kResultsHeader.
std::vector<ResultRow> read_results(const std::filesystem::path& path);

struct AggregateRow {
  int k = 0;
  std::size_t n = 0;
  double fraction_solved = 0.0;
  std::optional<double> tts_median, tts_ci_lo, tts_ci_hi;
  std::optional<double> rho_s_mean, rho_s_std;
  std::optional<double> mu0_mean, coupler_std, coupler_kurtosis;
};

extern const char* const kAggregateHeader;
// Absent values are written as "NA".
std::string to_csv_line(const AggregateRow& r);

std::vector<std::string> split_csv(const std::string& line);

}  // namespace hobo
