#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "generators.hpp"
#include "hobo/experiment.hpp"
#include "hobo/instance_io.hpp"

using namespace hobo;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test, removed on exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("hobo_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.localities = {3};
  c.sizes = {16};
  c.instances_per_size = 2;
  c.runs_per_instance = 2;
  c.timeout_s = 5;
  c.escalate = false;
  return c;
}

Polynomial parse(const std::string& text) {
  std::istringstream is(text);
  return read_hobo(is);
}

}  // namespace

TEST_CASE(".hobo round trip is bit exact") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto domain = i % 2 ? Domain::spin : Domain::boolean;
    const auto raw = testing::random_poly(rng, 1 + rng.below(12), domain, rng.below(15), 1, 4);
    const Polynomial p(raw.n(), domain, {raw.terms().begin(), raw.terms().end()}, rng.uniform() - 0.5);
    std::stringstream ss;
    write_hobo(ss, scale(p, 1.0 / 3.0), {"round trip"});
    REQUIRE(read_hobo(ss) == scale(p, 1.0 / 3.0));
  }
}

TEST_CASE(".hobo parsing") {
  const auto p = parse("HOBO v1 domain=spin n=3\n# a comment\nconst 1.5\n2 0 1\n-1 0 1 2\n");
  CHECK(p.n() == 3);
  CHECK(p.domain() == Domain::spin);
  CHECK(p.constant() == 1.5);
  CHECK(p.terms().size() == 2);
  CHECK(parse("HOBO v1 domain=bool n=2\n1 0\n").domain() == Domain::boolean);

  CHECK_THROWS_AS(parse(""), IoError);
  CHECK_THROWS_AS(parse("HOBO v2 domain=spin n=3\n"), IoError);
  CHECK_THROWS_AS(parse("HOBO v1 domain=ising n=3\n"), IoError);
  CHECK_THROWS_AS(parse("HOBO v1 domain=spin n=3\n1 0 5\n"), IoError);
  CHECK_THROWS_AS(parse("HOBO v1 domain=spin n=3\nx 0\n"), IoError);
  CHECK_THROWS_AS(parse("HOBO v1 domain=spin n=3\n1 0 0\n"), IoError);
  try {
    parse("HOBO v1 domain=spin n=3\n1 0\n1 9\n");
    FAIL("no throw");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_hobo("/nonexistent/x.hobo"), IoError);
}

TEST_CASE("planted sidecar and reduction manifest round trip") {
  TempDir tmp("sidecar");
  const auto inst = generate_benchmark_instance({4, 16, Layout::shared, {}}, 0, 42);
  const auto files = save_instance(tmp.path / "a", inst);
  CHECK(files.size() == 2);
  const auto back = load_instance(tmp.path / "a");
  CHECK(back.poly == inst.poly);
  CHECK(back.planted_config.values == inst.planted_config.values);
  CHECK(back.planted_energy == inst.planted_energy);
  CHECK(back.meta == inst.meta);
  CHECK(list_instances(tmp.path) == std::vector<fs::path>{tmp.path / "a"});

  const auto red = reduce_instance(inst, PenaltyStrategy::per_term_tight);
  const auto manifest = reduction_from_json(reduction_to_json(red.reduction));
  CHECK(manifest.n_original == red.reduction.n_original);
  CHECK(manifest.n_total == red.reduction.n_total);
  REQUIRE(manifest.substitutions.size() == red.reduction.substitutions.size());
  for (std::size_t i = 0; i < manifest.substitutions.size(); ++i) {
    CHECK(manifest.substitutions[i].a == red.reduction.substitutions[i].a);
    CHECK(manifest.substitutions[i].b == red.reduction.substitutions[i].b);
    CHECK(manifest.substitutions[i].aux == red.reduction.substitutions[i].aux);
    CHECK(manifest.substitutions[i].penalty == red.reduction.substitutions[i].penalty);
  }
  auto broken = reduction_to_json(red.reduction);
  broken["n_total"] = 3;
  CHECK_THROWS(reduction_from_json(broken));

  // A sidecar whose energy disagrees with the polynomial is rejected.
  auto j = read_json(tmp.path / "a.planted.json");
  j["planted_energy"] = inst.planted_energy + 1;
  write_json(tmp.path / "a.planted.json", j);
  CHECK_THROWS_AS(load_instance(tmp.path / "a"), IoError);
}

TEST_CASE("checksums") {
  TempDir tmp("sha");
  write_text_atomic(tmp.path / "abc.txt", "abc");
  CHECK(file_checksum(tmp.path / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_text_atomic(tmp.path / "empty.txt", "");
  CHECK(file_checksum(tmp.path / "empty.txt") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK_THROWS_AS(file_checksum(tmp.path / "missing"), IoError);
}

TEST_CASE("results table") {
  ResultRow r{4, 64, "k4/N64/i003", 7, 123456789012345ull, 100, 0.25, -1234.5, -1234.5, true, 0.0};
  const auto back = parse_result_line(to_csv_line(r));
  CHECK(back.k == 4);
  CHECK(back.n == 64);
  CHECK(back.instance_id == r.instance_id);
  CHECK(back.run_id == 7);
  CHECK(back.seed == r.seed);
  CHECK(back.tau_s == 0.25);
  CHECK(back.best_energy == r.best_energy);
  CHECK(back.solved);
  CHECK(split_csv(kResultsHeader).size() == 11);
  CHECK_THROWS_AS(parse_result_line("1,2,3"), IoError);
  ResultRow undefined = r;
  undefined.planted_energy = 0.0;
  undefined.residual = std::numeric_limits<double>::quiet_NaN();
  CHECK(split_csv(to_csv_line(undefined))[10] == "NA");
  CHECK(std::isnan(parse_result_line(to_csv_line(undefined)).residual));

  TempDir tmp("results");
  const auto path = tmp.path / "results.csv";
  CHECK(read_results(path).empty());
  {
    std::ofstream os(path);
    os << kResultsHeader << '\n' << to_csv_line(r) << '\n' << to_csv_line(r).substr(0, 10);
  }
  CHECK(read_results(path).size() == 1);
}

TEST_CASE("aggregate rows mark absent values") {
  AggregateRow a;
  a.k = 3;
  a.n = 16;
  a.fraction_solved = 1.0;
  a.tts_median = 2.0;
  const auto f = split_csv(to_csv_line(a));
  CHECK(f.size() == split_csv(kAggregateHeader).size());
  CHECK(f[3] == "2");
  CHECK(f[4] == "NA");
}

TEST_CASE("configuration parsing") {
  const auto c = parse_config(
      "# comment\nlocalities = 4\nsizes = 16, 64\nruns_per_instance = 3\ntimeout_s = 2.5\npenalty = global\n"
      "class_probabilities = 0.2, 0.3, 0.5\nsolver = sa\nescalate = false\n");
  CHECK(c.localities == std::vector<int>{4});
  CHECK(c.sizes == std::vector<std::size_t>{16, 64});
  CHECK(c.runs_per_instance == 3);
  CHECK(c.timeout_s == 2.5);
  CHECK(c.penalty == PenaltyStrategy::rosenberg_global);
  CHECK(c.class_probabilities.p3 == 0.5);
  CHECK(c.solver == "sa");
  CHECK_FALSE(c.escalate);
  CHECK(c.to_json()["runs_per_instance"] == 3);

  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("runs_per_instance = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("localities = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("timeout_s = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("solver = magic\n"), ConfigError);
}

TEST_CASE("parallel_for") {
  std::vector<int> seen(100, 0);
  parallel_for(seen.size(), 3, [&](std::size_t i) { seen[i] += 1; });
  for (int s : seen) CHECK(s == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) { if (i == 5) throw std::runtime_error("x"); }),
                  std::runtime_error);
}

TEST_CASE("generate is deterministic and verifiable") {
  TempDir a("gen_a"), b("gen_b");
  auto cfg = small_config();
  cfg.localities = {3, 4};
  const auto ma = generate_set(cfg, a.path);
  const auto mb = generate_set(cfg, b.path);
  CHECK(ma["files"] == mb["files"]);
  CHECK(ma["files"].size() == 2 * 2 * 2);
  CHECK(find_instances(a.path).size() == 4);
  CHECK(fs::exists(a.path / group_dir(4, 16) / (instance_name(1) + ".hobo")));

  const auto report = verify_set(cfg, a.path);
  CHECK(report.failures.empty());
  CHECK(report.checked == 4);

  // Tampering is caught by the manifest checksum.
  {
    std::ofstream os(a.path / group_dir(3, 16) / (instance_name(0) + ".hobo"), std::ios::app);
    os << "# edited\n";
  }
  CHECK_FALSE(verify_set(cfg, a.path).failures.empty());
}

TEST_CASE("reduce, solve, resume, report") {
  TempDir tmp("pipeline");
  auto cfg = small_config();
  generate_set(cfg, tmp.path / "native");
  const auto summary = reduce_set(cfg, tmp.path / "native", tmp.path / "reduced");
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].n_total_mean == doctest::Approx(48.0));
  CHECK(verify_set(cfg, tmp.path / "reduced").failures.empty());
  const auto red = load_instance(tmp.path / "reduced" / group_dir(3, 16) / instance_name(0));
  CHECK(instance_k(red) == 3);
  CHECK(instance_n(red) == 16);

  const auto results = tmp.path / "results" / "results.csv";
  const auto first = solve_set(cfg, tmp.path / "native", results);
  CHECK(first.executed == 4);
  const auto rows = read_results(results);
  CHECK(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.solved);

  // A second invocation finds every run already present.
  const auto again = solve_set(cfg, tmp.path / "native", results);
  CHECK(again.executed == 0);
  CHECK(again.skipped == 4);
  CHECK(read_results(results).size() == 4);

  // Interrupted mid-row: the partial line is dropped and the run redone.
  {
    const auto text = read_text(results);
    std::ofstream os(results, std::ios::trunc | std::ios::binary);
    os << text.substr(0, text.size() - 20);
  }
  CHECK(read_results(results).size() == 3);
  const auto resumed = solve_set(cfg, tmp.path / "native", results);
  CHECK(resumed.executed == 1);
  CHECK(read_results(results).size() == 4);

  report(cfg, tmp.path / "results", tmp.path / "native", tmp.path / "report");
  CHECK(fs::exists(tmp.path / "report" / "aggregate_t5.csv"));
  CHECK(fs::exists(tmp.path / "report" / "scaling_fit.json"));
  const auto fit = read_json(tmp.path / "report" / "scaling_fit.json");
  CHECK(fit.dump().find("not estimable") != std::string::npos);

  fs::create_directories(tmp.path / "empty");
  CHECK_THROWS_AS(report(cfg, tmp.path / "empty", std::nullopt, tmp.path / "r2"), IoError);
}
