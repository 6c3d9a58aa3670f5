#include "hobo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "hobo/brute_force.hpp"
#include "hobo/poly_stats.hpp"
#include "hobo/rng.hpp"

namespace hobo {

namespace fs = std::filesystem;

// -- configuration ------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<T>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  try {
    if (key == "localities") {
      cfg.localities.clear();
      for (const auto& s : split_list(v)) cfg.localities.push_back(parse_unsigned<int>(key, s));
    } else if (key == "sizes") {
      cfg.sizes.clear();
      for (const auto& s : split_list(v)) cfg.sizes.push_back(parse_unsigned<std::size_t>(key, s));
    } else if (key == "instances_per_size") {
      cfg.instances_per_size = parse_unsigned<std::size_t>(key, v);
    } else if (key == "runs_per_instance") {
      cfg.runs_per_instance = parse_unsigned<std::size_t>(key, v);
    } else if (key == "timeout_s") {
      cfg.timeout_s = parse_real(key, v);
    } else if (key == "escalation_timeout_s") {
      cfg.escalation_timeout_s = parse_real(key, v);
    } else if (key == "escalate") {
      cfg.escalate = parse_bool(key, v);
    } else if (key == "max_sweeps") {
      cfg.max_sweeps = parse_unsigned<std::uint64_t>(key, v);
    } else if (key == "penalty") {
      cfg.penalty = parse_penalty_strategy(v);
    } else if (key == "layout") {
      cfg.layout = parse_layout(v);
    } else if (key == "class_probabilities") {
      const auto p = split_list(v);
      if (p.size() != 3) throw ConfigError("config: class_probabilities expects p1,p2,p3");
      cfg.class_probabilities = {parse_real(key, p[0]), parse_real(key, p[1]), parse_real(key, p[2])};
    } else if (key == "seed") {
      cfg.seed = parse_unsigned<std::uint64_t>(key, v);
    } else if (key == "workers") {
      cfg.workers = parse_unsigned<std::size_t>(key, v);
    } else if (key == "solver") {
      cfg.solver = v;
    } else if (key == "replicas") {
      cfg.replicas = parse_unsigned<std::size_t>(key, v);
    } else if (key == "sweeps_between_exchanges") {
      cfg.sweeps_between_exchanges = parse_unsigned<std::size_t>(key, v);
    } else if (key == "schedule") {
      if (v == "linear_beta")
        cfg.schedule.kind = ScheduleKind::linear_beta;
      else if (v == "geometric_temperature")
        cfg.schedule.kind = ScheduleKind::geometric_temperature;
      else
        throw ConfigError("config: schedule must be linear_beta or geometric_temperature");
    } else if (key == "beta_start") {
      cfg.schedule.beta_start = parse_real(key, v);
    } else if (key == "beta_end") {
      cfg.schedule.beta_end = parse_real(key, v);
    } else if (key == "steps") {
      cfg.schedule.steps = parse_unsigned<std::size_t>(key, v);
    } else if (key == "sweeps_per_step") {
      cfg.sweeps_per_step = parse_unsigned<std::size_t>(key, v);
    } else if (key == "pamc_initial_size") {
      cfg.pamc_initial_size = parse_unsigned<std::size_t>(key, v);
    } else if (key == "pamc_restarts") {
      cfg.pamc_restarts = parse_unsigned<std::size_t>(key, v);
    } else if (key == "pamc_max_size") {
      cfg.pamc_max_size = parse_unsigned<std::size_t>(key, v);
    } else if (key == "pamc_time_budget_s") {
      cfg.pamc_time_budget_s = parse_real(key, v);
    } else if (key == "metric_domain") {
      cfg.metric_domain = parse_domain(v);
    } else if (key == "verify_max_n") {
      cfg.verify_max_n = parse_unsigned<std::size_t>(key, v);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + key + ": " + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    apply_config_entry(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  base.validate();
  return base;
}

void ExperimentConfig::validate() const {
  if (localities.empty() || sizes.empty()) throw ConfigError("config: localities and sizes must be non-empty");
  for (int k : localities)
    if (k != 3 && k != 4) throw ConfigError("config: localities must be 3 or 4");
  if (instances_per_size == 0 || runs_per_instance == 0 || workers == 0)
    throw ConfigError("config: counts must be >= 1");
  if (!(timeout_s > 0.0)) throw ConfigError("config: timeout_s must be positive");
  if (escalation_timeout_s < timeout_s) throw ConfigError("config: escalation_timeout_s must be >= timeout_s");
  if (solver != "pt" && solver != "sa") throw ConfigError("config: solver must be pt or sa");
  if (sweeps_between_exchanges == 0 || sweeps_per_step == 0) throw ConfigError("config: sweep counts must be >= 1");
  if (pamc_initial_size < 2 || pamc_restarts < 2 || pamc_max_size < pamc_initial_size)
    throw ConfigError("config: need pamc_initial_size >= 2, pamc_restarts >= 2, pamc_max_size >= pamc_initial_size");
  try {
    schedule.validate();
    class_probabilities.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"localities", localities},
          {"sizes", sizes},
          {"instances_per_size", instances_per_size},
          {"runs_per_instance", runs_per_instance},
          {"timeout_s", timeout_s},
          {"escalation_timeout_s", escalation_timeout_s},
          {"escalate", escalate},
          {"max_sweeps", max_sweeps},
          {"penalty", to_string(penalty)},
          {"layout", to_string(layout)},
          {"class_probabilities",
           {class_probabilities.p1, class_probabilities.p2, class_probabilities.p3}},
          {"seed", seed},
          {"solver", solver},
          {"replicas", replicas},
          {"sweeps_between_exchanges", sweeps_between_exchanges},
          {"schedule",
           {{"kind", schedule.kind == ScheduleKind::linear_beta ? "linear_beta" : "geometric_temperature"},
            {"beta_start", schedule.beta_start},
            {"beta_end", schedule.beta_end},
            {"steps", schedule.steps}}},
          {"sweeps_per_step", sweeps_per_step},
          {"pamc_initial_size", pamc_initial_size},
          {"pamc_restarts", pamc_restarts},
          {"pamc_max_size", pamc_max_size},
          {"pamc_time_budget_s", pamc_time_budget_s},
          {"metric_domain", to_string(metric_domain)}};
}

// -- helpers ------------------------------------------------------------------

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex m;
  std::size_t next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(m);
        if (error || next >= count) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

fs::path group_dir(int k, std::size_t n) {
  return fs::path("k" + std::to_string(k)) / ("N" + std::to_string(n));
}

std::string instance_name(std::size_t index) {
  std::ostringstream os;
  os << 'i' << std::setw(3) << std::setfill('0') << index;
  return os.str();
}

std::vector<fs::path> find_instances(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".hobo") {
      auto p = e.path();
      out.push_back(p.replace_extension());
    }
  std::sort(out.begin(), out.end());
  return out;
}

int instance_k(const PlantedInstance& inst) {
  if (inst.meta.contains("reduced_from_k")) return inst.meta["reduced_from_k"].get<int>();
  return static_cast<int>(inst.poly.degree());
}

std::size_t instance_n(const PlantedInstance& inst) {
  if (inst.meta.contains("n_original")) return inst.meta["n_original"].get<std::size_t>();
  return inst.poly.n();
}

Polynomial metric_view(const Polynomial& spin_poly, Domain domain) {
  if (spin_poly.domain() == domain) return spin_poly;
  return domain == Domain::boolean ? to_boolean(spin_poly) : to_spin(spin_poly);
}

namespace {

std::string relative_id(const fs::path& stem, const fs::path& root) {
  return fs::relative(stem, root).generic_string();
}

nlohmann::json build_manifest(const fs::path& root, const std::vector<fs::path>& files,
                              const nlohmann::json& extra) {
  std::vector<fs::path> sorted = files;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : sorted)
    list.push_back({{"path", fs::relative(f, root).generic_string()}, {"sha256", file_checksum(f)}});
  nlohmann::json m = extra;
  m["files"] = list;
  return m;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace

// -- generate -----------------------------------------------------------------

nlohmann::json generate_set(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  struct Item {
    int k;
    std::size_t n;
    std::size_t index;
  };
  std::vector<Item> items;
  for (int k : cfg.localities)
    for (auto n : cfg.sizes) {
      split_size(k, n, cfg.layout);  // fail early on impossible sizes
      for (std::size_t i = 0; i < cfg.instances_per_size; ++i) items.push_back({k, n, i});
    }
  std::vector<std::vector<fs::path>> written(items.size());
  parallel_for(items.size(), cfg.workers, [&](std::size_t w) {
    const auto& it = items[w];
    BenchmarkSpec spec{it.k, it.n, cfg.layout, cfg.class_probabilities};
    const auto inst = generate_benchmark_instance(spec, it.index, cfg.seed);
    written[w] = save_instance(out / group_dir(it.k, it.n) / instance_name(it.index), inst);
  });
  std::vector<fs::path> files;
  for (auto& w : written) files.insert(files.end(), w.begin(), w.end());
  auto manifest = build_manifest(out, files,
                                 {{"kind", "instances"}, {"generator", kGeneratorVersion}, {"config", cfg.to_json()}});
  write_json(out / "manifest.json", manifest);
  return manifest;
}

// -- reduce -------------------------------------------------------------------

std::vector<ReductionSummaryRow> reduce_set(const ExperimentConfig& cfg, const fs::path& in, const fs::path& out) {
  const auto stems = find_instances(in);
  if (stems.empty()) throw IoError("no instances under " + in.string());
  struct Stat {
    int k;
    std::size_t n, n_total;
    double d0, d1;
  };
  std::vector<Stat> stats(stems.size());
  std::vector<std::vector<fs::path>> written(stems.size());
  parallel_for(stems.size(), cfg.workers, [&](std::size_t w) {
    const auto inst = load_instance(stems[w]);
    if (inst.poly.degree() <= 2) throw IoError(stems[w].string() + ": instance is already quadratic");
    const auto red = reduce_instance(inst, cfg.penalty);
    const fs::path stem = out / fs::relative(stems[w], in);
    written[w] = save_instance(stem, red.instance);
    fs::path manifest = stem;
    manifest += ".reduction.json";
    write_json(manifest, reduction_to_json(red.reduction));
    written[w].push_back(manifest);
    stats[w] = {static_cast<int>(inst.poly.degree()), inst.poly.n(), red.reduction.n_total,
                density(metric_view(inst.poly, cfg.metric_domain)),
                density(metric_view(red.instance.poly, cfg.metric_domain))};
  });

  std::map<std::pair<int, std::size_t>, std::vector<const Stat*>> groups;
  for (const auto& s : stats) groups[{s.k, s.n}].push_back(&s);
  std::vector<ReductionSummaryRow> rows;
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& [key, g] : groups) {
    std::vector<double> nt, d0, d1;
    for (const auto* s : g) {
      nt.push_back(static_cast<double>(s->n_total));
      d0.push_back(s->d0);
      d1.push_back(s->d1);
    }
    ReductionSummaryRow r;
    r.k = key.first;
    r.n = key.second;
    r.count = g.size();
    std::tie(r.n_total_mean, r.n_total_std) = mean_std(nt);
    std::tie(r.density_original_mean, r.density_original_std) = mean_std(d0);
    std::tie(r.density_reduced_mean, r.density_reduced_std) = mean_std(d1);
    rows.push_back(r);
    summary.push_back({{"k", r.k},
                       {"N", r.n},
                       {"count", r.count},
                       {"n_total_mean", r.n_total_mean},
                       {"n_total_std", r.n_total_std},
                       {"growth", r.n_total_mean / static_cast<double>(r.n)},
                       {"density_original_mean", r.density_original_mean},
                       {"density_original_std", r.density_original_std},
                       {"density_reduced_mean", r.density_reduced_mean},
                       {"density_reduced_std", r.density_reduced_std}});
  }
  write_json(out / "summary.json",
             {{"penalty", to_string(cfg.penalty)}, {"metric_domain", to_string(cfg.metric_domain)}, {"groups", summary}});
  std::vector<fs::path> files;
  for (auto& w : written) files.insert(files.end(), w.begin(), w.end());
  write_json(out / "manifest.json",
             build_manifest(out, files, {{"kind", "reduced"}, {"penalty", to_string(cfg.penalty)}}));
  return rows;
}

void print_reduction_summary(std::ostream& os, const std::vector<ReductionSummaryRow>& rows) {
  os << std::left << std::setw(4) << "k" << std::setw(7) << "N" << std::setw(22) << "N_reduced (std)"
     << std::setw(22) << "density orig (std)" << "density reduced (std)\n";
  os << std::fixed;
  for (const auto& r : rows) {
    std::ostringstream a, b, c;
    a << std::fixed << std::setprecision(2) << r.n_total_mean << " (" << r.n_total_std << ")";
    b << std::fixed << std::setprecision(3) << r.density_original_mean << " (" << r.density_original_std << ")";
    c << std::fixed << std::setprecision(3) << r.density_reduced_mean << " (" << r.density_reduced_std << ")";
    os << std::setw(4) << r.k << std::setw(7) << r.n << std::setw(22) << a.str() << std::setw(22) << b.str()
       << c.str() << '\n';
  }
  os.unsetf(std::ios::fixed);
}

// -- solve --------------------------------------------------------------------

SolveRun solve_once(const ExperimentConfig& cfg, const PlantedInstance& inst, double timeout_s, std::uint64_t seed) {
  StopRule stop;
  stop.timeout_s = timeout_s;
  stop.max_sweeps = cfg.max_sweeps;
  stop.target = inst.planted_energy;
  if (cfg.solver == "sa") return simulated_annealing(inst.poly, cfg.schedule, cfg.sweeps_per_step, seed, stop);
  TemperingParams params;
  params.replicas = cfg.replicas;
  params.sweeps_between_exchanges = cfg.sweeps_between_exchanges;
  return parallel_tempering(inst.poly, params, seed, stop);
}

namespace {

std::uint64_t instance_seed(const PlantedInstance& inst, const std::string& id, std::uint64_t master) {
  if (inst.meta.contains("instance_seed")) return inst.meta["instance_seed"].get<std::uint64_t>();
  std::uint64_t h = 0;
  for (unsigned char c : id) h = mix64(h ^ c);
  return derive_seed(master, {h});
}

std::string run_key(const std::string& id, std::size_t run, double timeout) {
  return id + "|" + std::to_string(run) + "|" + format_double(timeout);
}

}  // namespace

SolveStats solve_set(const ExperimentConfig& cfg, const fs::path& in, const fs::path& results_csv, std::ostream* log) {
  cfg.validate();
  const auto stems = find_instances(in);
  if (stems.empty()) throw IoError("no instances under " + in.string());
  std::vector<PlantedInstance> insts;
  std::vector<std::string> ids;
  for (const auto& s : stems) {
    insts.push_back(load_instance(s));
    ids.push_back(relative_id(s, in));
  }

  std::set<std::string> done;
  for (const auto& r : read_results(results_csv)) done.insert(run_key(r.instance_id, r.run_id, r.timeout_s));
  if (results_csv.has_parent_path()) fs::create_directories(results_csv.parent_path());
  // An interrupted write leaves a partial last row; cut it before appending.
  if (fs::exists(results_csv)) {
    const auto text = read_text(results_csv);
    if (!text.empty() && text.back() != '\n') fs::resize_file(results_csv, text.rfind('\n') + 1);
  }
  std::ofstream os(results_csv, std::ios::app | std::ios::binary);
  if (!os) throw IoError("cannot open " + results_csv.string());
  if (fs::file_size(results_csv) == 0) os << kResultsHeader << '\n' << std::flush;
  std::mutex write_mutex;

  SolveStats stats;
  auto run_phase = [&](const std::vector<std::size_t>& which, double timeout, std::uint64_t phase) {
    struct Item {
      std::size_t inst, run;
    };
    std::vector<Item> items;
    for (auto i : which)
      for (std::size_t r = 0; r < cfg.runs_per_instance; ++r) {
        if (done.count(run_key(ids[i], r, timeout)))
          ++stats.skipped;
        else
          items.push_back({i, r});
      }
    parallel_for(items.size(), cfg.workers, [&](std::size_t w) {
      const auto& inst = insts[items[w].inst];
      const auto seed = derive_seed(instance_seed(inst, ids[items[w].inst], cfg.seed), {items[w].run, phase});
      const auto run = solve_once(cfg, inst, timeout, seed);
      ResultRow row;
      row.k = instance_k(inst);
      row.n = instance_n(inst);
      row.instance_id = ids[items[w].inst];
      row.run_id = items[w].run;
      row.seed = seed;
      row.timeout_s = timeout;
      row.tau_s = run.tau_s;
      row.best_energy = run.best_energy;
      row.planted_energy = inst.planted_energy;
      row.solved = is_solved(run.best_energy, inst.planted_energy);
      try {
        // Undefined for a zero ground-state energy; stored as NA.
        row.residual = inst.planted_energy == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                                  : residual(inst.planted_energy, run.best_energy);
      } catch (const std::exception&) {
        row.residual = std::nan("");
      }
      const std::string line = to_csv_line(row) + "\n";
      std::lock_guard lock(write_mutex);
      os << line << std::flush;
      if (!os) throw IoError("write failed: " + results_csv.string());
      ++stats.executed;
      if (log) *log << row.instance_id << " run " << row.run_id << " t=" << timeout << "s "
                    << (row.solved ? "solved" : "unsolved") << " tau=" << run.tau_s << "s\n";
    });
  };

  std::vector<std::size_t> all(insts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  run_phase(all, cfg.timeout_s, 0);

  if (cfg.escalate && cfg.escalation_timeout_s > cfg.timeout_s) {
    os.flush();
    std::map<std::pair<int, std::size_t>, std::pair<std::size_t, std::size_t>> tally;  // solved, total
    std::set<std::string> in_set(ids.begin(), ids.end());
    for (const auto& r : read_results(results_csv)) {
      if (r.timeout_s != cfg.timeout_s || !in_set.count(r.instance_id)) continue;
      auto& t = tally[{r.k, r.n}];
      t.first += r.solved;
      ++t.second;
    }
    std::vector<std::size_t> again;
    for (std::size_t i = 0; i < insts.size(); ++i) {
      const auto& t = tally[{instance_k(insts[i]), instance_n(insts[i])}];
      if (t.first < t.second) again.push_back(i);
    }
    if (!again.empty()) {
      if (log) *log << "escalating " << again.size() << " instances to " << cfg.escalation_timeout_s << " s\n";
      run_phase(again, cfg.escalation_timeout_s, 1);
    }
  }
  return stats;
}

// -- pamc ---------------------------------------------------------------------

void pamc_set(const ExperimentConfig& cfg, const fs::path& in, const fs::path& out, std::ostream* log) {
  cfg.validate();
  const auto stems = find_instances(in);
  if (stems.empty()) throw IoError("no instances under " + in.string());
  RhoProtocol protocol;
  protocol.initial_size = cfg.pamc_initial_size;
  protocol.restarts = cfg.pamc_restarts;
  protocol.max_size = cfg.pamc_max_size;
  protocol.time_budget_s = cfg.pamc_time_budget_s;
  protocol.schedule = cfg.schedule;
  protocol.sweeps_per_step = cfg.sweeps_per_step;

  struct Out {
    std::string id;
    int k;
    std::size_t n;
    RhoConvergence conv;
  };
  std::vector<Out> results(stems.size());
  parallel_for(stems.size(), cfg.workers, [&](std::size_t w) {
    const auto inst = load_instance(stems[w]);
    const auto id = relative_id(stems[w], in);
    results[w] = {id, instance_k(inst), instance_n(inst),
                  rho_s_converged(normalize(inst.poly), protocol, derive_seed(instance_seed(inst, id, cfg.seed), {0x9a})) };
    if (log) *log << id << " rho_s=" << results[w].conv.rho_s << (results[w].conv.converged ? "" : " (unconverged)") << "\n";
  });

  std::ostringstream rho, levels;
  rho << "instance_id,k,N,rho_s,rho_s_std,converged,final_R\n";
  levels << "instance_id,R,restarts,mean,std,stderr\n";
  for (const auto& r : results) {
    rho << r.id << ',' << r.k << ',' << r.n << ',' << format_double(r.conv.rho_s) << ','
        << format_double(r.conv.rho_s_std) << ',' << (r.conv.converged ? 1 : 0) << ','
        << r.conv.levels.back().population_size << '\n';
    for (const auto& l : r.conv.levels)
      levels << r.id << ',' << l.population_size << ',' << l.restarts << ',' << format_double(l.mean) << ','
             << format_double(l.stddev) << ',' << format_double(l.stderr_) << '\n';
    std::string flat = r.id;
    std::replace(flat.begin(), flat.end(), '/', '_');
    for (const auto& t : r.conv.traces) {
      std::ostringstream tr;
      tr << "step,beta,mean_energy,S_f,families\n";
      for (std::size_t s = 0; s < t.steps.size(); ++s)
        tr << s << ',' << format_double(t.steps[s].beta) << ',' << format_double(t.steps[s].mean_energy) << ','
           << format_double(t.steps[s].entropy) << ',' << t.steps[s].families << '\n';
      write_text_atomic(out / "traces" / (flat + "_R" + std::to_string(t.population_size) + ".csv"), tr.str());
    }
  }
  write_text_atomic(out / "rho_s.csv", rho.str());
  write_text_atomic(out / "rho_levels.csv", levels.str());
}

// -- report -------------------------------------------------------------------

std::map<std::tuple<int, std::size_t, double>, std::vector<BenchmarkRecord>> group_results(
    const std::vector<ResultRow>& rows) {
  std::map<std::tuple<int, std::size_t, double>, std::map<std::string, BenchmarkRecord>> tmp;
  for (const auto& r : rows) {
    auto& rec = tmp[{r.k, r.n, r.timeout_s}][r.instance_id];
    rec.instance_id = r.instance_id;
    rec.k = r.k;
    rec.n = r.n;
    rec.planted_energy = r.planted_energy;
    rec.runs.push_back({r.run_id, r.seed, r.timeout_s, r.tau_s, r.best_energy});
  }
  std::map<std::tuple<int, std::size_t, double>, std::vector<BenchmarkRecord>> out;
  for (auto& [key, recs] : tmp)
    for (auto& [id, rec] : recs) out[key].push_back(std::move(rec));
  return out;
}

namespace {

struct GroupTts {
  bool estimable = false;
  double median = 0.0, ci_lo = 0.0, ci_hi = 0.0, sigma = 0.0;
};

// Median over instances of the per-instance TTS; an instance whose TTS is
// not estimable counts as infinite. The CI resamples instances.
GroupTts group_tts(const std::vector<BenchmarkRecord>& recs, std::uint64_t seed) {
  std::vector<double> t;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto e = tts(recs[i], {10000, derive_seed(seed, {i})});
    t.push_back(e.estimable ? e.tts : std::numeric_limits<double>::infinity());
  }
  GroupTts g;
  const double m = median(t);
  if (!std::isfinite(m)) return g;
  g.estimable = true;
  g.median = m;
  Rng rng(derive_seed(seed, {0xc1}));
  std::vector<double> meds(2000), sample(t.size());
  for (auto& md : meds) {
    for (auto& s : sample) s = t[rng.below(t.size())];
    md = median(sample);
  }
  g.ci_lo = percentile(meds, 0.025);
  g.ci_hi = percentile(meds, 0.975);
  std::vector<double> finite;
  for (double x : meds)
    if (std::isfinite(x)) finite.push_back(x);
  g.sigma = mean_std(finite).second;
  return g;
}

std::string opt_str(bool ok, double v) { return ok ? format_double(v) : std::string("NA"); }

}  // namespace

void report(const ExperimentConfig& cfg, const fs::path& results_dir, const std::optional<fs::path>& instances,
            const fs::path& out, std::ostream* log) {
  const auto rows = read_results(results_dir / "results.csv");
  if (rows.empty()) throw IoError("no results in " + (results_dir / "results.csv").string());
  const auto groups = group_results(rows);

  // rho_s per (k, N), instances weighted equally.
  std::map<std::pair<int, std::size_t>, std::vector<double>> rho;
  std::map<std::pair<int, std::size_t>, std::size_t> unconverged;
  if (fs::exists(results_dir / "rho_s.csv")) {
    std::istringstream is(read_text(results_dir / "rho_s.csv"));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 7) throw IoError("malformed rho_s.csv row: " + line);
      const std::pair<int, std::size_t> key{std::stoi(f[1]), std::stoul(f[2])};
      rho[key].push_back(std::stod(f[3]));
      if (f[5] != "1") ++unconverged[key];
    }
  }

  // Instance statistics per (k, N).
  struct InstStats {
    std::vector<double> mu0, cstd, kurt, coeffs;
  };
  std::map<std::pair<int, std::size_t>, InstStats> inst_stats;
  if (instances) {
    for (const auto& stem : find_instances(*instances)) {
      const auto inst = load_instance(stem);
      const auto view = metric_view(inst.poly, cfg.metric_domain);
      auto& s = inst_stats[{instance_k(inst), instance_n(inst)}];
      s.mu0.push_back(misfit(view, inst.planted_energy));
      const auto cs = coupler_stats(view);
      s.cstd.push_back(cs.stddev);
      if (cs.kurtosis) s.kurt.push_back(*cs.kurtosis);
      for (const auto& t : view.terms()) s.coeffs.push_back(t.coeff);
    }
  }

  std::map<double, std::ostringstream> aggregates;
  std::ostringstream series, resid;
  series << "k,N,timeout_s,estimable,fraction_solved,tts,ci_lo,ci_hi,bar_lo,bar_hi\n";
  resid << "k,N,timeout_s,residual_median,residual_mean,residual_max\n";
  std::map<std::pair<int, double>, std::vector<std::pair<double, double>>> fit_points;
  for (const auto& [key, recs] : groups) {
    const auto [k, n, timeout] = key;
    const double fs_ = fraction_solved(recs);
    const auto g = group_tts(recs, derive_seed(cfg.seed, {static_cast<std::uint64_t>(k), n}));
    auto& agg = aggregates[timeout];
    if (agg.tellp() == 0) agg << kAggregateHeader << '\n';
    AggregateRow a;
    a.k = k;
    a.n = n;
    a.fraction_solved = fs_;
    if (g.estimable) {
      a.tts_median = g.median;
      a.tts_ci_lo = g.ci_lo;
      a.tts_ci_hi = g.ci_hi;
      fit_points[{k, timeout}].push_back({static_cast<double>(n), g.median});
    }
    if (auto it = rho.find({k, n}); it != rho.end()) {
      const auto [m, s] = mean_std(it->second);
      a.rho_s_mean = m;
      a.rho_s_std = s;
    }
    if (auto it = inst_stats.find({k, n}); it != inst_stats.end()) {
      a.mu0_mean = mean_std(it->second.mu0).first;
      a.coupler_std = mean_std(it->second.cstd).first;
      if (!it->second.kurt.empty()) a.coupler_kurtosis = mean_std(it->second.kurt).first;
    }
    agg << to_csv_line(a) << '\n';
    series << k << ',' << n << ',' << format_double(timeout) << ',' << (g.estimable ? 1 : 0) << ','
           << format_double(fs_) << ',' << opt_str(g.estimable, g.median) << ',' << opt_str(g.estimable, g.ci_lo)
           << ',' << opt_str(g.estimable, g.ci_hi) << ',' << opt_str(g.estimable, g.median - 2 * g.sigma) << ','
           << opt_str(g.estimable, g.median + 2 * g.sigma) << '\n';
    std::vector<double> res;
    for (const auto& rec : recs)
      for (const auto& r : rec.runs) {
        if (rec.planted_energy != 0.0) res.push_back(residual(rec.planted_energy, r.best_energy));
      }
    if (!res.empty())
      resid << k << ',' << n << ',' << format_double(timeout) << ',' << format_double(median(res)) << ','
            << format_double(mean_std(res).first) << ',' << format_double(*std::max_element(res.begin(), res.end()))
            << '\n';
    if (log) {
      *log << "k=" << k << " N=" << n << " timeout=" << timeout << " fraction_solved=" << fs_ << " TTS=";
      if (g.estimable)
        *log << g.median << " s\n";
      else
        *log << "not estimable\n";
    }
  }
  for (auto& [timeout, text] : aggregates) {
    write_text_atomic(out / ("aggregate_t" + format_double(timeout) + ".csv"), text.str());
  }
  write_text_atomic(out / "tts_series.csv", series.str());
  write_text_atomic(out / "residuals.csv", resid.str());

  // Scaling fits per (k, timeout).
  nlohmann::json fits = nlohmann::json::array();
  std::set<std::pair<int, double>> all_keys;
  for (const auto& [key, recs] : groups) all_keys.insert({std::get<0>(key), std::get<2>(key)});
  for (const auto& key : all_keys) {
    nlohmann::json f{{"k", key.first}, {"timeout_s", key.second}};
    const auto& pts = fit_points[key];
    if (pts.size() >= 3) {
      const auto fit = fit_scaling(pts, 3);
      f["alpha"] = fit.alpha;
      f["beta"] = fit.beta;
      f["alpha_stderr"] = fit.alpha_stderr;
      f["beta_stderr"] = fit.beta_stderr;
      f["sizes"] = fit.sizes;
    } else {
      f["status"] = "not estimable";
      f["estimable_sizes"] = pts.size();
    }
    fits.push_back(f);
  }
  write_json(out / "scaling_fit.json", fits);

  if (!rho.empty()) {
    std::ostringstream rs;
    rs << "k,N,rho_s_mean,rho_s_std,instances,unconverged\n";
    for (const auto& [key, v] : rho) {
      const auto [m, s] = mean_std(v);
      rs << key.first << ',' << key.second << ',' << format_double(m) << ',' << format_double(s) << ',' << v.size()
         << ',' << unconverged[key] << '\n';
    }
    write_text_atomic(out / "rho_s_series.csv", rs.str());
  }
  if (!inst_stats.empty()) {
    std::ostringstream mis;
    mis << "k,N,mu0_mean,mu0_std,coupler_std_mean,coupler_kurtosis_mean\n";
    for (const auto& [key, s] : inst_stats) {
      const auto [m, sd] = mean_std(s.mu0);
      mis << key.first << ',' << key.second << ',' << format_double(m) << ',' << format_double(sd) << ','
          << format_double(mean_std(s.cstd).first) << ','
          << (s.kurt.empty() ? std::string("NA") : format_double(mean_std(s.kurt).first)) << '\n';
      const auto h = freedman_diaconis(s.coeffs);
      std::ostringstream hs;
      hs << "edge_lo,edge_hi,count\n";
      for (std::size_t i = 0; i < h.counts.size(); ++i)
        hs << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
      write_text_atomic(out / ("coupler_hist_k" + std::to_string(key.first) + "_N" + std::to_string(key.second) + ".csv"),
                        hs.str());
    }
    write_text_atomic(out / "instance_stats.csv", mis.str());
  }
}

// -- verify -------------------------------------------------------------------

VerifyReport verify_set(const ExperimentConfig& cfg, const fs::path& in) {
  VerifyReport rep;
  if (fs::exists(in / "manifest.json")) {
    const auto m = read_json(in / "manifest.json");
    for (const auto& f : m.value("files", nlohmann::json::array())) {
      const auto p = in / f.at("path").get<std::string>();
      if (!fs::exists(p))
        rep.failures.push_back("missing file " + p.string());
      else if (file_checksum(p) != f.at("sha256").get<std::string>())
        rep.failures.push_back("checksum mismatch " + p.string());
    }
  }
  const auto stems = find_instances(in);
  if (stems.empty()) throw IoError("no instances under " + in.string());
  std::vector<std::string> fails(stems.size());
  std::vector<char> checked(stems.size(), 0);
  parallel_for(stems.size(), cfg.workers, [&](std::size_t w) {
    const auto id = relative_id(stems[w], in);
    PlantedInstance inst;
    try {
      inst = load_instance(stems[w]);
    } catch (const IoError& e) {
      fails[w] = e.what();
      return;
    }
    fs::path manifest = stems[w];
    manifest += ".reduction.json";
    if (fs::exists(manifest)) {
      const auto red = reduction_from_json(read_json(manifest));
      if (red.n_total != inst.poly.n()) {
        fails[w] = id + ": reduction manifest n_total does not match the instance";
        return;
      }
      const auto all = to_boolean(inst.planted_config);
      const auto lifted = lift_solution(red, project_solution(red, all));
      if (lifted.values != all.values) {
        fails[w] = id + ": planted auxiliaries are not the replayed pair products";
        return;
      }
    }
    if (inst.poly.n() > cfg.verify_max_n) return;
    checked[w] = 1;
    const auto bf = brute_force(inst.poly);
    if (std::abs(bf.ground_energy - inst.planted_energy) > 1e-9 * std::max(1.0, std::abs(inst.planted_energy))) {
      std::ostringstream os;
      os << id << ": brute-force ground energy " << format_double(bf.ground_energy) << " != planted "
         << format_double(inst.planted_energy);
      fails[w] = os.str();
    }
  });
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (!fails[i].empty()) rep.failures.push_back(fails[i]);
    if (checked[i])
      ++rep.checked;
    else
      ++rep.skipped;
  }
  return rep;
}

}  // namespace hobo
