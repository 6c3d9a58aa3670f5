#include "hobo/instance_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

namespace hobo {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw IoError("line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    parse_fail(line, "bad number '" + tok + "'");
  }
  if (used != tok.size()) parse_fail(line, "bad number '" + tok + "'");
  return v;
}

template <typename T>
T parse_uint(const std::string& tok, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) parse_fail(line, "bad integer '" + tok + "'");
  return v;
}

}  // namespace

void write_hobo(std::ostream& os, const Polynomial& poly, const std::vector<std::string>& comments) {
  os << "HOBO v1 domain=" << to_string(poly.domain()) << " n=" << poly.n() << '\n';
  for (const auto& c : comments) os << "# " << c << '\n';
  if (poly.constant() != 0.0) os << "const " << format_double(poly.constant()) << '\n';
  for (const auto& t : poly.terms()) {
    os << format_double(t.coeff);
    for (auto v : t.vars) os << ' ' << v;
    os << '\n';
  }
}

Polynomial read_hobo(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream hs(line);
  std::string magic, version, dom, nn;
  hs >> magic >> version >> dom >> nn;
  if (magic != "HOBO" || version != "v1" || dom.rfind("domain=", 0) != 0 || nn.rfind("n=", 0) != 0)
    parse_fail(lineno, "expected 'HOBO v1 domain=<spin|bool> n=<N>'");
  Domain domain;
  try {
    domain = parse_domain(dom.substr(7));
  } catch (const std::exception& e) {
    parse_fail(lineno, e.what());
  }
  const auto n = parse_uint<std::size_t>(nn.substr(2), lineno);

  double constant = 0.0;
  std::vector<Term> terms;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok == "const") {
      std::string v, extra;
      if (!(ls >> v) || (ls >> extra)) parse_fail(lineno, "expected 'const <value>'");
      constant += parse_number(v, lineno);
      continue;
    }
    Term t;
    t.coeff = parse_number(tok, lineno);
    while (ls >> tok) {
      t.vars.push_back(parse_uint<Index>(tok, lineno));
      if (t.vars.back() >= n) parse_fail(lineno, "variable " + tok + " out of range for n=" + std::to_string(n));
    }
    if (t.vars.empty()) parse_fail(lineno, "term without variables (use 'const')");
    terms.push_back(std::move(t));
  }
  try {
    return Polynomial(n, domain, std::move(terms), constant);
  } catch (const std::exception& e) {
    throw IoError(std::string("invalid polynomial: ") + e.what());
  }
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

void save_hobo(const fs::path& path, const Polynomial& poly, const std::vector<std::string>& comments) {
  std::ostringstream os;
  write_hobo(os, poly, comments);
  write_text_atomic(path, os.str());
}

Polynomial load_hobo(const fs::path& path) {
  std::istringstream is(read_text(path));
  try {
    return read_hobo(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

nlohmann::json planted_to_json(const PlantedInstance& inst) {
  nlohmann::json j;
  j["domain"] = to_string(inst.planted_config.domain);
  j["planted_config"] = inst.planted_config.values;
  j["planted_energy"] = inst.planted_energy;
  j["certified"] = inst.certified;
  j["meta"] = inst.meta;
  return j;
}

PlantedInstance planted_from_json(const nlohmann::json& j, Polynomial poly) {
  PlantedInstance inst;
  try {
    inst.planted_config.domain = parse_domain(j.at("domain").get<std::string>());
    inst.planted_config.values = j.at("planted_config").get<std::vector<std::int8_t>>();
    inst.planted_energy = j.at("planted_energy").get<double>();
    inst.certified = j.value("certified", false);
    inst.meta = j.value("meta", nlohmann::json::object());
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed planted sidecar: ") + e.what());
  }
  inst.poly = std::move(poly);
  return inst;
}

nlohmann::json reduction_to_json(const ReductionResult& red) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : red.substitutions) subs.push_back({s.a, s.b, s.aux, s.penalty});
  return {{"strategy", to_string(red.strategy)},
          {"substitutions", subs},
          {"n_original", red.n_original},
          {"n_total", red.n_total}};
}

ReductionResult reduction_from_json(const nlohmann::json& j) {
  ReductionResult r;
  try {
    r.strategy = parse_penalty_strategy(j.at("strategy").get<std::string>());
    r.n_original = j.at("n_original").get<std::size_t>();
    r.n_total = j.at("n_total").get<std::size_t>();
    for (const auto& s : j.at("substitutions")) {
      if (s.size() != 4) throw std::invalid_argument("substitution must be [a, b, y, C]");
      r.substitutions.push_back({s[0].get<Index>(), s[1].get<Index>(), s[2].get<Index>(), s[3].get<double>()});
    }
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed reduction manifest: ") + e.what());
  }
  if (r.n_total != r.n_original + r.substitutions.size())
    throw IoError("malformed reduction manifest: n_total != n_original + substitutions");
  return r;
}

std::vector<fs::path> save_instance(const fs::path& stem, const PlantedInstance& inst) {
  fs::path hobo = stem, side = stem;
  hobo += ".hobo";
  side += ".planted.json";
  std::vector<std::string> comments;
  if (inst.meta.contains("generator")) comments.push_back("generator " + inst.meta["generator"].dump());
  save_hobo(hobo, inst.poly, comments);
  write_json(side, planted_to_json(inst));
  return {hobo, side};
}

PlantedInstance load_instance(const fs::path& stem) {
  fs::path hobo = stem, side = stem;
  hobo += ".hobo";
  side += ".planted.json";
  if (!fs::exists(side)) throw IoError("missing planted sidecar " + side.string());
  auto inst = planted_from_json(read_json(side), load_hobo(hobo));
  try {
    check_compatible(inst.poly, inst.planted_config);
  } catch (const std::exception& e) {
    throw IoError(side.string() + ": " + e.what());
  }
  const double e = evaluate(inst.poly, inst.planted_config);
  if (std::abs(e - inst.planted_energy) > 1e-9 * std::max(1.0, std::abs(e)))
    throw IoError(side.string() + ": planted energy does not match the polynomial");
  return inst;
}

std::vector<fs::path> list_instances(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".hobo") {
      auto p = e.path();
      out.push_back(p.replace_extension());
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::string file_checksum(const fs::path& path) {
  const auto data = read_text(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed for " + path.string());
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

const char* const kResultsHeader =
    "k,N,instance_id,run_id,seed,timeout_s,tau_s,best_energy,planted_energy,solved,residual";

const char* const kAggregateHeader =
    "k,N,fraction_solved,tts_median,tts_ci_lo,tts_ci_hi,rho_s_mean,rho_s_std,mu0_mean,coupler_std,"
    "coupler_kurtosis";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string to_csv_line(const ResultRow& r) {
  if (r.instance_id.find_first_of(",\n") != std::string::npos)
    throw std::invalid_argument("instance id must not contain commas or newlines");
  std::ostringstream os;
  os << r.k << ',' << r.n << ',' << r.instance_id << ',' << r.run_id << ',' << r.seed << ','
     << format_double(r.timeout_s) << ',' << format_double(r.tau_s) << ',' << format_double(r.best_energy)
     << ',' << format_double(r.planted_energy) << ',' << (r.solved ? 1 : 0) << ','
     << (std::isnan(r.residual) ? std::string("NA") : format_double(r.residual));
  return os.str();
}

ResultRow parse_result_line(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 11) throw IoError("results row has " + std::to_string(f.size()) + " fields, expected 11");
  ResultRow r;
  try {
    r.k = std::stoi(f[0]);
    r.n = parse_uint<std::size_t>(f[1], 0);
    r.instance_id = f[2];
    r.run_id = parse_uint<std::size_t>(f[3], 0);
    r.seed = parse_uint<std::uint64_t>(f[4], 0);
    r.timeout_s = parse_number(f[5], 0);
    r.tau_s = parse_number(f[6], 0);
    r.best_energy = parse_number(f[7], 0);
    r.planted_energy = parse_number(f[8], 0);
    r.solved = f[9] == "1";
    r.residual = f[10] == "NA" ? std::numeric_limits<double>::quiet_NaN() : parse_number(f[10], 0);
  } catch (const IoError&) {
    throw IoError("malformed results row: " + line);
  } catch (const std::exception&) {
    throw IoError("malformed results row: " + line);
  }
  return r;
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::vector<ResultRow> rows;
  if (!fs::exists(path)) return rows;
  auto text = read_text(path);
  // A row cut off by an interrupted append has no newline; it is dropped so
  // the run is redone on resume.
  text.erase(text.find_last_of('\n') == std::string::npos ? 0 : text.find_last_of('\n') + 1);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw IoError(path.string() + ": unexpected results header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_result_line(line));
  }
  return rows;
}

std::string to_csv_line(const AggregateRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  std::ostringstream os;
  os << r.k << ',' << r.n << ',' << format_double(r.fraction_solved) << ',' << opt(r.tts_median) << ','
     << opt(r.tts_ci_lo) << ',' << opt(r.tts_ci_hi) << ',' << opt(r.rho_s_mean) << ',' << opt(r.rho_s_std)
     << ',' << opt(r.mu0_mean) << ',' << opt(r.coupler_std) << ',' << opt(r.coupler_kurtosis);
  return os.str();
}

}  // namespace hobo
