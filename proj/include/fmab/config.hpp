#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmab/io.hpp"

namespace fmab {

// Configuration problems exit the CLI with code 2; everything else with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One experiment: environment, algorithm, schedule, privacy, horizon,
// replication plan, and output location. Flat TOML-compatible key=value
// syntax; round-trips losslessly through serialize_config/parse_config.
struct ExperimentConfig {
  std::string name;

  // environment
  std::string env = "approximate";  // approximate | exact | empirical
  std::int64_t arms = 10;
  double mu_lo = 0.7;
  double mu_hi = 0.8;
  double gap = 0.02;
  double sigma = 0.5;
  double sigma_c = 0.02;
  double local_spread = 0.05;       // exact env: bounded local perturbation
  std::string ratings;              // empirical env: ratings file
  std::int64_t groups = 100;        // empirical env: item groups (arms)
  std::string ratings_delim = "tab";  // tab | comma | semicolon | space

  // algorithm
  std::string algo = "fed2";  // fed1 | fed2 | baseline | centralized
  std::string f = "constant";  // constant | kappa-log | pow2 | pow2-log
  double kappa = 100;
  std::string g = "pow2";  // none | constant | lambda-log | pow2 | pow2-log
  double lambda = 1;
  std::string privacy = "plain";  // plain | quantized | noisy
  double noise_rel = 0.1;         // noisy mode: stddev as a fraction of B

  std::int64_t horizon = 200000;
  double comm_cost = 1.0;
  std::int64_t clients = 5;           // fixed M (fed1/centralized, exact pool)
  std::int64_t max_clients = 200000;  // fed2 admission cap
  std::int64_t replications = 100;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::int64_t threads = 0;  // 0 = hardware concurrency
  bool plots = false;
  bool log_events = false;

  // pz sweep
  std::vector<std::int64_t> pz_clients;
  std::vector<double> pz_gaps;
  std::int64_t pz_trials = 100000;

  // single-key sweep: rerun with `sweep_key` set to each value
  std::string sweep_key;
  std::vector<std::string> sweep_values;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::int64_t parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::int64_t x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::string parse_string(const std::string& v, const std::string& key) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  if (!v.empty() && v.front() != '[') return v;  // bare word tolerated
  throw ConfigError("key '" + key + "': expected a string, got '" + v + "'");
}

inline std::vector<std::string> parse_array(const std::string& v,
                                            const std::string& key) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError("key '" + key + "': expected an array [ ... ]");
  std::vector<std::string> items;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const char c = v[i];
    if (c == '"') {
      quoted = !quoted;
      continue;
    }
    if (c == ',' && !quoted) {
      const auto item = trim(current);
      if (!item.empty()) items.push_back(item);
      current.clear();
    } else {
      current += c;
    }
  }
  const auto item = trim(current);
  if (!item.empty()) items.push_back(item);
  return items;
}

inline std::string quote(const std::string& s) { return '"' + s + '"'; }

}  // namespace detail

// Assign one key from its raw TOML value text. Shared by the file parser
// and the CLI --override path.
inline void apply_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "name") cfg.name = parse_string(v, key);
  else if (key == "env") cfg.env = parse_string(v, key);
  else if (key == "arms") cfg.arms = parse_int(v, key);
  else if (key == "mu_lo") cfg.mu_lo = parse_real(v, key);
  else if (key == "mu_hi") cfg.mu_hi = parse_real(v, key);
  else if (key == "gap") cfg.gap = parse_real(v, key);
  else if (key == "sigma") cfg.sigma = parse_real(v, key);
  else if (key == "sigma_c") cfg.sigma_c = parse_real(v, key);
  else if (key == "local_spread") cfg.local_spread = parse_real(v, key);
  else if (key == "ratings") cfg.ratings = parse_string(v, key);
  else if (key == "groups") cfg.groups = parse_int(v, key);
  else if (key == "ratings_delim") cfg.ratings_delim = parse_string(v, key);
  else if (key == "algo") cfg.algo = parse_string(v, key);
  else if (key == "f") cfg.f = parse_string(v, key);
  else if (key == "kappa") cfg.kappa = parse_real(v, key);
  else if (key == "g") cfg.g = parse_string(v, key);
  else if (key == "lambda") cfg.lambda = parse_real(v, key);
  else if (key == "privacy") cfg.privacy = parse_string(v, key);
  else if (key == "noise_rel") cfg.noise_rel = parse_real(v, key);
  else if (key == "horizon") cfg.horizon = parse_int(v, key);
  else if (key == "comm_cost") cfg.comm_cost = parse_real(v, key);
  else if (key == "clients") cfg.clients = parse_int(v, key);
  else if (key == "max_clients") cfg.max_clients = parse_int(v, key);
  else if (key == "replications") cfg.replications = parse_int(v, key);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(v, key));
  else if (key == "out") cfg.out = parse_string(v, key);
  else if (key == "threads") cfg.threads = parse_int(v, key);
  else if (key == "plots") cfg.plots = parse_bool(v, key);
  else if (key == "log_events") cfg.log_events = parse_bool(v, key);
  else if (key == "pz_trials") cfg.pz_trials = parse_int(v, key);
  else if (key == "pz_clients") {
    cfg.pz_clients.clear();
    for (const auto& item : parse_array(v, key))
      cfg.pz_clients.push_back(parse_int(item, key));
  } else if (key == "pz_gaps") {
    cfg.pz_gaps.clear();
    for (const auto& item : parse_array(v, key))
      cfg.pz_gaps.push_back(parse_real(item, key));
  } else if (key == "sweep_key") {
    cfg.sweep_key = parse_string(v, key);
  } else if (key == "sweep_values") {
    cfg.sweep_values = parse_array(v, key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string line = text.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    start = end == std::string::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    apply_key(cfg, key, line.substr(eq + 1));
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::quote;
  std::string s;
  auto kv = [&s](const std::string& key, const std::string& value) {
    s += key;
    s += " = ";
    s += value;
    s += '\n';
  };
  kv("name", quote(cfg.name));
  kv("env", quote(cfg.env));
  kv("arms", format_int(cfg.arms));
  kv("mu_lo", format_double(cfg.mu_lo));
  kv("mu_hi", format_double(cfg.mu_hi));
  kv("gap", format_double(cfg.gap));
  kv("sigma", format_double(cfg.sigma));
  kv("sigma_c", format_double(cfg.sigma_c));
  kv("local_spread", format_double(cfg.local_spread));
  kv("ratings", quote(cfg.ratings));
  kv("groups", format_int(cfg.groups));
  kv("ratings_delim", quote(cfg.ratings_delim));
  kv("algo", quote(cfg.algo));
  kv("f", quote(cfg.f));
  kv("kappa", format_double(cfg.kappa));
  kv("g", quote(cfg.g));
  kv("lambda", format_double(cfg.lambda));
  kv("privacy", quote(cfg.privacy));
  kv("noise_rel", format_double(cfg.noise_rel));
  kv("horizon", format_int(cfg.horizon));
  kv("comm_cost", format_double(cfg.comm_cost));
  kv("clients", format_int(cfg.clients));
  kv("max_clients", format_int(cfg.max_clients));
  kv("replications", format_int(cfg.replications));
  kv("seed", format_int(static_cast<std::int64_t>(cfg.seed)));
  kv("out", quote(cfg.out));
  kv("threads", format_int(cfg.threads));
  kv("plots", cfg.plots ? "true" : "false");
  kv("log_events", cfg.log_events ? "true" : "false");
  std::string list;
  for (const auto& c : cfg.pz_clients) {
    if (!list.empty()) list += ", ";
    list += format_int(c);
  }
  kv("pz_clients", "[" + list + "]");
  list.clear();
  for (const auto& g : cfg.pz_gaps) {
    if (!list.empty()) list += ", ";
    list += format_double(g);
  }
  kv("pz_gaps", "[" + list + "]");
  kv("pz_trials", format_int(cfg.pz_trials));
  kv("sweep_key", quote(cfg.sweep_key));
  list.clear();
  for (const auto& v : cfg.sweep_values) {
    if (!list.empty()) list += ", ";
    list += quote(v);
  }
  kv("sweep_values", "[" + list + "]");
  return s;
}

inline char delimiter_from_name(const std::string& name) {
  if (name == "tab" || name == "\t") return '\t';
  if (name == "comma" || name == ",") return ',';
  if (name == "semicolon" || name == ";") return ';';
  if (name == "space" || name == " ") return ' ';
  if (name.size() == 1) return name[0];
  throw ConfigError("unknown ratings_delim '" + name + "'");
}

inline void validate_config(const ExperimentConfig& cfg) {
  auto one_of = [](const std::string& v, std::initializer_list<const char*> opts) {
    for (const char* o : opts)
      if (v == o) return true;
    return false;
  };
  if (!one_of(cfg.env, {"approximate", "exact", "empirical"}))
    throw ConfigError("env must be approximate, exact or empirical");
  if (!one_of(cfg.algo, {"fed1", "fed2", "baseline", "centralized"}))
    throw ConfigError("algo must be fed1, fed2, baseline or centralized");
  if (!one_of(cfg.f, {"constant", "kappa-log", "pow2", "pow2-log"}))
    throw ConfigError("f must be constant, kappa-log, pow2 or pow2-log");
  if (!one_of(cfg.g, {"none", "constant", "lambda-log", "pow2", "pow2-log"}))
    throw ConfigError("g must be none, constant, lambda-log, pow2 or pow2-log");
  if (!one_of(cfg.privacy, {"plain", "quantized", "noisy"}))
    throw ConfigError("privacy must be plain, quantized or noisy");
  if (cfg.algo == "fed2" && cfg.g == "none")
    throw ConfigError("fed2 needs an admission schedule g");
  if ((cfg.algo == "fed1" || cfg.algo == "centralized") && cfg.g != "none")
    throw ConfigError(cfg.algo + " needs g = \"none\"");
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (cfg.env == "empirical") {
    if (cfg.ratings.empty()) throw ConfigError("empirical env needs a ratings file");
    if (!std::filesystem::exists(cfg.ratings))
      throw ConfigError("ratings file does not exist: " + cfg.ratings);
    delimiter_from_name(cfg.ratings_delim);
  }
  if (cfg.env != "empirical" && cfg.arms < 1)
    throw ConfigError("arms must be >= 1");
  if (!cfg.sweep_key.empty() && cfg.sweep_values.empty())
    throw ConfigError("sweep_key set but sweep_values is empty");
}

}  // namespace fmab
