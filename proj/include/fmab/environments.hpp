#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fmab/rng.hpp"

namespace fmab {

// Hidden ground-truth bandit game. Exactly one optimal arm by
// construction; reward observations are Gaussian around the local means.
struct GlobalModel {
  std::vector<double> means;
  double sigma = 0.0;
  int optimal_arm = 0;
  std::vector<double> gaps;  // mu_* - mu_k
  double min_gap = 0.0;      // min over suboptimal arms; +inf for K = 1

  int arms() const { return static_cast<int>(means.size()); }

  static GlobalModel from_means(std::vector<double> means, double sigma) {
    if (means.empty()) throw std::invalid_argument("global model needs >= 1 arm");
    for (double m : means)
      if (!std::isfinite(m)) throw std::invalid_argument("non-finite arm mean");
    GlobalModel g;
    g.means = std::move(means);
    g.sigma = sigma;
    int best = 0;
    for (int k = 1; k < g.arms(); ++k)
      if (g.means[k] > g.means[best]) best = k;
    for (int k = 0; k < g.arms(); ++k)
      if (k != best && g.means[k] == g.means[best])
        throw std::invalid_argument("global model must have a unique optimal arm");
    g.optimal_arm = best;
    g.gaps.resize(g.means.size());
    g.min_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < g.arms(); ++k) {
      g.gaps[k] = g.means[best] - g.means[k];
      if (k != best) g.min_gap = std::min(g.min_gap, g.gaps[k]);
    }
    return g;
  }
};

struct LocalModel {
  std::int64_t client = 0;
  std::vector<double> means;
};

enum class EnvKind { exact, approximate, empirical };

// Synthetic game: the optimal mean sits at mu_hi, the runner-up at
// mu_hi - gap, and the remaining arms are uniform in [mu_lo, mu_hi - gap].
// Arm positions are shuffled so the optimal index carries no information.
inline GlobalModel build_synthetic_global(int arms, double mu_lo, double mu_hi,
                                          double gap, double sigma,
                                          std::uint64_t seed) {
  if (arms < 1) throw std::invalid_argument("arms must be >= 1");
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  if (!(mu_hi > mu_lo)) throw std::invalid_argument("mu_hi must exceed mu_lo");
  if (arms > 2 && mu_hi - gap < mu_lo)
    throw std::invalid_argument("interval too narrow for the requested gap");
  RngStream rng(seed, 0, 0, StreamPurpose::global_means);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(arms));
    means.push_back(mu_hi);
    if (arms >= 2) means.push_back(mu_hi - gap);
    for (int k = 2; k < arms; ++k)
      means.push_back(mu_lo + (mu_hi - gap - mu_lo) * rng.next_double());
    shuffle(means, rng);
    try {
      return GlobalModel::from_means(std::move(means), sigma);
    } catch (const std::invalid_argument&) {
      continue;  // argmax tie; redraw
    }
  }
  throw std::runtime_error("could not construct a unique-optimum global model");
}

// Approximate model: each local mean is an independent Gaussian around
// the global mean with scale sigma_c.
inline LocalModel sample_local_model(const GlobalModel& global, double sigma_c,
                                     std::int64_t client, RngStream& rng) {
  LocalModel local;
  local.client = client;
  local.means.reserve(global.means.size());
  for (double mu : global.means)
    local.means.push_back(sigma_c == 0.0 ? mu : rng.next_gaussian(mu, sigma_c));
  return local;
}

// One observation of arm k on a local model.
inline double observe(const LocalModel& local, int arm, double sigma,
                      RngStream& rng) {
  if (arm < 0 || arm >= static_cast<int>(local.means.size()))
    throw std::invalid_argument("arm index out of range");
  if (sigma == 0.0) return local.means[static_cast<std::size_t>(arm)];
  return rng.next_gaussian(local.means[static_cast<std::size_t>(arm)], sigma);
}

// Exact model: local means are bounded perturbations of the global means,
// recentred so the per-arm average over clients equals the global mean
// exactly. Offsets are uniform in [-spread, spread], so every local mean
// lies within 2*spread of its global mean.
inline std::vector<LocalModel> build_exact_locals(const GlobalModel& global,
                                                  std::int64_t count,
                                                  double spread,
                                                  std::uint64_t seed,
                                                  std::uint64_t rep) {
  if (count < 1) throw std::invalid_argument("exact model needs >= 1 client");
  if (spread < 0.0) throw std::invalid_argument("spread must be >= 0");
  std::vector<LocalModel> locals(static_cast<std::size_t>(count));
  for (std::int64_t m = 0; m < count; ++m) {
    RngStream rng(seed, rep, static_cast<std::uint64_t>(m),
                  StreamPurpose::local_model);
    locals[static_cast<std::size_t>(m)].client = m;
    auto& means = locals[static_cast<std::size_t>(m)].means;
    means.resize(global.means.size());
    for (std::size_t k = 0; k < means.size(); ++k)
      means[k] = spread * (2.0 * rng.next_double() - 1.0);
  }
  for (std::size_t k = 0; k < global.means.size(); ++k) {
    double mean_offset = 0.0;
    for (const auto& local : locals) mean_offset += local.means[k];
    mean_offset /= static_cast<double>(count);
    for (auto& local : locals)
      local.means[k] = global.means[k] + (local.means[k] - mean_offset);
  }
  return locals;
}

// ---------------------------------------------------------------------------
// Ratings ingestion (empirical environment)

struct RatingsTable {
  std::int64_t clients = 0;
  std::int64_t items = 0;
  // dense (client, item, rating) rows, ids remapped to 0-based indices
  struct Row {
    std::int32_t client;
    std::int32_t item;
    double rating;
  };
  std::vector<Row> rows;
};

namespace detail {

inline bool numeric_field(const std::string& field) {
  if (field.empty()) return false;
  char* end = nullptr;
  std::strtod(field.c_str(), &end);
  return end != field.c_str() && *end == '\0';
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == delim) {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace detail

// UTF-8 delimited text with columns client_id (integer), item_id
// (integer), rating (real); extra trailing columns are ignored. A header
// row is skipped when its first field is not numeric.
inline RatingsTable read_ratings(const std::string& path, char delim = '\t') {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings file: " + path);
  RatingsTable table;
  std::unordered_map<std::int64_t, std::int32_t> client_ids;
  std::unordered_map<std::int64_t, std::int32_t> item_ids;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_line(line, delim);
    if (first) {
      first = false;
      if (!detail::numeric_field(fields[0])) continue;  // header
    }
    if (fields.size() < 3)
      throw std::runtime_error("ratings line " + std::to_string(line_no) +
                               ": expected client, item, rating");
    std::int64_t raw_client, raw_item;
    double rating;
    try {
      raw_client = std::stoll(fields[0]);
      raw_item = std::stoll(fields[1]);
      rating = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw std::runtime_error("ratings line " + std::to_string(line_no) +
                               ": malformed fields");
    }
    auto [cit, cinserted] = client_ids.try_emplace(
        raw_client, static_cast<std::int32_t>(client_ids.size()));
    auto [iit, iinserted] = item_ids.try_emplace(
        raw_item, static_cast<std::int32_t>(item_ids.size()));
    table.rows.push_back({cit->second, iit->second, rating});
  }
  table.clients = static_cast<std::int64_t>(client_ids.size());
  table.items = static_cast<std::int64_t>(item_ids.size());
  if (table.rows.empty()) throw std::runtime_error("ratings file is empty");
  return table;
}

struct EmpiricalEnv {
  GlobalModel global;
  std::vector<LocalModel> locals;
  std::vector<std::int32_t> item_group;
};

// Items are partitioned uniformly at random into `groups` arms; a
// client's local mean for an arm is her mean rating over that group, with
// missing cells imputed by the group's mean over all ratings. Global
// means follow exact-model semantics (per-arm average of local means).
inline EmpiricalEnv build_empirical_env(const RatingsTable& table, int groups,
                                        std::uint64_t seed, double sigma) {
  if (groups < 1) throw std::invalid_argument("groups must be >= 1");
  if (table.items < groups)
    throw std::runtime_error("fewer items than groups");
  EmpiricalEnv env;
  std::vector<std::int32_t> order(static_cast<std::size_t>(table.items));
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, 0, 0, StreamPurpose::group_assign);
  shuffle(order, rng);
  env.item_group.resize(static_cast<std::size_t>(table.items));
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    env.item_group[static_cast<std::size_t>(order[pos])] =
        static_cast<std::int32_t>(pos % static_cast<std::size_t>(groups));

  const auto n_clients = static_cast<std::size_t>(table.clients);
  const auto n_groups = static_cast<std::size_t>(groups);
  std::vector<double> cell_sum(n_clients * n_groups, 0.0);
  std::vector<std::int64_t> cell_count(n_clients * n_groups, 0);
  std::vector<double> col_sum(n_groups, 0.0);
  std::vector<std::int64_t> col_count(n_groups, 0);
  for (const auto& row : table.rows) {
    const auto k = static_cast<std::size_t>(env.item_group[static_cast<std::size_t>(row.item)]);
    const std::size_t cell = static_cast<std::size_t>(row.client) * n_groups + k;
    cell_sum[cell] += row.rating;
    cell_count[cell] += 1;
    col_sum[k] += row.rating;
    col_count[k] += 1;
  }
  std::vector<double> col_mean(n_groups, 0.0);
  for (std::size_t k = 0; k < n_groups; ++k)
    col_mean[k] = col_count[k] > 0 ? col_sum[k] / static_cast<double>(col_count[k]) : 0.0;

  env.locals.resize(n_clients);
  std::vector<double> global_means(n_groups, 0.0);
  for (std::size_t m = 0; m < n_clients; ++m) {
    env.locals[m].client = static_cast<std::int64_t>(m);
    env.locals[m].means.resize(n_groups);
    for (std::size_t k = 0; k < n_groups; ++k) {
      const std::size_t cell = m * n_groups + k;
      const double mean = cell_count[cell] > 0
                              ? cell_sum[cell] / static_cast<double>(cell_count[cell])
                              : col_mean[k];
      env.locals[m].means[k] = mean;
      global_means[k] += mean;
    }
  }
  for (auto& mu : global_means) mu /= static_cast<double>(n_clients);
  env.global = GlobalModel::from_means(std::move(global_means), sigma);
  return env;
}

inline EmpiricalEnv build_empirical_env(const std::string& path, int groups,
                                        std::uint64_t seed, double sigma,
                                        char delim = '\t') {
  return build_empirical_env(read_ratings(path, delim), groups, seed, sigma);
}

// Environment handle consumed by the protocol: global truth plus either a
// sampling rule (approximate) or a fixed pool of local models.
struct EnvModel {
  EnvKind kind = EnvKind::approximate;
  GlobalModel global;
  double sigma_c = 0.0;           // approximate only
  std::vector<LocalModel> pool;   // exact / empirical
  bool unit_interval_means = false;

  std::int64_t pool_size() const {
    return kind == EnvKind::approximate
               ? std::numeric_limits<std::int64_t>::max()
               : static_cast<std::int64_t>(pool.size());
  }
};

inline bool all_means_in_unit_interval(const std::vector<LocalModel>& locals) {
  for (const auto& local : locals)
    for (double m : local.means)
      if (m < 0.0 || m > 1.0) return false;
  return true;
}

}  // namespace fmab
