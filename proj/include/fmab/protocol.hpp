#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fmab/environments.hpp"
#include "fmab/regret.hpp"
#include "fmab/rng.hpp"
#include "fmab/schedules.hpp"

namespace fmab {

// Phase-based elimination protocols. Clients pull active arms and upload
// running sample means; the server averages them, applies the confidence
// radius, and broadcasts the elimination set. One episode is logically
// synchronous and runs single-threaded; episodes share no mutable state.

enum class Mode { fed1, fed2, centralized };

enum class PrivacyKind { plain, quantized, noisy };

struct PrivacyMode {
  PrivacyKind kind = PrivacyKind::plain;
  // Noisy mode: stddev of the per-client transmission noise, as a
  // fraction of the current confidence radius.
  double noise_rel = 0.0;
};

struct CommEvent {
  std::int64_t slot = 0;
  std::int64_t n_clients = 0;
  std::optional<int> payload_bits;
};

// --------------------------------------------------------------------------
// Privacy transforms

// Bit length so that the quantization error 2^-Q stays within half the
// given radius budget.
inline int payload_bits(double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("quantization budget must be > 0");
  const double q = 1.0 + std::log2(1.0 / budget);
  const double qc = std::ceil(q);
  if (qc <= 1.0) return 1;
  if (qc >= 52.0) return 52;
  return static_cast<int>(qc);
}

// Nearest point of the mid-tread grid {i / (2^Q - 1)} over [0, 1]; exact
// half-way products resolve by the platform default ties-to-even.
inline double quantize_mean(double x, int bits) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("quantize_mean needs x in [0, 1]");
  if (bits < 1 || bits > 52) throw std::invalid_argument("bits must be in [1, 52]");
  const double levels = std::ldexp(1.0, bits) - 1.0;
  return std::nearbyint(x * levels) / levels;
}

inline double inflate_radius_fed1(double radius) { return 2.0 * radius; }

inline double inflate_radius_fed2(double radius, double client_term) {
  return radius + client_term;
}

inline double noisy_mean(double x, double noise_scale, RngStream& rng) {
  if (noise_scale < 0.0) throw std::invalid_argument("noise scale must be >= 0");
  if (noise_scale == 0.0) return x;
  return x + rng.next_gaussian(0.0, noise_scale);
}

// --------------------------------------------------------------------------
// Client state

struct ClientState {
  std::int64_t id = 0;
  LocalModel local;
  std::vector<int> active;  // ascending arm ids, mirrors the server set
  // fresh per-phase sums feeding running accumulators since admission
  std::vector<double> phase_sum, run_sum;
  std::vector<std::int64_t> phase_count, run_count;
  RngStream observations;
  RngStream noise;
  std::optional<int> committed;

  ClientState(std::int64_t id_, LocalModel local_, std::span<const int> arms,
              std::uint64_t seed, std::uint64_t rep)
      : id(id_),
        local(std::move(local_)),
        active(arms.begin(), arms.end()),
        phase_sum(arms.size(), 0.0),
        run_sum(arms.size(), 0.0),
        phase_count(arms.size(), 0),
        run_count(arms.size(), 0),
        observations(seed, rep, static_cast<std::uint64_t>(id_),
                     StreamPurpose::observation),
        noise(seed, rep, static_cast<std::uint64_t>(id_),
              StreamPurpose::privacy_noise) {}

  std::vector<double> running_means() const {
    std::vector<double> means(active.size(),
                              std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < active.size(); ++i)
      if (run_count[i] > 0)
        means[i] = run_sum[i] / static_cast<double>(run_count[i]);
    return means;
  }

  void drop_arms(std::span<const int> eliminated) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (std::find(eliminated.begin(), eliminated.end(), active[i]) !=
          eliminated.end())
        continue;
      active[out] = active[i];
      phase_sum[out] = phase_sum[i];
      run_sum[out] = run_sum[i];
      phase_count[out] = phase_count[i];
      run_count[out] = run_count[i];
      ++out;
    }
    active.resize(out);
    phase_sum.resize(out);
    run_sum.resize(out);
    phase_count.resize(out);
    run_count.resize(out);
  }
};

struct ObsLogEntry {
  std::int64_t client;
  int arm;
  double value;
};

// One phase of local pulls: every active arm sampled pulls_per_arm times
// in ascending round-robin order. Returns the per-phase sample means
// (NaN for arms left unpulled by a truncated phase). max_slots < 0 means
// the full phase runs.
inline std::vector<double> client_run_phase(ClientState& client,
                                            std::int64_t pulls_per_arm,
                                            double sigma,
                                            std::int64_t max_slots = -1,
                                            std::vector<ObsLogEntry>* obs_log = nullptr) {
  if (client.committed.has_value())
    throw std::logic_error("client_run_phase called on a committed client");
  if (pulls_per_arm < 1) throw std::invalid_argument("pulls_per_arm must be >= 1");
  const auto arms = static_cast<std::int64_t>(client.active.size());
  std::fill(client.phase_sum.begin(), client.phase_sum.end(), 0.0);
  std::fill(client.phase_count.begin(), client.phase_count.end(), 0);
  const std::int64_t slots_full = arms * pulls_per_arm;
  const std::int64_t slots =
      max_slots < 0 ? slots_full : std::min(max_slots, slots_full);
  for (std::int64_t j = 0; j < slots; ++j) {
    const auto i = static_cast<std::size_t>(j % arms);
    const double value =
        observe(client.local, client.active[i], sigma, client.observations);
    client.phase_sum[i] += value;
    client.phase_count[i] += 1;
    client.run_sum[i] += value;
    client.run_count[i] += 1;
    if (obs_log) obs_log->push_back({client.id, client.active[i], value});
  }
  std::vector<double> means(client.active.size(),
                            std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < means.size(); ++i)
    if (client.phase_count[i] > 0)
      means[i] = client.phase_sum[i] / static_cast<double>(client.phase_count[i]);
  return means;
}

// --------------------------------------------------------------------------
// Server step

struct ServerStep {
  std::vector<double> aggregates;  // aligned with the input active set
  std::vector<int> eliminated;
  std::vector<int> survivors;
};

// Average the client means and apply the elimination rule
//   E_p = { k : agg_k + radius <= max_l agg_l - radius }.
// The argmax itself (lowest index among ties) never leaves, which keeps
// the rule well defined at radius zero.
inline ServerStep server_eliminate(std::span<const int> active,
                                   const std::vector<std::vector<double>>& client_means,
                                   double radius) {
  if (active.empty()) throw std::invalid_argument("no active arms");
  if (client_means.empty())
    throw std::logic_error("synchronization violation: no client updates");
  for (const auto& means : client_means)
    if (means.size() != active.size())
      throw std::logic_error("synchronization violation: missing client update");
  if (!(radius >= 0.0)) throw std::invalid_argument("radius must be >= 0");
  ServerStep step;
  step.aggregates.assign(active.size(), 0.0);
  for (const auto& means : client_means)
    for (std::size_t i = 0; i < active.size(); ++i) step.aggregates[i] += means[i];
  for (auto& a : step.aggregates) a /= static_cast<double>(client_means.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < active.size(); ++i)
    if (step.aggregates[i] > step.aggregates[best]) best = i;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (i != best &&
        step.aggregates[i] + radius <= step.aggregates[best] - radius)
      step.eliminated.push_back(active[i]);
    else
      step.survivors.push_back(active[i]);
  }
  return step;
}

// Fed1 elimination round: B_{p,1} from the fixed client count and F(p).
inline ServerStep server_step_fed1(std::span<const int> active,
                                   const std::vector<std::vector<double>>& client_means,
                                   std::int64_t clients, double sigma,
                                   double log_horizon, std::int64_t pulls_cum) {
  if (static_cast<std::int64_t>(client_means.size()) != clients)
    throw std::logic_error("synchronization violation: missing client update");
  return server_eliminate(
      active, client_means, radius_fed1(sigma, log_horizon, clients, pulls_cum));
}

// Fed2 elimination round: B_{p,2} from the admission history.
inline ServerStep server_step_fed2(std::span<const int> active,
                                   const std::vector<std::vector<double>>& client_means,
                                   double sigma, double sigma_c,
                                   double log_horizon,
                                   std::span<const std::int64_t> group_sizes,
                                   std::span<const std::int64_t> pulls_per_phase) {
  std::int64_t clients = 0;
  for (auto g : group_sizes) clients += g;
  if (static_cast<std::int64_t>(client_means.size()) != clients)
    throw std::logic_error("synchronization violation: missing client update");
  const double eta = eta_weight(group_sizes, pulls_per_phase);
  return server_eliminate(
      active, client_means,
      radius_fed2(sigma, sigma_c, log_horizon, eta, clients));
}

// --------------------------------------------------------------------------
// Episode driver

struct EpisodeConfig {
  Mode mode = Mode::fed2;
  Schedule schedule;
  std::int64_t horizon = 0;  // T in slots
  double comm_cost = 1.0;
  PrivacyMode privacy;
  double sigma_c = 0.0;           // client-sampling scale used in B_{p,2}
  std::int64_t clients = 0;       // fixed M for fed1 / centralized
  std::int64_t max_clients = 200000;
  std::uint64_t seed = 1;
  std::uint64_t rep = 0;
  bool log_events = false;
  std::int64_t checkpoint_every = 0;
};

struct PhaseRecord {
  std::int64_t phase = 0;
  std::int64_t clients = 0;
  std::int64_t pulls_per_arm = 0;
  int active_arms = 0;
  double radius = 0.0;
  std::vector<int> eliminated;
  double comm_cum = 0.0;
};

struct EpisodeResult {
  RegretLedger ledger;
  bool committed = false;
  int final_arm = 0;
  std::int64_t commit_slot = 0;      // horizon when uncommitted
  std::int64_t phases_completed = 0;
  std::vector<PhaseRecord> phase_log;
  std::vector<CommEvent> comm_events;
  std::vector<ObsLogEntry> obs_log;

  explicit EpisodeResult(RegretLedger l) : ledger(std::move(l)) {}
};

namespace detail {

inline void validate_episode(const EpisodeConfig& cfg, const EnvModel& env) {
  if (cfg.horizon < 1) throw std::invalid_argument("episode horizon must be >= 1");
  if (!(cfg.schedule.horizon >= 2.0))
    throw std::invalid_argument("schedule horizon must be >= 2");
  if (cfg.mode == Mode::fed2) {
    if (cfg.schedule.g_kind == AdmitKind::none)
      throw std::invalid_argument("Fed2 requires an admission schedule g(p)");
  } else {
    if (cfg.schedule.g_kind != AdmitKind::none)
      throw std::invalid_argument("Fed1 requires a schedule without g(p)");
    if (cfg.clients < 1)
      throw std::invalid_argument("Fed1 requires a fixed client count >= 1");
    if (cfg.clients > env.pool_size())
      throw std::invalid_argument("client count exceeds the environment pool");
  }
  if (cfg.privacy.kind == PrivacyKind::quantized && !env.unit_interval_means)
    throw std::invalid_argument(
        "quantized privacy requires local means provably in [0, 1]");
  if (cfg.privacy.kind == PrivacyKind::noisy && cfg.privacy.noise_rel < 0.0)
    throw std::invalid_argument("noise_rel must be >= 0");
}

}  // namespace detail

inline EpisodeResult run_episode(const EpisodeConfig& cfg, const EnvModel& env) {
  detail::validate_episode(cfg, env);
  const GlobalModel& global = env.global;
  const double log_t = cfg.schedule.log_horizon();
  const std::int64_t horizon = cfg.horizon;

  EpisodeResult result{
      RegretLedger(cfg.comm_cost, horizon, cfg.checkpoint_every, cfg.log_events)};
  RegretLedger& ledger = result.ledger;

  // admission order over a fixed pool
  std::vector<std::int64_t> pool_order;
  if (env.kind != EnvKind::approximate) {
    pool_order.resize(env.pool.size());
    std::iota(pool_order.begin(), pool_order.end(), 0);
    RngStream order_rng(cfg.seed, cfg.rep, 0, StreamPurpose::client_order);
    shuffle(pool_order, order_rng);
  }
  auto local_for = [&](std::int64_t id) -> LocalModel {
    if (env.kind == EnvKind::approximate) {
      RngStream rng(cfg.seed, cfg.rep, static_cast<std::uint64_t>(id),
                    StreamPurpose::local_model);
      return sample_local_model(global, env.sigma_c, id, rng);
    }
    return env.pool[static_cast<std::size_t>(pool_order[static_cast<std::size_t>(id)])];
  };

  std::vector<int> active(static_cast<std::size_t>(global.arms()));
  std::iota(active.begin(), active.end(), 0);
  std::vector<ClientState> clients;
  std::vector<std::int64_t> group_sizes;  // actual admissions per phase
  std::vector<std::int64_t> pulls_history;

  if (cfg.mode != Mode::fed2) {
    clients.reserve(static_cast<std::size_t>(cfg.clients));
    for (std::int64_t m = 0; m < cfg.clients; ++m)
      clients.emplace_back(m, local_for(m), active, cfg.seed, cfg.rep);
  }

  const bool per_slot_comm = cfg.mode == Mode::centralized;
  std::int64_t t = 0;
  std::int64_t phase = 1;

  while (true) {
    if (active.size() == 1) {
      result.committed = true;
      result.final_arm = active[0];
      break;
    }
    if (t >= horizon) break;

    // client admission
    if (cfg.mode == Mode::fed2) {
      const std::int64_t want = eval_g(cfg.schedule, phase);
      const std::int64_t room =
          std::min(cfg.max_clients - static_cast<std::int64_t>(clients.size()),
                   env.pool_size() - static_cast<std::int64_t>(clients.size()));
      const std::int64_t admit = std::clamp<std::int64_t>(want, 0, std::max<std::int64_t>(room, 0));
      for (std::int64_t i = 0; i < admit; ++i) {
        const auto id = static_cast<std::int64_t>(clients.size());
        clients.emplace_back(id, local_for(id), active, cfg.seed, cfg.rep);
      }
      group_sizes.push_back(admit);
      if (clients.empty())
        throw std::invalid_argument("invalid schedule: no clients admitted in phase 1");
    }
    const auto n_clients = static_cast<std::int64_t>(clients.size());
    const std::int64_t f_p = eval_f(cfg.schedule, phase);
    pulls_history.push_back(f_p);
    const auto arms = static_cast<std::int64_t>(active.size());
    ledger.set_context(phase, arms, n_clients);

    // local pulls, round-robin over active arms
    const std::int64_t slots_full = arms * f_p;
    const std::int64_t slots = std::min(slots_full, horizon - t);
    for (auto& client : clients)
      client_run_phase(client, f_p, global.sigma, slots,
                       cfg.log_events ? &result.obs_log : nullptr);
    for (std::int64_t j = 0; j < slots; ++j) {
      const int arm = active[static_cast<std::size_t>(j % arms)];
      ledger.accrue_pull(t + j, global.gaps[static_cast<std::size_t>(arm)],
                         n_clients, arm);
      if (per_slot_comm) ledger.accrue_comm(t + j, n_clients);
    }
    t += slots;
    if (slots < slots_full) break;  // no elimination from partial data

    // communication round: clients upload running means
    const bool fed2 = cfg.mode == Mode::fed2;
    const double plain_radius =
        fed2 ? radius_fed2(global.sigma, cfg.sigma_c, log_t,
                           eta_weight(group_sizes, pulls_history), n_clients)
             : radius_fed1(global.sigma, log_t, n_clients,
                           std::accumulate(pulls_history.begin(),
                                           pulls_history.end(), std::int64_t{0}));
    double radius = plain_radius;
    std::optional<int> bits;
    if (cfg.privacy.kind == PrivacyKind::quantized) {
      const double budget =
          fed2 ? client_sampling_term(cfg.sigma_c, log_t, n_clients)
               : plain_radius;
      bits = payload_bits(budget);
      radius = fed2 ? inflate_radius_fed2(plain_radius, budget)
                    : inflate_radius_fed1(plain_radius);
    }
    std::vector<std::vector<double>> uploads;
    uploads.reserve(clients.size());
    for (auto& client : clients) {
      auto means = client.running_means();
      if (cfg.privacy.kind == PrivacyKind::quantized) {
        for (auto& m : means)
          m = quantize_mean(std::clamp(m, 0.0, 1.0), *bits);
      } else if (cfg.privacy.kind == PrivacyKind::noisy) {
        for (auto& m : means)
          m = noisy_mean(m, cfg.privacy.noise_rel * plain_radius, client.noise);
      }
      uploads.push_back(std::move(means));
    }
    if (!per_slot_comm) {
      ledger.accrue_comm(t - 1, n_clients);
      result.comm_events.push_back({t - 1, n_clients, bits});
    }

    const ServerStep step = server_eliminate(active, uploads, radius);
    result.phase_log.push_back({phase, n_clients, f_p,
                                static_cast<int>(arms), radius, step.eliminated,
                                ledger.communication()});
    if (!step.eliminated.empty()) {
      for (auto& client : clients) client.drop_arms(step.eliminated);
      active = step.survivors;
    }
    ++phase;
  }

  result.phases_completed = static_cast<std::int64_t>(result.phase_log.size());
  result.commit_slot = result.committed ? t : horizon;

  if (!result.committed) {
    // horizon exhausted: report the aggregate argmax, flagged uncommitted
    double best_value = -std::numeric_limits<double>::infinity();
    int best_arm = active.empty() ? 0 : active[0];
    for (std::size_t i = 0; i < active.size(); ++i) {
      double sum = 0.0;
      std::int64_t n = 0;
      for (const auto& client : clients) {
        sum += client.run_sum[i];
        n += client.run_count[i];
      }
      if (n > 0) {
        const double value = sum / static_cast<double>(n);
        if (value > best_value) {
          best_value = value;
          best_arm = active[i];
        }
      }
    }
    result.final_arm = best_arm;
  } else {
    for (auto& client : clients) client.committed = result.final_arm;
    // exploitation: observations no longer influence anything, so only
    // the ledger advances
    const double gap = global.gaps[static_cast<std::size_t>(result.final_arm)];
    const auto n_clients =
        std::max<std::int64_t>(static_cast<std::int64_t>(clients.size()),
                               cfg.mode == Mode::fed2 ? 1 : cfg.clients);
    ledger.set_context(phase, 1, n_clients);
    for (std::int64_t s = t; s < horizon; ++s) {
      ledger.accrue_pull(s, gap, n_clients, result.final_arm);
      if (per_slot_comm) ledger.accrue_comm(s, n_clients);
    }
  }
  ledger.finish();
  return result;
}

}  // namespace fmab
