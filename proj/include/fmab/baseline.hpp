#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fmab/environments.hpp"
#include "fmab/regret.hpp"
#include "fmab/rng.hpp"

namespace fmab {

// Single-player improved UCB run directly on the global model. Round r
// keeps a gap estimate d_r (starting at 1, halved each round), pulls each
// active arm up to n_r = ceil(2 log(T d_r^2) / d_r^2) total pulls, and
// eliminates arms whose mean + radius falls strictly below the best mean
// minus radius, with radius sqrt(log(T d_r^2) / (2 n_r)).

struct BaselineResult {
  RegretLedger ledger;
  bool committed = false;
  int final_arm = 0;
  std::int64_t commit_slot = 0;
  std::int64_t rounds_completed = 0;

  explicit BaselineResult(RegretLedger l) : ledger(std::move(l)) {}
};

inline BaselineResult baseline_run(const GlobalModel& global,
                                   std::int64_t horizon, std::uint64_t seed,
                                   std::uint64_t rep,
                                   std::int64_t checkpoint_every = 0,
                                   bool log_events = false) {
  const int arms = global.arms();
  if (horizon < arms) throw std::invalid_argument("baseline needs T >= K");
  BaselineResult result{RegretLedger(0.0, horizon, checkpoint_every, log_events)};
  RegretLedger& ledger = result.ledger;
  RngStream rng(seed, rep, 0, StreamPurpose::baseline_observation);

  std::vector<int> active(static_cast<std::size_t>(arms));
  for (int k = 0; k < arms; ++k) active[static_cast<std::size_t>(k)] = k;
  std::vector<double> sums(static_cast<std::size_t>(arms), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(arms), 0);
  LocalModel as_local{0, global.means};  // observations act on the global game

  double gap_estimate = 1.0;
  std::int64_t t = 0;
  ledger.set_context(0, arms, 1);

  auto pull = [&](int arm) {
    const double value = observe(as_local, arm, global.sigma, rng);
    sums[static_cast<std::size_t>(arm)] += value;
    counts[static_cast<std::size_t>(arm)] += 1;
    ledger.accrue_pull(t, global.gaps[static_cast<std::size_t>(arm)], 1, arm);
    ++t;
  };

  while (active.size() > 1 && t < horizon &&
         horizon * gap_estimate * gap_estimate > 1.0) {
    ledger.set_context(result.rounds_completed + 1,
                       static_cast<std::int64_t>(active.size()), 1);
    const double log_term =
        std::log(static_cast<double>(horizon) * gap_estimate * gap_estimate);
    const auto target = static_cast<std::int64_t>(
        std::ceil(2.0 * log_term / (gap_estimate * gap_estimate)));
    // round-robin until every active arm reaches the target count
    bool out_of_time = false;
    for (bool more = true; more && !out_of_time;) {
      more = false;
      for (int arm : active) {
        if (counts[static_cast<std::size_t>(arm)] >= target) continue;
        if (t >= horizon) {
          out_of_time = true;
          break;
        }
        pull(arm);
        if (counts[static_cast<std::size_t>(arm)] < target) more = true;
      }
    }
    if (out_of_time) break;
    const double radius = std::sqrt(log_term / (2.0 * static_cast<double>(target)));
    double best = -std::numeric_limits<double>::infinity();
    for (int arm : active)
      best = std::max(best, sums[static_cast<std::size_t>(arm)] /
                                static_cast<double>(counts[static_cast<std::size_t>(arm)]));
    std::vector<int> survivors;
    for (int arm : active) {
      const double mean = sums[static_cast<std::size_t>(arm)] /
                          static_cast<double>(counts[static_cast<std::size_t>(arm)]);
      if (mean + radius < best - radius) continue;
      survivors.push_back(arm);
    }
    active = std::move(survivors);
    gap_estimate /= 2.0;
    ++result.rounds_completed;
  }

  result.committed = active.size() == 1;
  result.commit_slot = t;
  if (result.committed) {
    result.final_arm = active[0];
  } else {
    // play the empirical best of the remaining arms
    int best_arm = active[0];
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int arm : active) {
      if (counts[static_cast<std::size_t>(arm)] == 0) continue;
      const double mean = sums[static_cast<std::size_t>(arm)] /
                          static_cast<double>(counts[static_cast<std::size_t>(arm)]);
      if (mean > best_mean) {
        best_mean = mean;
        best_arm = arm;
      }
    }
    result.final_arm = best_arm;
  }
  ledger.set_context(result.rounds_completed + 1, 1, 1);
  const double gap = global.gaps[static_cast<std::size_t>(result.final_arm)];
  while (t < horizon) {
    ledger.accrue_pull(t, gap, 1, result.final_arm);
    ++t;
  }
  ledger.finish();
  return result;
}

}  // namespace fmab
