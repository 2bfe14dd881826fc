#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fmab/environments.hpp"
#include "fmab/rng.hpp"

namespace fmab {

// Client-sampling failure probability: the chance that the averaged local
// model of M sampled clients fails to rank the optimal global arm
// strictly first (ties count as failure).

struct PzEstimate {
  std::int64_t clients = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// Monte Carlo estimate over n_trials independent draws of M local models.
// Trial i, client m draws from stream (seed, i, m), so sweeps over M share
// common random numbers: the first M clients of a trial coincide.
inline PzEstimate estimate_pz(const GlobalModel& global, double sigma_c,
                              std::int64_t clients, std::int64_t trials,
                              std::uint64_t seed) {
  if (clients < 1) throw std::invalid_argument("estimate_pz needs M >= 1");
  if (trials < 1000) throw std::invalid_argument("estimate_pz needs >= 1000 trials");
  const auto arms = static_cast<std::size_t>(global.arms());
  const auto best = static_cast<std::size_t>(global.optimal_arm);
  std::int64_t failures = 0;
  std::vector<double> avg(arms);
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    std::fill(avg.begin(), avg.end(), 0.0);
    for (std::int64_t m = 0; m < clients; ++m) {
      RngStream rng(seed, static_cast<std::uint64_t>(trial),
                    static_cast<std::uint64_t>(m), StreamPurpose::local_model);
      const LocalModel local = sample_local_model(global, sigma_c, m, rng);
      for (std::size_t k = 0; k < arms; ++k) avg[k] += local.means[k];
    }
    bool failed = false;
    for (std::size_t k = 0; k < arms; ++k)
      if (k != best && avg[best] <= avg[k]) failed = true;
    if (failed) ++failures;
  }
  PzEstimate est;
  est.clients = clients;
  est.trials = trials;
  est.estimate = static_cast<double>(failures) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) /
                            static_cast<double>(trials));
  return est;
}

// Order-level client requirement ceil(sigma_c^2 gap^-2 log(K T)) with unit
// constant, floored at one client. A guide, not a guarantee.
inline std::int64_t required_clients(double sigma_c, double gap,
                                     std::int64_t arms, double horizon) {
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  if (arms < 1 || !(horizon >= 2.0))
    throw std::invalid_argument("required_clients needs K >= 1 and T >= 2");
  const double value = sigma_c * sigma_c / (gap * gap) *
                       std::log(static_cast<double>(arms) * horizon);
  const double c = std::ceil(value);
  return c < 1.0 ? 1 : static_cast<std::int64_t>(c);
}

}  // namespace fmab
