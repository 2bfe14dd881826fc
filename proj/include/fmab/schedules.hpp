#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fmab {

// Per-phase pull counts f(p) and client-admission counts g(p), their
// cumulative forms F(p) and M(p), the eta_p variance weight, and both
// confidence radii. Natural logarithm throughout.

enum class PullKind { constant, ceil_kappa_log_t, power_of_two, ceil_pow2_log_t };
enum class AdmitKind { none, constant, ceil_lambda_log_t, power_of_two, ceil_pow2_log_t };

// Counts saturate here instead of overflowing; the threshold predicates
// stay monotone across the cap.
inline constexpr std::int64_t count_cap = std::int64_t{1} << 62;
inline constexpr std::int64_t phase_scan_limit = 1'000'000;

struct Schedule {
  PullKind f_kind = PullKind::constant;
  double kappa = 1.0;  // integer for constant, positive real for ceil_kappa_log_t
  AdmitKind g_kind = AdmitKind::none;
  double lambda = 1.0;
  double horizon = 2.0;  // T; only enters through log(T)

  double log_horizon() const { return std::log(horizon); }
};

struct PhaseStats {
  std::int64_t phase = 0;
  std::int64_t pulls_cum = 0;    // F(p)
  std::int64_t clients_cum = 0;  // M(p)
  double eta = 0.0;
  std::optional<double> radius_fed1;
  std::optional<double> radius_fed2;
};

namespace detail {

inline std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  return (a > count_cap - b) ? count_cap : a + b;
}

inline std::int64_t ceil_to_count(double x) {
  const double c = std::ceil(x);
  if (!(c < static_cast<double>(count_cap))) return count_cap;
  return static_cast<std::int64_t>(c);
}

inline std::int64_t pow2_count(std::int64_t p) {
  if (p >= 62) return count_cap;
  return std::int64_t{1} << p;
}

inline void check_phase_and_horizon(const Schedule& s, std::int64_t p) {
  if (p < 1) throw std::invalid_argument("phase index must be >= 1");
  if (!(s.horizon >= 2.0))
    throw std::invalid_argument("schedule horizon must be >= 2");
}

}  // namespace detail

inline std::int64_t eval_f(const Schedule& s, std::int64_t p) {
  detail::check_phase_and_horizon(s, p);
  switch (s.f_kind) {
    case PullKind::constant: {
      if (!(s.kappa >= 1.0) || s.kappa != std::floor(s.kappa))
        throw std::invalid_argument("constant f(p) needs a positive integer kappa");
      return static_cast<std::int64_t>(s.kappa);
    }
    case PullKind::ceil_kappa_log_t:
      if (!(s.kappa > 0.0))
        throw std::invalid_argument("ceil_kappa_log_t needs kappa > 0");
      return detail::ceil_to_count(s.kappa * s.log_horizon());
    case PullKind::power_of_two:
      return detail::pow2_count(p);
    case PullKind::ceil_pow2_log_t:
      return detail::ceil_to_count(
          std::ldexp(s.log_horizon(), static_cast<int>(std::min<std::int64_t>(p, 1023))));
  }
  throw std::logic_error("unreachable f_kind");
}

inline std::int64_t eval_g(const Schedule& s, std::int64_t p) {
  detail::check_phase_and_horizon(s, p);
  switch (s.g_kind) {
    case AdmitKind::none:
      throw std::invalid_argument(
          "schedule has no admission rule (Fed1 schedule used where Fed2 required)");
    case AdmitKind::constant: {
      if (!(s.lambda >= 1.0) || s.lambda != std::floor(s.lambda))
        throw std::invalid_argument("constant g(p) needs a positive integer lambda");
      return static_cast<std::int64_t>(s.lambda);
    }
    case AdmitKind::ceil_lambda_log_t:
      if (!(s.lambda > 0.0))
        throw std::invalid_argument("ceil_lambda_log_t needs lambda > 0");
      return detail::ceil_to_count(s.lambda * s.log_horizon());
    case AdmitKind::power_of_two:
      return detail::pow2_count(p);
    case AdmitKind::ceil_pow2_log_t:
      return detail::ceil_to_count(std::ldexp(s.log_horizon(), static_cast<int>(std::min<std::int64_t>(p, 1023))));
  }
  throw std::logic_error("unreachable g_kind");
}

// F(p) = sum_{q<=p} f(q), F(0) = 0
inline std::int64_t cum_f(const Schedule& s, std::int64_t p) {
  if (p == 0) return 0;
  detail::check_phase_and_horizon(s, p);
  std::int64_t total = 0;
  for (std::int64_t q = 1; q <= p; ++q) total = detail::sat_add(total, eval_f(s, q));
  return total;
}

// M(p) = sum_{q<=p} g(q)
inline std::int64_t cum_g(const Schedule& s, std::int64_t p) {
  if (p == 0) return 0;
  detail::check_phase_and_horizon(s, p);
  std::int64_t total = 0;
  for (std::int64_t q = 1; q <= p; ++q) total = detail::sat_add(total, eval_g(s, q));
  return total;
}

// eta_p = (1/M(p)^2) * sum_q g(q) / (F(p) - F(q-1)) over an explicit
// per-phase history; the protocol feeds its actually-admitted group sizes
// through the same code path.
inline double eta_weight(std::span<const std::int64_t> group_sizes,
                         std::span<const std::int64_t> pulls_per_phase) {
  if (group_sizes.empty() || group_sizes.size() != pulls_per_phase.size())
    throw std::invalid_argument("eta_weight needs matching non-empty histories");
  const std::size_t p = group_sizes.size();
  std::vector<double> pulls_cum(p + 1, 0.0);
  std::int64_t clients = 0;
  for (std::size_t q = 1; q <= p; ++q) {
    if (pulls_per_phase[q - 1] < 1)
      throw std::invalid_argument("pull counts must be >= 1");
    if (group_sizes[q - 1] < 0)
      throw std::invalid_argument("group sizes must be >= 0");
    pulls_cum[q] = pulls_cum[q - 1] + static_cast<double>(pulls_per_phase[q - 1]);
    clients += group_sizes[q - 1];
  }
  if (clients < 1) throw std::invalid_argument("no clients admitted (M(p) = 0)");
  double sum = 0.0;
  for (std::size_t q = 1; q <= p; ++q) {
    if (group_sizes[q - 1] == 0) continue;
    sum += static_cast<double>(group_sizes[q - 1]) /
           (pulls_cum[p] - pulls_cum[q - 1]);
  }
  const double m = static_cast<double>(clients);
  return sum / (m * m);
}

// B_{p,1} = sqrt(6 sigma^2 log(T) / (M F(p)))
inline double radius_fed1(double sigma, double log_horizon, std::int64_t clients,
                          std::int64_t pulls_cum) {
  if (clients < 1 || pulls_cum < 1)
    throw std::invalid_argument("radius_fed1 needs clients >= 1 and F(p) >= 1");
  return std::sqrt(6.0 * sigma * sigma * log_horizon /
                   (static_cast<double>(clients) * static_cast<double>(pulls_cum)));
}

// Client-sampling term of B_{p,2}: sqrt(6 sigma_c^2 log(T) / M(p))
inline double client_sampling_term(double sigma_c, double log_horizon,
                                   std::int64_t clients) {
  if (clients < 1) throw std::invalid_argument("client_sampling_term needs M >= 1");
  return std::sqrt(6.0 * sigma_c * sigma_c * log_horizon /
                   static_cast<double>(clients));
}

// B_{p,2} = sqrt(6 sigma^2 eta_p log(T)) + sqrt(6 sigma_c^2 log(T) / M(p))
inline double radius_fed2(double sigma, double sigma_c, double log_horizon,
                          double eta, std::int64_t clients) {
  if (!(eta > 0.0)) throw std::invalid_argument("radius_fed2 needs eta > 0");
  return std::sqrt(6.0 * sigma * sigma * eta * log_horizon) +
         client_sampling_term(sigma_c, log_horizon, clients);
}

// Derived quantities of phase p for the nominal schedule. With
// fixed_clients set (g_kind none) the run is Fed1-style: M(p) = M and
// eta_p = 1 / (M F(p)); otherwise admissions follow g.
inline PhaseStats phase_stats(const Schedule& s, std::int64_t p, double sigma,
                              double sigma_c,
                              std::optional<std::int64_t> fixed_clients = {}) {
  detail::check_phase_and_horizon(s, p);
  if (!(sigma > 0.0)) throw std::invalid_argument("phase_stats needs sigma > 0");
  PhaseStats st;
  st.phase = p;
  st.pulls_cum = cum_f(s, p);
  const double log_t = s.log_horizon();
  if (fixed_clients.has_value()) {
    if (s.g_kind != AdmitKind::none)
      throw std::invalid_argument("fixed clients requires a schedule without g");
    if (*fixed_clients < 1)
      throw std::invalid_argument("fixed client count must be >= 1");
    st.clients_cum = *fixed_clients;
    st.eta = 1.0 / (static_cast<double>(st.clients_cum) *
                    static_cast<double>(st.pulls_cum));
    st.radius_fed1 = radius_fed1(sigma, log_t, st.clients_cum, st.pulls_cum);
  } else {
    std::vector<std::int64_t> groups(static_cast<std::size_t>(p));
    std::vector<std::int64_t> pulls(static_cast<std::size_t>(p));
    for (std::int64_t q = 1; q <= p; ++q) {
      groups[static_cast<std::size_t>(q - 1)] = eval_g(s, q);
      pulls[static_cast<std::size_t>(q - 1)] = eval_f(s, q);
    }
    std::int64_t clients = 0;
    for (auto gsize : groups) clients = detail::sat_add(clients, gsize);
    if (clients < 1) throw std::invalid_argument("invalid schedule: M(p) = 0");
    st.clients_cum = clients;
    st.eta = eta_weight(groups, pulls);
    st.radius_fed2 = radius_fed2(sigma, sigma_c, log_t, st.eta, st.clients_cum);
  }
  return st;
}

// Smallest p with M F(p) >= 96 sigma^2 log(T) / gap^2; nullopt when no
// phase fits the horizon (F(p) <= T) or the scan limit is hit.
inline std::optional<std::int64_t> phase_threshold_fed1(std::int64_t clients,
                                                        const Schedule& s,
                                                        double sigma, double gap) {
  if (clients < 1) throw std::invalid_argument("phase_threshold_fed1 needs M >= 1");
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  const double need = 96.0 * sigma * sigma * s.log_horizon() / (gap * gap);
  std::int64_t pulls_cum = 0;
  for (std::int64_t p = 1; p <= phase_scan_limit; ++p) {
    pulls_cum = detail::sat_add(pulls_cum, eval_f(s, p));
    if (static_cast<double>(pulls_cum) > s.horizon) return std::nullopt;
    if (static_cast<double>(clients) * static_cast<double>(pulls_cum) >= need)
      return p;
  }
  return std::nullopt;
}

// Smallest p with 96 (sigma sqrt(eta_p) + sigma_c / sqrt(M(p)))^2 log(T)
// <= gap^2. `arms` bounds the phase length K f(p) that must still fit in
// the horizon. With fixed_clients set the schedule degenerates to the
// Fed1 form (one admission group).
inline std::optional<std::int64_t> phase_threshold_fed2(
    const Schedule& s, double sigma, double sigma_c, double gap,
    std::int64_t arms = 1, std::optional<std::int64_t> fixed_clients = {}) {
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  if (arms < 1) throw std::invalid_argument("arms must be >= 1");
  const double log_t = s.log_horizon();
  std::vector<std::int64_t> groups;
  std::vector<std::int64_t> pulls;
  std::int64_t pulls_cum = 0;
  std::int64_t slots = 0;
  for (std::int64_t p = 1; p <= phase_scan_limit; ++p) {
    const std::int64_t f_p = eval_f(s, p);
    pulls_cum = detail::sat_add(pulls_cum, f_p);
    const std::int64_t phase_slots =
        (arms >= count_cap / f_p) ? count_cap : arms * f_p;
    slots = detail::sat_add(slots, phase_slots);
    if (static_cast<double>(slots) > s.horizon) return std::nullopt;
    pulls.push_back(f_p);
    double eta;
    std::int64_t clients;
    if (fixed_clients.has_value()) {
      if (*fixed_clients < 1)
        throw std::invalid_argument("fixed client count must be >= 1");
      clients = *fixed_clients;
      eta = 1.0 / (static_cast<double>(clients) * static_cast<double>(pulls_cum));
    } else {
      groups.push_back(eval_g(s, p));
      clients = 0;
      for (auto gsize : groups) clients = detail::sat_add(clients, gsize);
      if (clients < 1) throw std::invalid_argument("invalid schedule: M(1) = 0");
      eta = eta_weight(groups, pulls);
    }
    const double root = sigma * std::sqrt(eta) +
                        sigma_c / std::sqrt(static_cast<double>(clients));
    if (96.0 * root * root * log_t <= gap * gap) return p;
  }
  return std::nullopt;
}

}  // namespace fmab
