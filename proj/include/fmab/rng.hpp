#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fmab {

// All randomness in the library flows through streams keyed by
// (seed, replication, client, purpose). Streams with distinct keys are
// independent, and a run's output is a pure function of its keys, so
// replications can be executed in any order or thread without changing
// results.

enum class StreamPurpose : std::uint64_t {
  global_means = 1,
  group_assign = 2,
  local_model = 3,
  client_order = 4,
  observation = 5,
  privacy_noise = 6,
  baseline_observation = 7,
};

namespace detail {

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ seeded from a hashed stream key. Gaussian draws use
// Box-Muller with a fixed consumption of two words per draw.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t rep, std::uint64_t client,
            StreamPurpose purpose) {
    std::uint64_t h = seed;
    h = detail::mix64(h ^ 0xa076'1d64'78bd'642fULL);
    h = detail::mix64(h ^ rep);
    h = detail::mix64(h ^ client);
    h = detail::mix64(h ^ static_cast<std::uint64_t>(purpose));
    for (auto& w : state_) {
      h = detail::mix64(h);
      w = h;
    }
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0)
      state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  double next_gaussian(double mean, double stddev) {
    // u1 in (0, 1] so the log is finite
    const double u1 = ((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = (next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // unbiased integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_[4];
};

template <typename T>
void shuffle(std::vector<T>& values, RngStream& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace fmab
