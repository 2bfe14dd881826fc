#include "fmab/rng.hpp"

#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"

using namespace fmab;

TEST_CASE("equal keys reproduce the identical sequence") {
  RngStream a(42, 3, 7, StreamPurpose::observation);
  RngStream b(42, 3, 7, StreamPurpose::observation);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("key components separate streams") {
  RngStream base(42, 3, 7, StreamPurpose::observation);
  RngStream rep(42, 4, 7, StreamPurpose::observation);
  RngStream client(42, 3, 8, StreamPurpose::observation);
  RngStream purpose(42, 3, 7, StreamPurpose::local_model);
  const auto x = base.next_u64();
  REQUIRE(x != rep.next_u64());
  REQUIRE(x != client.next_u64());
  REQUIRE(x != purpose.next_u64());
}

TEST_CASE("uniform doubles live in [0, 1)") {
  RngStream rng(1, 0, 0, StreamPurpose::observation);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  REQUIRE(lo >= 0.0);
  REQUIRE(hi < 1.0);
  REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(0.5, 0.005));
}

TEST_CASE("gaussian moments match the requested scale") {
  RngStream rng(7, 0, 0, StreamPurpose::observation);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_gaussian(2.0, 3.0);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(2.0, 4.0 * 3.0 / std::sqrt(n)));
  REQUIRE_THAT(var, Catch::Matchers::WithinRel(9.0, 0.05));
}

TEST_CASE("bounded draws are unbiased over small ranges") {
  RngStream rng(9, 0, 0, StreamPurpose::observation);
  std::vector<int> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[rng.next_below(5)] += 1;
  for (int h : hits) REQUIRE(std::abs(h - n / 5) < 1000);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  RngStream rng(11, 0, 0, StreamPurpose::client_order);
  shuffle(v, rng);
  auto w = v;
  std::sort(w.begin(), w.end());
  for (int i = 0; i < 50; ++i) REQUIRE(w[i] == i);

  std::vector<int> v2(50);
  for (int i = 0; i < 50; ++i) v2[i] = i;
  RngStream rng2(11, 0, 0, StreamPurpose::client_order);
  shuffle(v2, rng2);
  REQUIRE(v == v2);
}
