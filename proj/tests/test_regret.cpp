#include "fmab/regret.hpp"

#include <cmath>
#include <map>

#include "catch_amalgamated.hpp"
#include "fmab/rng.hpp"

using namespace fmab;
using Catch::Matchers::WithinAbs;

TEST_CASE("pulling the optimal arm accrues nothing") {
  RegretLedger ledger(1.0, 100);
  ledger.accrue_pull(0, 0.0, 5, 0);
  ledger.finish();
  REQUIRE(ledger.exploration() == 0.0);
  REQUIRE(ledger.total() == 0.0);
}

TEST_CASE("pull accrual is linear in the client count") {
  RegretLedger ledger(1.0, 10);
  ledger.accrue_pull(0, 0.02, 7, 2);
  REQUIRE_THAT(ledger.exploration(), WithinAbs(0.14, 1e-15));
}

TEST_CASE("comm accrual follows C times clients") {
  RegretLedger free(0.0, 10);
  free.accrue_comm(0, 9);
  REQUIRE(free.communication() == 0.0);

  RegretLedger ledger(1.0, 10);
  ledger.accrue_comm(1, 5);
  ledger.accrue_comm(2, 5);
  ledger.accrue_comm(3, 5);
  REQUIRE_THAT(ledger.communication(), WithinAbs(15.0, 1e-15));
  REQUIRE(ledger.comm_rounds() == 3);
}

TEST_CASE("centralized per-slot charging totals C M T") {
  const std::int64_t horizon = 1000;
  const std::int64_t clients = 4;
  RegretLedger ledger(1.0, horizon);
  for (std::int64_t t = 0; t < horizon; ++t) ledger.accrue_comm(t, clients);
  ledger.finish();
  REQUIRE(ledger.communication() == static_cast<double>(clients * horizon));
}

TEST_CASE("dual-entry recount matches the running totals") {
  RngStream rng(12, 0, 0, StreamPurpose::global_means);
  const double gaps[] = {0.0, 0.02, 0.05, 0.3};
  RegretLedger ledger(2.5, 4000, 0, true);
  std::int64_t t = 0;
  while (t < 3500) {
    const int arm = static_cast<int>(rng.next_below(4));
    const auto count = static_cast<std::int64_t>(1 + rng.next_below(6));
    ledger.accrue_pull(t, gaps[arm], count, arm);
    if (rng.next_below(10) == 0) ledger.accrue_comm(t, count);
    t += static_cast<std::int64_t>(rng.next_below(3));
  }
  ledger.finish();

  // recount exploration per arm from the pull log
  std::map<int, double> pulled;
  double explore = 0.0;
  for (const auto& e : ledger.pull_log()) {
    pulled[e.arm] += static_cast<double>(e.count);
    explore += e.gap * static_cast<double>(e.count);
  }
  double explore_by_arm = 0.0;
  for (const auto& [arm, count] : pulled)
    explore_by_arm += gaps[arm] * count;
  double comm = 0.0;
  for (const auto& e : ledger.comm_log())
    comm += 2.5 * static_cast<double>(e.n_clients);
  const double scale = std::max(1.0, ledger.total());
  REQUIRE(std::abs(explore - ledger.exploration()) <= 1e-12 * scale);
  REQUIRE(std::abs(explore_by_arm - ledger.exploration()) <= 1e-12 * scale);
  REQUIRE(std::abs(comm - ledger.communication()) <= 1e-12 * scale);
}

TEST_CASE("checkpoints snapshot exact prefix totals") {
  const std::int64_t horizon = 250;
  RegretLedger ledger(1.0, horizon, 40);
  std::vector<double> explore_at(static_cast<std::size_t>(horizon) + 1, 0.0);
  std::vector<double> comm_at(static_cast<std::size_t>(horizon) + 1, 0.0);
  double explore = 0.0, comm = 0.0;
  RngStream rng(3, 0, 0, StreamPurpose::global_means);
  for (std::int64_t t = 0; t < horizon; ++t) {
    explore_at[static_cast<std::size_t>(t)] = explore;
    comm_at[static_cast<std::size_t>(t)] = comm;
    const double gap = 0.01 * static_cast<double>(rng.next_below(5));
    ledger.accrue_pull(t, gap, 2, 0);
    explore += 2.0 * gap;
    if (t % 7 == 0) {
      ledger.accrue_comm(t, 3);
      comm += 3.0;
    }
  }
  explore_at[static_cast<std::size_t>(horizon)] = explore;
  comm_at[static_cast<std::size_t>(horizon)] = comm;
  ledger.finish();

  REQUIRE_FALSE(ledger.checkpoints().empty());
  for (const auto& cp : ledger.checkpoints()) {
    REQUIRE((cp.t % 40 == 0 || cp.t == horizon));
    REQUIRE(cp.explore == explore_at[static_cast<std::size_t>(cp.t)]);
    REQUIRE(cp.comm == comm_at[static_cast<std::size_t>(cp.t)]);
  }
  REQUIRE(ledger.checkpoints().back().t == horizon);
  // cumulative series are non-decreasing
  double prev_total = 0.0;
  for (const auto& cp : ledger.checkpoints()) {
    REQUIRE(cp.explore + cp.comm >= prev_total);
    prev_total = cp.explore + cp.comm;
  }
}

TEST_CASE("exact-model simplification agrees with the general ledger") {
  SECTION("no communication rounds") {
    RegretLedger ledger(1.0, 10);
    ledger.accrue_pull(0, 0.5, 2, 1);
    ledger.finish();
    REQUIRE_THAT(ledger.exact_model_total(), WithinAbs(1.0, 1e-15));
  }
  SECTION("single player reduces to the single-player form") {
    RegretLedger ledger(3.0, 10);
    ledger.accrue_pull(0, 0.5, 1, 1);
    ledger.accrue_comm(4, 1);
    ledger.accrue_comm(8, 1);
    ledger.finish();
    REQUIRE_THAT(ledger.exact_model_total(), WithinAbs(0.5 + 3.0 * 2.0, 1e-15));
  }
  SECTION("constant-M dual accounting") {
    RegretLedger ledger(1.5, 100);
    for (std::int64_t t = 0; t < 100; t += 10) {
      ledger.accrue_pull(t, 0.1, 4, 2);
      ledger.accrue_comm(t, 4);
    }
    ledger.finish();
    REQUIRE_THAT(ledger.exact_model_total(),
                 WithinAbs(ledger.total(), 1e-12 * ledger.total()));
  }
  SECTION("varying client counts are rejected") {
    RegretLedger ledger(1.0, 10);
    ledger.accrue_comm(0, 2);
    ledger.accrue_comm(1, 3);
    REQUIRE_THROWS_AS(ledger.exact_model_total(), std::logic_error);
  }
}

TEST_CASE("ledger rejects out-of-order or out-of-range accruals") {
  RegretLedger ledger(1.0, 10);
  ledger.accrue_pull(5, 0.1, 1, 0);
  REQUIRE_THROWS_AS(ledger.accrue_pull(3, 0.1, 1, 0), std::logic_error);
  REQUIRE_THROWS_AS(ledger.accrue_pull(10, 0.1, 1, 0), std::logic_error);
  REQUIRE_THROWS_AS(ledger.accrue_pull(6, -0.1, 1, 0), std::invalid_argument);
}
