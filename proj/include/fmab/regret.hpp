#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fmab {

struct TraceCheckpoint {
  std::int64_t t = 0;  // slots completed
  double explore = 0.0;
  double comm = 0.0;
  std::int64_t clients = 0;
  std::int64_t phase = 0;
  std::int64_t active_arms = 0;
};

// Pseudo-regret accounting with separable exploration and communication
// sub-ledgers. Exploration accrues global-model gaps per pull;
// communication accrues C per communicating client per round. Accruals
// must arrive in non-decreasing slot order; cumulative values are
// snapshotted on a fixed checkpoint grid.
class RegretLedger {
 public:
  struct PullEvent {
    std::int64_t t;
    int arm;
    double gap;
    std::int64_t count;
  };
  struct CommEvent {
    std::int64_t t;
    std::int64_t n_clients;
  };

  RegretLedger(double comm_cost, std::int64_t horizon,
               std::int64_t checkpoint_every = 0, bool log_events = false)
      : comm_cost_(comm_cost), horizon_(horizon), log_events_(log_events) {
    if (horizon < 1) throw std::invalid_argument("ledger horizon must be >= 1");
    if (comm_cost < 0.0) throw std::invalid_argument("comm cost must be >= 0");
    step_ = checkpoint_every > 0 ? checkpoint_every : (horizon + 1999) / 2000;
  }

  void set_context(std::int64_t phase, std::int64_t active_arms,
                   std::int64_t clients) {
    phase_ = phase;
    active_arms_ = active_arms;
    clients_ = clients;
  }

  void accrue_pull(std::int64_t t, double gap, std::int64_t count = 1,
                   int arm = -1) {
    if (gap < 0.0) throw std::invalid_argument("pull gap must be >= 0");
    advance_to(t);
    explore_ += gap * static_cast<double>(count);
    if (log_events_) pull_log_.push_back({t, arm, gap, count});
  }

  void accrue_comm(std::int64_t t, std::int64_t n_clients) {
    if (n_clients < 1) throw std::invalid_argument("comm round needs >= 1 client");
    advance_to(t);
    comm_ += comm_cost_ * static_cast<double>(n_clients);
    ++comm_rounds_;
    if (comm_rounds_ == 1)
      comm_clients_ = n_clients;
    else if (n_clients != comm_clients_)
      comm_clients_constant_ = false;
    if (log_events_) comm_log_.push_back({t, n_clients});
  }

  // Finalize the remaining slots through the horizon.
  void finish() {
    while (finalized_ < horizon_) finalize_slot();
  }

  double exploration() const { return explore_; }
  double communication() const { return comm_; }
  double total() const { return explore_ + comm_; }
  std::int64_t comm_rounds() const { return comm_rounds_; }
  double comm_cost() const { return comm_cost_; }
  std::int64_t horizon() const { return horizon_; }
  std::int64_t checkpoint_step() const { return step_; }
  const std::vector<TraceCheckpoint>& checkpoints() const { return checkpoints_; }
  const std::vector<PullEvent>& pull_log() const { return pull_log_; }
  const std::vector<CommEvent>& comm_log() const { return comm_log_; }

  // Exact-model simplification: exploration + C * M * T_c with constant
  // per-round client count M. Checks the dual accounting agrees.
  double exact_model_total() const {
    if (!comm_clients_constant_)
      throw std::logic_error("exact_model_total needs a constant client count");
    const double simplified =
        explore_ + comm_cost_ * static_cast<double>(comm_clients_) *
                       static_cast<double>(comm_rounds_);
    const double scale = std::max(1.0, std::abs(total()));
    if (std::abs(simplified - total()) > 1e-12 * scale)
      throw std::logic_error("ledger dual accounting mismatch");
    return simplified;
  }

 private:
  void advance_to(std::int64_t t) {
    if (t < finalized_)
      throw std::logic_error("ledger accruals must be time-ordered");
    if (t >= horizon_) throw std::logic_error("accrual beyond the horizon");
    while (finalized_ < t) finalize_slot();
  }

  void finalize_slot() {
    ++finalized_;
    if (finalized_ % step_ == 0 || finalized_ == horizon_)
      checkpoints_.push_back(
          {finalized_, explore_, comm_, clients_, phase_, active_arms_});
  }

  double comm_cost_;
  std::int64_t horizon_;
  std::int64_t step_ = 1;
  bool log_events_;
  double explore_ = 0.0;
  double comm_ = 0.0;
  std::int64_t finalized_ = 0;  // slots fully accounted
  std::int64_t comm_rounds_ = 0;
  std::int64_t comm_clients_ = 0;
  bool comm_clients_constant_ = true;
  std::int64_t phase_ = 0;
  std::int64_t active_arms_ = 0;
  std::int64_t clients_ = 0;
  std::vector<TraceCheckpoint> checkpoints_;
  std::vector<PullEvent> pull_log_;
  std::vector<CommEvent> comm_log_;
};

}  // namespace fmab
