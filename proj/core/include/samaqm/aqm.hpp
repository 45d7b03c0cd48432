#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>

#include "samaqm/rng.hpp"
#include "samaqm/types.hpp"

namespace samaqm::aqm {

/// What a controller sees when a packet reaches the bottleneck.
struct ArrivalInfo {
  SimTime now = 0.0;
  /// Occupancy before admission of the arriving packet.
  QueueState queue;
  /// True when nothing is queued and nothing is being transmitted.
  bool link_idle = false;
  /// Start of the current idle period; meaningful only when link_idle.
  SimTime idle_since = 0.0;
};

/// Admit/drop policy at the head of a FIFO bottleneck. Controllers only ever
/// decide on the arriving packet; there is no in-queue eviction.
class AqmController {
 public:
  virtual ~AqmController() = default;

  virtual std::string_view name() const = 0;

  /// Must return Drop whenever arrival.queue.full().
  virtual AqmDecision on_arrival(const ArrivalInfo& arrival) = 0;

  /// The link ran out of packets to send.
  virtual void on_link_idle(SimTime /*now*/) {}

  /// Controllers sampled on a fixed period return it here.
  virtual std::optional<SimTime> tick_interval() const { return std::nullopt; }
  virtual void on_tick(SimTime /*now*/, const QueueState& /*queue*/) {}

  /// Current drop/mark probability, for tracing. NaN when not meaningful.
  virtual double drop_probability() const { return std::numeric_limits<double>::quiet_NaN(); }
};

// ---------------------------------------------------------------------------
// DropTail

class DropTailController final : public AqmController {
 public:
  std::string_view name() const override { return "droptail"; }
  AqmDecision on_arrival(const ArrivalInfo& arrival) override {
    return arrival.queue.full() ? AqmDecision::Drop : AqmDecision::Enqueue;
  }
};

// ---------------------------------------------------------------------------
// RED

struct RedParams {
  double w_q = 0.002;
  double min_th = 100.0;
  double max_th = 300.0;
  double max_p = 0.1;
  /// Spread drops with p = p_b / (1 - count * p_b).
  bool count_correction = true;
  /// Transmission time of a typical packet; converts idle time to EWMA steps.
  SimTime typical_service_s = 0.004;

  /// Throws std::invalid_argument. Capacity is checked when known (> 0).
  void validate(std::size_t capacity = 0) const;
};

struct RedState {
  RedParams params;
  /// EWMA of the queue length, in packets.
  double avg = 0.0;
  /// Packets enqueued since the last drop while in the ramp region.
  long count = 0;
};

/// avg' = (1 - w_q) avg + w_q q.
RedState red_avg_update(RedState s, double q);

/// Idle-period decay: avg' = (1 - w_q)^m avg with m = idle / typical_service_s.
RedState red_idle_decay(RedState s, SimTime idle_duration);

/// Linear ramp from 0 at min_th to max_p at max_th, optionally corrected by
/// count. Below min_th it is 0; from max_th on it is 1.
double red_drop_prob(const RedState& s);

/// Updates the average with q, then drops with probability red_drop_prob.
std::pair<AqmDecision, RedState> red_decide(RedState s, double q, RngStream& rng);

class RedController final : public AqmController {
 public:
  RedController(RedParams params, std::size_t capacity, RngStream rng);

  std::string_view name() const override { return "red"; }
  AqmDecision on_arrival(const ArrivalInfo& arrival) override;
  double drop_probability() const override { return red_drop_prob(state_); }

  const RedState& state() const { return state_; }

 private:
  RedState state_;
  RngStream rng_;
};

// ---------------------------------------------------------------------------
// Blue

struct BlueParams {
  double d1 = 0.02;
  double d2 = 0.002;
  SimTime freeze_time = 0.1;

  void validate() const;
};

struct BlueState {
  BlueParams params;
  double p_m = 0.0;
  SimTime last_update = -std::numeric_limits<double>::infinity();
};

BlueState blue_on_overflow(BlueState s, SimTime now);
BlueState blue_on_idle(BlueState s, SimTime now);

/// Full queue: Drop and register the overflow. Otherwise Drop with
/// probability p_m; the queue length is not consulted beyond the full test.
std::pair<AqmDecision, BlueState> blue_decide(BlueState s, const QueueState& q, SimTime now,
                                              RngStream& rng);

class BlueController final : public AqmController {
 public:
  BlueController(BlueParams params, RngStream rng);

  std::string_view name() const override { return "blue"; }
  AqmDecision on_arrival(const ArrivalInfo& arrival) override;
  void on_link_idle(SimTime now) override { state_ = blue_on_idle(state_, now); }
  double drop_probability() const override { return state_.p_m; }

  const BlueState& state() const { return state_; }

 private:
  BlueState state_;
  RngStream rng_;
};

// ---------------------------------------------------------------------------
// PI

struct PiParams {
  double a = 1.82e-5;
  double b = 1.81e-5;
  double q_ref = 200.0;
  SimTime sample_interval = 0.00625;

  void validate() const;
};

struct PiState {
  PiParams params;
  double p = 0.0;
  double q_old = 0.0;
};

/// p' = clamp01(p + a (q - q_ref) - b (q_old - q_ref)); q_old' = q.
PiState pi_update(PiState s, double q);

AqmDecision pi_decide(const PiState& s, RngStream& rng);

class PiController final : public AqmController {
 public:
  PiController(PiParams params, RngStream rng);

  std::string_view name() const override { return "pi"; }
  AqmDecision on_arrival(const ArrivalInfo& arrival) override;
  std::optional<SimTime> tick_interval() const override { return state_.params.sample_interval; }
  void on_tick(SimTime now, const QueueState& queue) override;
  double drop_probability() const override { return state_.p; }

  const PiState& state() const { return state_; }

 private:
  PiState state_;
  RngStream rng_;
};

}  // namespace samaqm::aqm
