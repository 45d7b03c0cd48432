#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "samaqm/rng.hpp"
#include "samaqm/sim.hpp"

namespace samaqm::transport {

enum class FlowKind { Ftp, Http };
enum class Phase { SlowStart, CongestionAvoidance };

/// Window state of one source. Loss is detected one rtt_estimate after the
/// drop (timeout abstraction); there is no sequence-number accounting.
struct FlowState {
  FlowId id = 0;
  FlowKind kind = FlowKind::Ftp;
  double cwnd = 1.0;
  double ssthresh = 64.0;
  Phase phase = Phase::SlowStart;
  std::uint32_t in_flight = 0;
  SimTime rtt_estimate = 0.0;
  /// HTTP: packets of the current burst not yet acknowledged.
  std::uint64_t remaining = 0;
  /// Packets ready to go out (HTTP burst data, including lost packets to resend).
  std::uint64_t unsent = 0;
  /// Time of the last multiplicative decrease.
  SimTime last_reduction = -std::numeric_limits<double>::infinity();
  /// First packet id of the current window epoch. A window cut starts a new
  /// epoch; packets from older epochs are still tracked in `stale` but no
  /// longer count against the window, and their losses belong to the
  /// congestion event that was already answered.
  std::uint64_t epoch_start = 0;
  std::uint32_t stale = 0;
  bool active = false;
};

/// Window growth for one acknowledged packet: +1 in slow start, +1/cwnd in
/// congestion avoidance. Also releases the packet from in_flight.
FlowState on_ack(FlowState f);

/// Multiplicative decrease: ssthresh = max(cwnd/2, 2), then slow start from cwnd = 1.
FlowState on_loss(FlowState f);

/// How many new packets the window admits right now. Stale packets count
/// against the pipe even though they no longer count against in_flight.
std::uint32_t sendable(const FlowState& f);

struct TrafficMix {
  std::size_t n_http = 200;
  std::size_t n_ftp = 100;
  /// Mean HTTP burst length in packets (geometric).
  double http_size_mean = 10.0;
  /// Mean HTTP think time in seconds (exponential).
  double http_idle_mean = 1.0;
  /// Flow starts are uniform over [0, start_jitter_s].
  SimTime start_jitter_s = 10.0;
  double initial_ssthresh = 64.0;
  std::uint32_t packet_bytes = 500;
  SimTime link_delay_s = 0.010;

  void validate() const;
};

/// Begins an HTTP transfer: samples the burst length and resets the window.
void start_http_burst(FlowState& f, const TrafficMix& mix, RngStream& rng);

/// Think time before the next HTTP burst.
SimTime sample_http_idle(const TrafficMix& mix, RngStream& rng);

/// The dumbbell's sources: all FTP and HTTP flows feeding the bottleneck,
/// with ACKs returning over a lossless reverse path.
class TrafficModel final : public sim::SimObserver {
 public:
  TrafficModel(sim::Simulator& sim, TrafficMix mix, std::uint64_t seed);

  TrafficModel(const TrafficModel&) = delete;
  TrafficModel& operator=(const TrafficModel&) = delete;

  const std::vector<FlowState>& flows() const { return flows_; }
  const TrafficMix& mix() const { return mix_; }

  std::uint64_t packets_sent() const { return next_packet_id_; }
  std::uint64_t losses_detected() const { return losses_detected_; }
  std::uint64_t window_cuts() const { return window_cuts_; }
  /// Per-flow count of HTTP bursts started.
  const std::vector<std::uint64_t>& bursts_started() const { return bursts_; }

  void on_drop(const Packet& p, SimTime now) override;
  void on_departure(const Packet& p, SimTime now) override;

 private:
  void start_flow(FlowId id);
  void begin_burst(FlowId id);
  void handle_ack(FlowId id, std::uint64_t packet_id, SimTime sent_time);
  void handle_loss(FlowId id, std::uint64_t packet_id);
  void pump(FlowId id);

  sim::Simulator& sim_;
  TrafficMix mix_;
  std::vector<FlowState> flows_;
  std::vector<RngStream> rngs_;
  std::vector<std::uint64_t> bursts_;
  std::uint64_t next_packet_id_ = 0;
  std::uint64_t losses_detected_ = 0;
  std::uint64_t window_cuts_ = 0;
};

}  // namespace samaqm::transport
