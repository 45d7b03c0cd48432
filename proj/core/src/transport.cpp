#include "samaqm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace samaqm::transport {

FlowState on_ack(FlowState f) {
  if (f.in_flight == 0) throw std::logic_error("on_ack: no packet in flight");
  --f.in_flight;
  if (f.phase == Phase::SlowStart)
    f.cwnd += 1.0;
  else
    f.cwnd += 1.0 / f.cwnd;
  f.phase = f.cwnd < f.ssthresh ? Phase::SlowStart : Phase::CongestionAvoidance;
  return f;
}

FlowState on_loss(FlowState f) {
  f.ssthresh = std::max(f.cwnd / 2.0, 2.0);
  f.cwnd = 1.0;
  f.phase = Phase::SlowStart;
  return f;
}

std::uint32_t sendable(const FlowState& f) {
  // Packets from before the last cut still occupy the pipe.
  const auto window = static_cast<std::uint32_t>(std::floor(f.cwnd));
  const std::uint32_t pipe = f.in_flight + f.stale;
  return window > pipe ? window - pipe : 0;
}

void TrafficMix::validate() const {
  if (http_size_mean < 1.0) throw std::invalid_argument("http size mean must be >= 1 packet");
  if (http_idle_mean <= 0.0) throw std::invalid_argument("http idle mean must be positive");
  if (start_jitter_s < 0.0) throw std::invalid_argument("start jitter must be non-negative");
  if (initial_ssthresh < 2.0) throw std::invalid_argument("initial ssthresh must be >= 2");
  if (packet_bytes == 0) throw std::invalid_argument("packet size must be positive");
  if (link_delay_s < 0.0) throw std::invalid_argument("link delay must be non-negative");
}

void start_http_burst(FlowState& f, const TrafficMix& mix, RngStream& rng) {
  f.remaining = rng.geometric(mix.http_size_mean);
  f.unsent = f.remaining;
  f.cwnd = 1.0;
  f.ssthresh = mix.initial_ssthresh;
  f.phase = Phase::SlowStart;
  f.active = true;
}

SimTime sample_http_idle(const TrafficMix& mix, RngStream& rng) {
  return rng.exponential(mix.http_idle_mean);
}

TrafficModel::TrafficModel(sim::Simulator& sim, TrafficMix mix, std::uint64_t seed)
    : sim_(sim), mix_(mix) {
  mix_.validate();
  const std::size_t n = mix_.n_ftp + mix_.n_http;
  flows_.reserve(n);
  rngs_.reserve(n);
  bursts_.assign(n, 0);

  Packet probe;
  probe.size_bytes = mix_.packet_bytes;
  const SimTime base_rtt = 2.0 * mix_.link_delay_s + sim_.service_time(probe);

  // FTP flows take the low ids, HTTP flows follow.
  for (std::size_t i = 0; i < n; ++i) {
    FlowState f;
    f.id = static_cast<FlowId>(i);
    f.kind = i < mix_.n_ftp ? FlowKind::Ftp : FlowKind::Http;
    f.ssthresh = mix_.initial_ssthresh;
    f.rtt_estimate = base_rtt;
    flows_.push_back(f);
    rngs_.emplace_back(seed, "flow/" + std::to_string(i));
  }
  sim_.add_observer(this);
  for (std::size_t i = 0; i < n; ++i) {
    const SimTime start = rngs_[i].uniform(0.0, mix_.start_jitter_s);
    const auto id = static_cast<FlowId>(i);
    sim_.schedule(start, sim::EventKind::TimerFire, [this, id] { start_flow(id); });
  }
}

void TrafficModel::start_flow(FlowId id) {
  FlowState& f = flows_[id];
  if (f.kind == FlowKind::Http) {
    begin_burst(id);
    return;
  }
  f.active = true;
  pump(id);
}

void TrafficModel::begin_burst(FlowId id) {
  start_http_burst(flows_[id], mix_, rngs_[id]);
  ++bursts_[id];
  pump(id);
}

void TrafficModel::pump(FlowId id) {
  FlowState& f = flows_[id];
  if (!f.active) return;
  std::uint32_t budget = sendable(f);
  while (budget > 0 && (f.kind == FlowKind::Ftp || f.unsent > 0)) {
    Packet p;
    p.id = next_packet_id_++;
    p.flow = id;
    p.size_bytes = mix_.packet_bytes;
    p.sent_time = sim_.now();
    sim_.send(std::move(p), sim_.now());
    ++f.in_flight;
    if (f.kind == FlowKind::Http) --f.unsent;
    --budget;
  }
}

void TrafficModel::on_departure(const Packet& p, SimTime now) {
  const FlowId id = p.flow;
  const std::uint64_t pid = p.id;
  const SimTime sent = p.sent_time;
  // Delivery to the sink plus the ACK's return trip.
  sim_.schedule(now + 2.0 * mix_.link_delay_s, sim::EventKind::TimerFire,
                [this, id, pid, sent] { handle_ack(id, pid, sent); });
}

void TrafficModel::on_drop(const Packet& p, SimTime now) {
  const FlowId id = p.flow;
  const std::uint64_t pid = p.id;
  sim_.schedule(now + flows_[id].rtt_estimate, sim::EventKind::TimerFire,
                [this, id, pid] { handle_loss(id, pid); });
}

void TrafficModel::handle_ack(FlowId id, std::uint64_t packet_id, SimTime sent_time) {
  FlowState& f = flows_[id];
  if (packet_id < f.epoch_start) {
    // Move the packet into the window so on_ack can release it.
    --f.stale;
    ++f.in_flight;
  }
  f = on_ack(f);
  f.rtt_estimate = 0.875 * f.rtt_estimate + 0.125 * (sim_.now() - sent_time);
  if (f.kind == FlowKind::Http) {
    --f.remaining;
    if (f.remaining == 0) {
      f.active = false;
      const SimTime idle = sample_http_idle(mix_, rngs_[id]);
      sim_.schedule(sim_.now() + idle, sim::EventKind::TimerFire, [this, id] { begin_burst(id); });
      return;
    }
  }
  pump(id);
}

void TrafficModel::handle_loss(FlowId id, std::uint64_t packet_id) {
  FlowState& f = flows_[id];
  ++losses_detected_;
  if (f.kind == FlowKind::Http) ++f.unsent;
  if (packet_id < f.epoch_start) {
    --f.stale;
  } else {
    --f.in_flight;
    f = on_loss(f);
    f.last_reduction = sim_.now();
    // Everything still outstanding now belongs to the answered event.
    f.stale += f.in_flight;
    f.in_flight = 0;
    f.epoch_start = next_packet_id_;
    ++window_cuts_;
  }
  pump(id);
}

}  // namespace samaqm::transport
