#include "samaqm/sim.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace samaqm::sim {

EventHandle Scheduler::schedule(SimTime time, EventKind kind, EventHandler action) {
  if (!(time >= now_)) {
    std::ostringstream msg;
    msg << "cannot schedule event at t=" << time << " before current time " << now_;
    throw std::logic_error(msg.str());
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push_back(Entry{time, seq, kind, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), later);
  return EventHandle{seq};
}

void Scheduler::run_until(SimTime t_end) {
  if (t_end < now_) throw std::logic_error("run_until: end time lies in the past");
  while (!heap_.empty() && heap_.front().time <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Entry ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.time;
    ++dispatched_;
    ev.action();
  }
  now_ = t_end;
}

Simulator::Simulator(LinkConfig link, std::unique_ptr<aqm::AqmController> controller)
    : link_(link), controller_(std::move(controller)) {
  if (!controller_) throw std::invalid_argument("Simulator requires an AQM controller");
  if (link_.bandwidth_bps <= 0.0) throw std::invalid_argument("bandwidth must be positive");
  if (link_.buffer_packets == 0) throw std::invalid_argument("buffer capacity must be positive");
  if (auto period = controller_->tick_interval()) schedule_controller_tick(*period, *period);
}

void Simulator::schedule_controller_tick(SimTime at, SimTime period) {
  scheduler_.schedule(at, EventKind::TimerFire, [this, at, period] {
    controller_->on_tick(now(), queue_state());
    schedule_controller_tick(at + period, period);
  });
}

void Simulator::send(Packet p, SimTime at) {
  if (p.size_bytes == 0) throw std::invalid_argument("packet size must be positive");
  scheduler_.schedule(at, EventKind::PacketArrival, [this, p = std::move(p)]() mutable {
    arrive(std::move(p));
  });
}

void Simulator::arrive(Packet p) {
  ++counts_.arrivals;
  for (auto* o : observers_) o->on_arrival(p, now());

  const QueueState q = queue_state();
  const aqm::ArrivalInfo info{now(), q, link_idle() && buffer_.empty(), idle_since_};
  AqmDecision d = controller_->on_arrival(info);
  if (q.full()) {
    d = AqmDecision::Drop;
    ++counts_.overflow_drops;
  }

  if (d == AqmDecision::Drop) {
    ++counts_.drops;
    for (auto* o : observers_) o->on_drop(p, now());
    return;
  }

  p.enqueue_time = now();
  buffer_.push_back(std::move(p));
  for (auto* o : observers_) o->on_queue_change(queue_state(), now());
  if (link_idle()) transmit_next();
}

std::optional<Packet> Simulator::transmit_next() {
  if (in_service_) throw std::logic_error("transmit_next: link is busy");
  if (buffer_.empty()) {
    idle_since_ = now();
    controller_->on_link_idle(now());
    return std::nullopt;
  }
  in_service_ = std::move(buffer_.front());
  buffer_.pop_front();
  for (auto* o : observers_) o->on_queue_change(queue_state(), now());
  scheduler_.schedule(now() + service_time(*in_service_), EventKind::ServiceComplete,
                      [this] { complete_service(); });
  return in_service_;
}

void Simulator::complete_service() {
  Packet done = std::move(*in_service_);
  in_service_.reset();
  ++counts_.departures;
  for (auto* o : observers_) o->on_departure(done, now());
  transmit_next();
}

RunTotals Simulator::totals() const {
  RunTotals t = counts_;
  t.occupancy = buffer_.size();
  t.in_service = in_service_ ? 1 : 0;
  return t;
}

RunTotals Simulator::run_until(SimTime t_end) {
  scheduler_.run_until(t_end);
  return totals();
}

}  // namespace samaqm::sim
