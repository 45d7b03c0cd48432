#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "samaqm/aqm.hpp"
#include "samaqm/types.hpp"

namespace samaqm::sim {

enum class EventKind { PacketArrival, ServiceComplete, TimerFire, SamplingTick };

using EventHandler = std::function<void()>;

struct EventHandle {
  std::uint64_t seq = 0;
};

/// Virtual clock plus a time-ordered event queue. Events with equal time are
/// dispatched in insertion order.
class Scheduler {
 public:
  SimTime now() const { return now_; }

  /// Throws std::logic_error when `time` lies before the current clock.
  EventHandle schedule(SimTime time, EventKind kind, EventHandler action);

  /// Dispatches every event with time <= t_end, then sets the clock to t_end.
  void run_until(SimTime t_end);

  std::size_t pending() const { return heap_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }

 private:
  struct Entry {
    SimTime time;
    std::uint64_t seq;
    EventKind kind;
    EventHandler action;
  };
  // std::push_heap keeps the max on top, so "less" means "dispatches later".
  static bool later(const Entry& a, const Entry& b) {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }

  std::vector<Entry> heap_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
};

struct LinkConfig {
  double bandwidth_bps = 1e6;
  std::size_t buffer_packets = 800;
};

struct RunTotals {
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t drops = 0;
  /// Subset of drops where the buffer was full on arrival.
  std::uint64_t overflow_drops = 0;
  std::size_t occupancy = 0;
  std::size_t in_service = 0;

  bool conserved() const { return arrivals == departures + drops + occupancy + in_service; }
  friend bool operator==(const RunTotals&, const RunTotals&) = default;
};

/// Hooks into the bottleneck. All methods are called synchronously from
/// inside event dispatch.
class SimObserver {
 public:
  virtual ~SimObserver() = default;
  virtual void on_arrival(const Packet& /*p*/, SimTime /*now*/) {}
  virtual void on_drop(const Packet& /*p*/, SimTime /*now*/) {}
  virtual void on_departure(const Packet& /*p*/, SimTime /*now*/) {}
  /// Buffer occupancy changed (enqueue or head-of-line removal).
  virtual void on_queue_change(const QueueState& /*q*/, SimTime /*now*/) {}
};

/// One simulation instance: the event engine plus the single bottleneck link
/// and its AQM-fronted FIFO buffer. Not thread-safe; independent instances
/// share nothing.
class Simulator {
 public:
  Simulator(LinkConfig link, std::unique_ptr<aqm::AqmController> controller);

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const { return scheduler_.now(); }
  EventHandle schedule(SimTime time, EventKind kind, EventHandler action) {
    return scheduler_.schedule(time, kind, std::move(action));
  }

  /// Observers are not owned and must outlive the simulator's run.
  void add_observer(SimObserver* observer) { observers_.push_back(observer); }

  /// Schedules the packet to reach the bottleneck at time `at`.
  void send(Packet p, SimTime at);

  /// Starts serializing the head-of-line packet. Requires an idle link.
  /// With an empty buffer the link is marked idle, the controller is told,
  /// and nothing is returned.
  std::optional<Packet> transmit_next();

  SimTime service_time(const Packet& p) const {
    return static_cast<double>(p.size_bytes) * 8.0 / link_.bandwidth_bps;
  }

  QueueState queue_state() const {
    return {buffer_.size(), link_.buffer_packets, in_service_ ? std::size_t{1} : std::size_t{0}};
  }
  bool link_idle() const { return !in_service_.has_value(); }

  RunTotals totals() const;

  /// Runs the clock to t_end and returns the totals at that instant.
  RunTotals run_until(SimTime t_end);

  const aqm::AqmController& controller() const { return *controller_; }
  const LinkConfig& link() const { return link_; }
  std::uint64_t events_dispatched() const { return scheduler_.dispatched(); }

 private:
  void arrive(Packet p);
  void complete_service();
  void schedule_controller_tick(SimTime at, SimTime period);

  LinkConfig link_;
  std::unique_ptr<aqm::AqmController> controller_;
  Scheduler scheduler_;
  std::deque<Packet> buffer_;
  std::optional<Packet> in_service_;
  SimTime idle_since_ = 0.0;
  std::vector<SimObserver*> observers_;
  RunTotals counts_;
};

}  // namespace samaqm::sim
