#include <doctest.h>

#include <vector>

#include "samaqm/sim.hpp"

using namespace samaqm;
using namespace samaqm::sim;

namespace {

struct Trace : SimObserver {
  std::vector<SimTime> arrivals, departures, drops;
  std::vector<std::size_t> occupancy;
  void on_arrival(const Packet&, SimTime now) override { arrivals.push_back(now); }
  void on_drop(const Packet&, SimTime now) override { drops.push_back(now); }
  void on_departure(const Packet&, SimTime now) override { departures.push_back(now); }
  void on_queue_change(const QueueState& q, SimTime) override { occupancy.push_back(q.occupancy); }
};

/// DropTail that also records idle notifications.
struct IdleProbe final : aqm::AqmController {
  std::vector<SimTime>* idles;
  explicit IdleProbe(std::vector<SimTime>* out) : idles(out) {}
  std::string_view name() const override { return "probe"; }
  AqmDecision on_arrival(const aqm::ArrivalInfo& a) override {
    return a.queue.full() ? AqmDecision::Drop : AqmDecision::Enqueue;
  }
  void on_link_idle(SimTime now) override { idles->push_back(now); }
};

/// Admits everything, including into a full buffer.
struct Reckless final : aqm::AqmController {
  std::string_view name() const override { return "reckless"; }
  AqmDecision on_arrival(const aqm::ArrivalInfo&) override { return AqmDecision::Enqueue; }
};

Packet packet(std::uint64_t id, std::uint32_t bytes = 500) {
  Packet p;
  p.id = id;
  p.size_bytes = bytes;
  return p;
}

}  // namespace

TEST_CASE("events dispatch in time order") {
  Scheduler s;
  std::vector<double> order;
  s.schedule(5.0, EventKind::TimerFire, [&] { order.push_back(5.0); });
  s.schedule(3.0, EventKind::TimerFire, [&] { order.push_back(3.0); });
  s.run_until(10.0);
  CHECK(order == std::vector<double>{3.0, 5.0});
  CHECK(s.now() == 10.0);
}

TEST_CASE("ties dispatch in insertion order") {
  Scheduler s;
  std::vector<std::uint64_t> order;
  for (int i = 0; i < 20; ++i) {
    const auto h = s.schedule(1.0, EventKind::TimerFire, [&order, i] { order.push_back(i); });
    CHECK(h.seq == static_cast<std::uint64_t>(i));
  }
  s.run_until(1.0);
  for (int i = 0; i < 20; ++i) CHECK(order[i] == static_cast<std::uint64_t>(i));
}

TEST_CASE("events scheduled during dispatch keep FIFO among ties") {
  Scheduler s;
  std::vector<int> order;
  s.schedule(1.0, EventKind::TimerFire, [&] {
    order.push_back(1);
    s.schedule(1.0, EventKind::TimerFire, [&] { order.push_back(3); });
  });
  s.schedule(1.0, EventKind::TimerFire, [&] { order.push_back(2); });
  s.run_until(2.0);
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("scheduling in the past fails loudly") {
  Scheduler s;
  s.run_until(4.0);
  CHECK_THROWS_AS(s.schedule(3.0, EventKind::TimerFire, [] {}), std::logic_error);
  CHECK_THROWS_AS(s.run_until(1.0), std::logic_error);
  CHECK_NOTHROW(s.schedule(4.0, EventKind::TimerFire, [] {}));
}

TEST_CASE("clock never moves backwards across a random schedule") {
  Scheduler s;
  RngStream rng(1, "sched");
  SimTime last = 0.0;
  bool monotone = true;
  std::function<void()> spawn = [&] {
    monotone = monotone && s.now() >= last;
    last = s.now();
    if (s.dispatched() < 20000) s.schedule(s.now() + rng.exponential(0.01), EventKind::TimerFire, spawn);
  };
  for (int i = 0; i < 10; ++i) s.schedule(rng.uniform(0, 1), EventKind::TimerFire, spawn);
  s.run_until(1e9);
  CHECK(monotone);
  CHECK(s.dispatched() >= 20000);
}

TEST_CASE("empty run") {
  Simulator sim({}, std::make_unique<aqm::DropTailController>());
  const auto t = sim.run_until(180.0);
  CHECK(sim.now() == 180.0);
  CHECK(t == RunTotals{});
}

TEST_CASE("single packet through an empty queue") {
  Simulator sim({1e6, 800}, std::make_unique<aqm::DropTailController>());
  Trace trace;
  sim.add_observer(&trace);
  sim.send(packet(1), 1.0);
  const auto t = sim.run_until(2.0);
  CHECK(t.arrivals == 1);
  CHECK(t.departures == 1);
  CHECK(t.drops == 0);
  CHECK(t.conserved());
  REQUIRE(trace.departures.size() == 1);
  CHECK(trace.departures[0] == doctest::Approx(1.004).epsilon(1e-12));
}

TEST_CASE("service time is size * 8 / bandwidth") {
  Simulator sim({1e6, 10}, std::make_unique<aqm::DropTailController>());
  CHECK(sim.service_time(packet(0)) == doctest::Approx(0.004).epsilon(1e-15));
  CHECK(sim.service_time(packet(0, 1500)) == doctest::Approx(0.012).epsilon(1e-15));
}

TEST_CASE("FIFO service spacing") {
  Simulator sim({1e6, 10}, std::make_unique<aqm::DropTailController>());
  Trace trace;
  sim.add_observer(&trace);
  for (int i = 0; i < 3; ++i) sim.send(packet(i), 0.5);
  sim.run_until(1.0);
  REQUIRE(trace.departures.size() == 3);
  CHECK(trace.departures[1] - trace.departures[0] == doctest::Approx(0.004).epsilon(1e-12));
  CHECK(trace.departures[2] - trace.departures[1] == doctest::Approx(0.004).epsilon(1e-12));
}

TEST_CASE("idle link notifies the controller") {
  std::vector<SimTime> idles;
  Simulator sim({1e6, 10}, std::make_unique<IdleProbe>(&idles));
  CHECK(!sim.transmit_next().has_value());
  CHECK(sim.link_idle());
  REQUIRE(idles.size() == 1);

  sim.send(packet(1), 1.0);
  sim.run_until(2.0);
  REQUIRE(idles.size() == 2);
  CHECK(idles[1] == doctest::Approx(1.004));
}

TEST_CASE("transmit_next on a busy link is a programming error") {
  Simulator sim({1e6, 10}, std::make_unique<aqm::DropTailController>());
  sim.send(packet(1), 0.0);
  sim.schedule(0.001, EventKind::TimerFire, [&] { CHECK_THROWS_AS(sim.transmit_next(), std::logic_error); });
  sim.run_until(1.0);
}

TEST_CASE("overflow guard holds even for a controller that admits everything") {
  Simulator sim({1e6, 5}, std::make_unique<Reckless>());
  Trace trace;
  sim.add_observer(&trace);
  for (int i = 0; i < 50; ++i) sim.send(packet(i), 0.0);
  const auto t = sim.run_until(0.0);
  CHECK(t.occupancy == 5);
  CHECK(t.in_service == 1);
  CHECK(t.drops == 44);
  CHECK(t.overflow_drops == 44);
  CHECK(t.conserved());
  for (auto q : trace.occupancy) CHECK(q <= 5);
}

TEST_CASE("conservation holds at every instant under random load") {
  Simulator sim({1e6, 20}, std::make_unique<aqm::DropTailController>());
  RngStream rng(2, "load");
  SimTime t = 0.0;
  for (int i = 0; i < 5000; ++i) {
    t += rng.exponential(0.0035);
    sim.send(packet(i, 200 + static_cast<std::uint32_t>(rng.below(1300))), t);
  }
  for (double stop = 0.5; stop < t + 1.0; stop += 0.5) {
    const auto totals = sim.run_until(stop);
    REQUIRE(totals.conserved());
    CHECK(totals.occupancy <= 20);
  }
  CHECK(sim.totals().arrivals == 5000);
}

TEST_CASE("controller ticks fire on their period") {
  struct Ticker final : aqm::AqmController {
    int* count;
    explicit Ticker(int* c) : count(c) {}
    std::string_view name() const override { return "ticker"; }
    AqmDecision on_arrival(const aqm::ArrivalInfo&) override { return AqmDecision::Enqueue; }
    std::optional<SimTime> tick_interval() const override { return 0.25; }
    void on_tick(SimTime, const QueueState&) override { ++*count; }
  };
  int ticks = 0;
  Simulator sim({}, std::make_unique<Ticker>(&ticks));
  sim.run_until(10.0);
  CHECK(ticks == 40);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(Simulator({1e6, 10}, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(Simulator({0.0, 10}, std::make_unique<aqm::DropTailController>()), std::invalid_argument);
  CHECK_THROWS_AS(Simulator({1e6, 0}, std::make_unique<aqm::DropTailController>()), std::invalid_argument);
}
