#include <doctest.h>

#include <cmath>
#include <memory>

#include "samaqm/transport.hpp"

using namespace samaqm;
using namespace samaqm::transport;

namespace {

FlowState flow(double cwnd, double ssthresh, Phase phase, std::uint32_t in_flight = 1) {
  FlowState f;
  f.cwnd = cwnd;
  f.ssthresh = ssthresh;
  f.phase = phase;
  f.in_flight = in_flight;
  return f;
}

TrafficMix single(std::size_t ftp, std::size_t http) {
  TrafficMix m;
  m.n_ftp = ftp;
  m.n_http = http;
  return m;
}

}  // namespace

TEST_CASE("ack growth") {
  auto f = on_ack(flow(1, 64, Phase::SlowStart));
  CHECK(f.cwnd == 2.0);
  CHECK(f.in_flight == 0);
  CHECK(f.phase == Phase::SlowStart);

  f = on_ack(flow(10, 5, Phase::CongestionAvoidance));
  CHECK(f.cwnd == doctest::Approx(10.1).epsilon(1e-15));

  f = on_ack(flow(63.5, 64, Phase::SlowStart));
  CHECK(f.cwnd == 64.5);
  CHECK(f.phase == Phase::CongestionAvoidance);

  CHECK_THROWS_AS(on_ack(flow(1, 64, Phase::SlowStart, 0)), std::logic_error);
}

TEST_CASE("loss halving with floor") {
  auto f = on_loss(flow(40, 64, Phase::CongestionAvoidance));
  CHECK(f.ssthresh == 20.0);
  CHECK(f.cwnd == 1.0);
  CHECK(f.phase == Phase::SlowStart);
  CHECK(on_loss(flow(2, 64, Phase::SlowStart)).ssthresh == 2.0);
  const auto one = on_loss(flow(1, 64, Phase::SlowStart));
  CHECK(one.ssthresh == 2.0);
  CHECK(one.cwnd == 1.0);
}

TEST_CASE("sendable counts stale packets against the pipe") {
  FlowState f = flow(5.7, 64, Phase::SlowStart, 2);
  CHECK(sendable(f) == 3);
  f.stale = 3;
  CHECK(sendable(f) == 0);
  f.stale = 10;
  CHECK(sendable(f) == 0);
}

TEST_CASE("phase matches cwnd versus ssthresh along any ack sequence") {
  RngStream rng(1, "acks");
  for (int trial = 0; trial < 200; ++trial) {
    FlowState f = flow(1, rng.uniform(2, 100), Phase::SlowStart, 0);
    for (int k = 0; k < 300; ++k) {
      if (rng.bernoulli(0.03)) {
        f = on_loss(f);
      } else {
        f.in_flight = 1;
        const double before = f.cwnd;
        f = on_ack(f);
        CHECK(f.cwnd > before);
      }
      CHECK(f.cwnd >= 1.0);
      CHECK((f.phase == Phase::SlowStart) == (f.cwnd < f.ssthresh));
    }
  }
}

TEST_CASE("http idle sampler mean") {
  TrafficMix mix;
  mix.http_idle_mean = 1.0;
  RngStream rng(2, "idle");
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += sample_http_idle(mix, rng);
  CHECK(std::abs(sum / n - 1.0) <= 0.05);
}

TEST_CASE("http burst sizes are geometric with the configured mean") {
  TrafficMix mix;
  mix.http_size_mean = 10.0;
  RngStream rng(3, "burst");
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    FlowState f;
    f.kind = FlowKind::Http;
    f.cwnd = 17.0;
    start_http_burst(f, mix, rng);
    CHECK(f.remaining >= 1);
    CHECK(f.unsent == f.remaining);
    CHECK(f.cwnd == 1.0);
    CHECK(f.active);
    sum += static_cast<double>(f.remaining);
  }
  CHECK(std::abs(sum / n - 10.0) <= 0.3);
}

namespace {

/// Checks window invariants on a fixed 1 ms grid while the model runs.
struct WindowAudit {
  const TrafficModel& model;
  std::vector<double> last_cwnd;
  SimTime last_check = -1.0;
  std::size_t checks = 0;
  bool in_flight_ok = true;
  bool aimd_ok = true;

  explicit WindowAudit(const TrafficModel& m) : model(m) {}

  void check(SimTime now) {
    const auto& flows = model.flows();
    if (last_cwnd.empty()) last_cwnd.assign(flows.size(), 1.0);
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const auto& f = flows[i];
      if (f.in_flight > static_cast<std::uint32_t>(std::ceil(f.cwnd))) in_flight_ok = false;
      // FTP windows only shrink through a loss since the previous check.
      if (f.kind == FlowKind::Ftp && f.cwnd < last_cwnd[i] && !(f.last_reduction > last_check))
        aimd_ok = false;
      last_cwnd[i] = f.cwnd;
    }
    last_check = now;
    ++checks;
  }
};

void audit_every(sim::Simulator& sim, WindowAudit& audit, SimTime period, SimTime until) {
  for (SimTime t = 0.0; t <= until; t += period)
    sim.schedule(t, sim::EventKind::TimerFire, [&audit, t] { audit.check(t); });
}

}  // namespace

TEST_CASE("single FTP flow against a 50-packet DropTail queue oscillates") {
  sim::Simulator sim({1e6, 50}, std::make_unique<aqm::DropTailController>());
  TrafficModel model(sim, single(1, 0), 7);
  WindowAudit audit(model);
  audit_every(sim, audit, 0.001, 60.0);
  const auto totals = sim.run_until(60.0);

  CHECK(totals.drops >= 1);
  CHECK(model.window_cuts() >= 1);
  CHECK(model.losses_detected() >= 1);
  CHECK(totals.conserved());
  CHECK(audit.in_flight_ok);
  CHECK(audit.aimd_ok);
  // The single flow keeps the link busy most of the time.
  CHECK(totals.departures > 0.8 * 60.0 * 250.0);
}

TEST_CASE("mixed load keeps every flow's in_flight within its window") {
  sim::Simulator sim({1e6, 200}, std::make_unique<aqm::DropTailController>());
  TrafficModel model(sim, single(10, 20), 11);
  WindowAudit audit(model);
  audit_every(sim, audit, 0.002, 40.0);
  const auto totals = sim.run_until(40.0);
  CHECK(totals.conserved());
  CHECK(audit.in_flight_ok);
  CHECK(audit.aimd_ok);
  for (const auto& f : model.flows()) {
    CHECK(f.cwnd >= 1.0);
    CHECK((f.phase == Phase::SlowStart) == (f.cwnd < f.ssthresh));
  }
}

TEST_CASE("http flows alternate bursts and idle periods") {
  sim::Simulator sim({1e6, 200}, std::make_unique<aqm::DropTailController>());
  TrafficModel model(sim, single(0, 5), 3);
  sim.run_until(60.0);
  for (std::size_t i = 0; i < 5; ++i) CHECK(model.bursts_started()[i] >= 5);
}

TEST_CASE("flow starts are jittered over the configured window") {
  sim::Simulator sim({1e6, 200}, std::make_unique<aqm::DropTailController>());
  TrafficMix mix = single(20, 0);
  mix.start_jitter_s = 10.0;
  TrafficModel model(sim, mix, 5);
  sim.run_until(0.0);
  std::size_t started = 0;
  for (const auto& f : model.flows()) started += f.active;
  CHECK(started < 5);
  sim.run_until(10.0);
  started = 0;
  for (const auto& f : model.flows()) started += f.active;
  CHECK(started == 20);
}

TEST_CASE("same seed gives the same traffic") {
  auto run = [](std::uint64_t seed) {
    sim::Simulator sim({1e6, 100}, std::make_unique<aqm::DropTailController>());
    TrafficModel model(sim, single(3, 10), seed);
    const auto t = sim.run_until(30.0);
    return std::make_tuple(t, model.packets_sent(), model.bursts_started(), model.window_cuts());
  };
  CHECK(run(9) == run(9));
  CHECK(std::get<1>(run(9)) != std::get<1>(run(10)));
}

TEST_CASE("traffic mix validation") {
  TrafficMix m;
  m.http_idle_mean = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = TrafficMix{};
  m.initial_ssthresh = 1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
