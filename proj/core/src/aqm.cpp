#include "samaqm/aqm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace samaqm::aqm {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// RED

void RedParams::validate(std::size_t capacity) const {
  require(w_q > 0.0 && w_q <= 1.0, "red: w_q must lie in (0,1]");
  require(min_th >= 0.0 && min_th < max_th, "red: need 0 <= min_th < max_th");
  require(capacity == 0 || max_th <= static_cast<double>(capacity),
          "red: max_th exceeds buffer capacity");
  require(max_p > 0.0 && max_p <= 1.0, "red: max_p must lie in (0,1]");
  require(typical_service_s > 0.0, "red: typical_service_s must be positive");
}

RedState red_avg_update(RedState s, double q) {
  s.avg = (1.0 - s.params.w_q) * s.avg + s.params.w_q * q;
  return s;
}

RedState red_idle_decay(RedState s, SimTime idle_duration) {
  if (idle_duration <= 0.0) return s;
  const double m = idle_duration / s.params.typical_service_s;
  s.avg *= std::pow(1.0 - s.params.w_q, m);
  return s;
}

double red_drop_prob(const RedState& s) {
  const RedParams& r = s.params;
  if (s.avg < r.min_th) return 0.0;
  if (s.avg >= r.max_th) return 1.0;
  const double p_b = r.max_p * (s.avg - r.min_th) / (r.max_th - r.min_th);
  if (!r.count_correction) return p_b;
  const double denom = 1.0 - static_cast<double>(s.count) * p_b;
  if (denom <= 0.0) return 1.0;
  return clamp01(p_b / denom);
}

std::pair<AqmDecision, RedState> red_decide(RedState s, double q, RngStream& rng) {
  s = red_avg_update(s, q);
  if (s.avg < s.params.min_th) {
    s.count = 0;
    return {AqmDecision::Enqueue, s};
  }
  const double p = red_drop_prob(s);
  // Always draw so the stream position depends only on the arrival count.
  const double u = rng.uniform();
  if (u < p) {
    s.count = 0;
    return {AqmDecision::Drop, s};
  }
  ++s.count;
  return {AqmDecision::Enqueue, s};
}

RedController::RedController(RedParams params, std::size_t capacity, RngStream rng)
    : state_{params}, rng_(std::move(rng)) {
  params.validate(capacity);
}

AqmDecision RedController::on_arrival(const ArrivalInfo& arrival) {
  if (arrival.link_idle) state_ = red_idle_decay(state_, arrival.now - arrival.idle_since);
  auto [decision, next] = red_decide(state_, static_cast<double>(arrival.queue.occupancy), rng_);
  state_ = next;
  if (arrival.queue.full()) return AqmDecision::Drop;
  return decision;
}

// ---------------------------------------------------------------------------
// Blue

void BlueParams::validate() const {
  require(d1 > 0.0 && d1 <= 1.0, "blue: d1 must lie in (0,1]");
  require(d2 > 0.0 && d2 <= 1.0, "blue: d2 must lie in (0,1]");
  require(freeze_time >= 0.0, "blue: freeze_time must be non-negative");
}

BlueState blue_on_overflow(BlueState s, SimTime now) {
  if (now - s.last_update >= s.params.freeze_time) {
    s.p_m = std::min(1.0, s.p_m + s.params.d1);
    s.last_update = now;
  }
  return s;
}

BlueState blue_on_idle(BlueState s, SimTime now) {
  if (now - s.last_update >= s.params.freeze_time) {
    s.p_m = std::max(0.0, s.p_m - s.params.d2);
    s.last_update = now;
  }
  return s;
}

std::pair<AqmDecision, BlueState> blue_decide(BlueState s, const QueueState& q, SimTime now,
                                              RngStream& rng) {
  if (q.full()) return {AqmDecision::Drop, blue_on_overflow(s, now)};
  return {rng.bernoulli(s.p_m) ? AqmDecision::Drop : AqmDecision::Enqueue, s};
}

BlueController::BlueController(BlueParams params, RngStream rng)
    : state_{params}, rng_(std::move(rng)) {
  params.validate();
}

AqmDecision BlueController::on_arrival(const ArrivalInfo& arrival) {
  auto [decision, next] = blue_decide(state_, arrival.queue, arrival.now, rng_);
  state_ = next;
  return decision;
}

// ---------------------------------------------------------------------------
// PI

void PiParams::validate() const {
  require(b > 0.0 && a > b, "pi: need a > b > 0");
  require(q_ref >= 0.0, "pi: q_ref must be non-negative");
  require(sample_interval > 0.0, "pi: sample_interval must be positive");
}

PiState pi_update(PiState s, double q) {
  const PiParams& k = s.params;
  s.p = clamp01(s.p + k.a * (q - k.q_ref) - k.b * (s.q_old - k.q_ref));
  s.q_old = q;
  return s;
}

AqmDecision pi_decide(const PiState& s, RngStream& rng) {
  return rng.bernoulli(s.p) ? AqmDecision::Drop : AqmDecision::Enqueue;
}

PiController::PiController(PiParams params, RngStream rng)
    : state_{params}, rng_(std::move(rng)) {
  params.validate();
}

AqmDecision PiController::on_arrival(const ArrivalInfo& arrival) {
  const AqmDecision d = pi_decide(state_, rng_);
  return arrival.queue.full() ? AqmDecision::Drop : d;
}

void PiController::on_tick(SimTime /*now*/, const QueueState& queue) {
  state_ = pi_update(state_, static_cast<double>(queue.occupancy));
}

}  // namespace samaqm::aqm
