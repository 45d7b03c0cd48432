#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "samaqm/sim.hpp"
#include "samaqm/types.hpp"

namespace samaqm::metrics {

enum class EventType { Arrival, Departure, Drop };

/// One row of the per-second series. Second k covers [k, k+1).
struct SecondRecord {
  std::int64_t t = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t drops = 0;
  /// Mean of the periodic queue samples taken inside this second.
  double queue = 0.0;

  friend bool operator==(const SecondRecord&, const SecondRecord&) = default;
};

struct QueueSample {
  SimTime t = 0.0;
  double occupancy = 0.0;
};

struct Totals {
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t drops = 0;
};

/// Per-second counters, periodic queue samples and a time-weighted queue
/// integral for one run over [0, horizon).
class MetricsLog {
 public:
  explicit MetricsLog(SimTime horizon);

  /// Events at exactly t == horizon fall into the last second.
  void on_event(EventType type, SimTime t);

  /// Periodic sample for the plotted queue series.
  void sample_queue(const QueueState& q, SimTime t);

  /// Occupancy changed at t; feeds the time-weighted average.
  void track_queue(const QueueState& q, SimTime t);

  /// Closes the time-weighted integral at t_end. Idempotent.
  void finish(SimTime t_end);

  SimTime horizon() const { return horizon_; }
  const std::vector<SecondRecord>& series() const;
  const std::vector<QueueSample>& queue_samples() const { return samples_; }
  const Totals& totals() const { return totals_; }

  /// Time-weighted mean occupancy over [0, end of tracking].
  double avg_queue() const;
  /// Plain mean of the periodic samples.
  double tick_mean_queue() const;

 private:
  std::size_t bucket(SimTime t) const;

  SimTime horizon_;
  mutable std::vector<SecondRecord> series_;
  mutable bool series_dirty_ = true;
  std::vector<double> tick_sum_;
  std::vector<std::uint32_t> tick_count_;
  std::vector<QueueSample> samples_;
  Totals totals_;
  double queue_integral_ = 0.0;
  double last_occupancy_ = 0.0;
  SimTime last_change_ = 0.0;
  SimTime tracked_until_ = 0.0;
};

/// Table-1 style row.
struct RunSummary {
  std::string controller;
  std::uint64_t total_arrivals = 0;
  std::uint64_t total_departures = 0;
  std::uint64_t total_drops = 0;
  double avg_queue = 0.0;
  double tick_mean_queue = 0.0;
  std::size_t final_occupancy = 0;
  std::size_t final_in_service = 0;

  bool conserved() const {
    return total_arrivals == total_departures + total_drops + final_occupancy + final_in_service;
  }
};

/// Throws std::logic_error if the log's totals and the final queue state
/// violate packet conservation.
RunSummary summary(const MetricsLog& log, std::string_view controller, const QueueState& final_queue);

/// Coefficient of variation (population stddev / mean) of the periodic queue
/// samples taken at or after `warmup`. NaN if there are none or the mean is 0.
double queue_cov(const MetricsLog& log, SimTime warmup);

/// `t,arrivals,departures,drops,queue` then one row per second. Counts are
/// integers, queue has exactly three decimals.
std::string format_csv(const MetricsLog& log);
std::vector<SecondRecord> parse_csv(std::string_view text);
void export_csv(const MetricsLog& log, const std::filesystem::path& path);

/// Aligned text table with a header row.
std::string format_summary_table(const std::vector<RunSummary>& rows);
/// `controller,arrivals,departures,drops,avg_queue` header and rows.
std::string format_summary_csv(const std::vector<RunSummary>& rows);

/// Bridges simulator callbacks into a MetricsLog and drives the sampling tick.
class MetricsRecorder final : public sim::SimObserver {
 public:
  MetricsRecorder(sim::Simulator& sim, MetricsLog& log, SimTime sample_interval);

  void on_arrival(const Packet& p, SimTime now) override;
  void on_drop(const Packet& p, SimTime now) override;
  void on_departure(const Packet& p, SimTime now) override;
  void on_queue_change(const QueueState& q, SimTime now) override;

 private:
  void tick(std::uint64_t k);

  sim::Simulator& sim_;
  MetricsLog& log_;
  SimTime interval_;
};

}  // namespace samaqm::metrics
