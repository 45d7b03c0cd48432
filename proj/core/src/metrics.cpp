#include "samaqm/metrics.hpp"

#include "samaqm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace samaqm::metrics {

MetricsLog::MetricsLog(SimTime horizon) : horizon_(horizon) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("metrics horizon must be non-negative");
  const auto n = static_cast<std::size_t>(std::ceil(horizon));
  series_.resize(n);
  for (std::size_t k = 0; k < n; ++k) series_[k].t = static_cast<std::int64_t>(k);
  tick_sum_.assign(n, 0.0);
  tick_count_.assign(n, 0);
}

std::size_t MetricsLog::bucket(SimTime t) const {
  if (t < 0.0 || t > horizon_) throw std::out_of_range("metrics event outside run horizon");
  const auto k = static_cast<std::size_t>(std::floor(t));
  return std::min(k, series_.size() - 1);
}

void MetricsLog::on_event(EventType type, SimTime t) {
  if (series_.empty()) throw std::out_of_range("metrics event in an empty horizon");
  SecondRecord& r = series_[bucket(t)];
  switch (type) {
    case EventType::Arrival:
      ++r.arrivals;
      ++totals_.arrivals;
      break;
    case EventType::Departure:
      ++r.departures;
      ++totals_.departures;
      break;
    case EventType::Drop:
      ++r.drops;
      ++totals_.drops;
      break;
  }
}

void MetricsLog::sample_queue(const QueueState& q, SimTime t) {
  const auto occ = static_cast<double>(q.occupancy);
  samples_.push_back({t, occ});
  if (series_.empty()) return;
  const std::size_t k = bucket(t);
  tick_sum_[k] += occ;
  ++tick_count_[k];
  series_dirty_ = true;
}

void MetricsLog::track_queue(const QueueState& q, SimTime t) {
  if (t > last_change_) {
    queue_integral_ += last_occupancy_ * (t - last_change_);
    last_change_ = t;
  }
  last_occupancy_ = static_cast<double>(q.occupancy);
  tracked_until_ = std::max(tracked_until_, t);
}

void MetricsLog::finish(SimTime t_end) {
  if (t_end > last_change_) {
    queue_integral_ += last_occupancy_ * (t_end - last_change_);
    last_change_ = t_end;
  }
  tracked_until_ = std::max(tracked_until_, t_end);
}

const std::vector<SecondRecord>& MetricsLog::series() const {
  if (series_dirty_) {
    double carry = 0.0;
    for (std::size_t k = 0; k < series_.size(); ++k) {
      if (tick_count_[k] > 0) carry = tick_sum_[k] / tick_count_[k];
      series_[k].queue = carry;
    }
    series_dirty_ = false;
  }
  return series_;
}

double MetricsLog::avg_queue() const {
  return tracked_until_ > 0.0 ? queue_integral_ / tracked_until_ : 0.0;
}

double MetricsLog::tick_mean_queue() const {
  if (samples_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& q : samples_) s += q.occupancy;
  return s / static_cast<double>(samples_.size());
}

RunSummary summary(const MetricsLog& log, std::string_view controller, const QueueState& final_queue) {
  RunSummary s;
  s.controller = std::string(controller);
  s.total_arrivals = log.totals().arrivals;
  s.total_departures = log.totals().departures;
  s.total_drops = log.totals().drops;
  s.avg_queue = log.avg_queue();
  s.tick_mean_queue = log.tick_mean_queue();
  s.final_occupancy = final_queue.occupancy;
  s.final_in_service = final_queue.in_service;
  if (!s.conserved()) {
    std::ostringstream msg;
    msg << "packet conservation violated for " << controller << ": arrivals " << s.total_arrivals
        << " != departures " << s.total_departures << " + drops " << s.total_drops
        << " + queued " << s.final_occupancy << " + in service " << s.final_in_service;
    throw std::logic_error(msg.str());
  }
  return s;
}

double queue_cov(const MetricsLog& log, SimTime warmup) {
  double n = 0.0, mean = 0.0, m2 = 0.0;
  for (const auto& q : log.queue_samples()) {
    if (q.t < warmup) continue;
    // Welford.
    n += 1.0;
    const double delta = q.occupancy - mean;
    mean += delta / n;
    m2 += delta * (q.occupancy - mean);
  }
  if (n == 0.0 || mean == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(m2 / n) / mean;
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

template <class T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad field '" +
                             std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_csv(const MetricsLog& log) {
  std::string out = "t,arrivals,departures,drops,queue\n";
  for (const auto& r : log.series()) {
    out += std::to_string(r.t) + ',' + std::to_string(r.arrivals) + ',' +
           std::to_string(r.departures) + ',' + std::to_string(r.drops) + ',' + fixed3(r.queue) +
           '\n';
  }
  return out;
}

std::vector<SecondRecord> parse_csv(std::string_view text) {
  std::vector<SecondRecord> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line_no == 1) {
      if (line != "t,arrivals,departures,drops,queue")
        throw std::runtime_error("csv line 1: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 5)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 5 fields");
    SecondRecord r;
    r.t = parse_field<std::int64_t>(f[0], line_no);
    r.arrivals = parse_field<std::uint64_t>(f[1], line_no);
    r.departures = parse_field<std::uint64_t>(f[2], line_no);
    r.drops = parse_field<std::uint64_t>(f[3], line_no);
    r.queue = parse_field<double>(f[4], line_no);
    rows.push_back(r);
  }
  return rows;
}

void export_csv(const MetricsLog& log, const std::filesystem::path& path) {
  write_file_atomic(path, format_csv(log));
}

std::string format_summary_table(const std::vector<RunSummary>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "controller" << std::right << std::setw(16)
     << "total_arrivals" << std::setw(18) << "total_departures" << std::setw(13) << "total_drops"
     << std::setw(11) << "avg_queue" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(10) << r.controller << std::right << std::setw(16)
       << r.total_arrivals << std::setw(18) << r.total_departures << std::setw(13) << r.total_drops
       << std::setw(11) << fixed3(r.avg_queue) << '\n';
  }
  return os.str();
}

std::string format_summary_csv(const std::vector<RunSummary>& rows) {
  std::string out = "controller,arrivals,departures,drops,avg_queue\n";
  for (const auto& r : rows) {
    out += r.controller + ',' + std::to_string(r.total_arrivals) + ',' +
           std::to_string(r.total_departures) + ',' + std::to_string(r.total_drops) + ',' +
           fixed3(r.avg_queue) + '\n';
  }
  return out;
}

MetricsRecorder::MetricsRecorder(sim::Simulator& sim, MetricsLog& log, SimTime sample_interval)
    : sim_(sim), log_(log), interval_(sample_interval) {
  if (!(sample_interval > 0.0)) throw std::invalid_argument("sample interval must be positive");
  sim_.add_observer(this);
  sim_.schedule(0.0, sim::EventKind::SamplingTick, [this] { tick(0); });
}

void MetricsRecorder::tick(std::uint64_t k) {
  log_.sample_queue(sim_.queue_state(), sim_.now());
  // Tick times are k * interval, not an accumulated sum, to avoid drift.
  const SimTime next = static_cast<double>(k + 1) * interval_;
  if (next < log_.horizon())
    sim_.schedule(next, sim::EventKind::SamplingTick, [this, k] { tick(k + 1); });
}

void MetricsRecorder::on_arrival(const Packet&, SimTime now) { log_.on_event(EventType::Arrival, now); }
void MetricsRecorder::on_drop(const Packet&, SimTime now) { log_.on_event(EventType::Drop, now); }
void MetricsRecorder::on_departure(const Packet&, SimTime now) {
  log_.on_event(EventType::Departure, now);
}
void MetricsRecorder::on_queue_change(const QueueState& q, SimTime now) { log_.track_queue(q, now); }

}  // namespace samaqm::metrics
