#include "samaqm/sam.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace samaqm::sam {

void PatternWindow::push(double utilization) {
  ring_[next_] = std::clamp(utilization, 0.0, 1.0);
  next_ = (next_ + 1) % kWindow;
  filled_ = std::min(filled_ + 1, kWindow);
}

FeatureVector PatternWindow::features() const {
  FeatureVector out{};
  // The newest sample sits just before next_; unfilled leading slots stay 0.
  for (std::size_t k = 0; k < filled_; ++k) {
    const std::size_t src = (next_ + kWindow - 1 - k) % kWindow;
    out[kWindow - 1 - k] = ring_[src];
  }
  return out;
}

void LabelPolicy::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("label policy: theta must lie in (0,1]");
  if (!(trend_gain >= 0.0)) throw std::invalid_argument("label policy: trend gain must be >= 0");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("label policy: weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("label policy: weights must sum to 1");
}

double label_score(const FeatureVector& x, const LabelPolicy& p) {
  double level = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) level += p.weights[i] * x[i];
  const double trend = p.trend_gain * (x[kWindow - 1] - x[0]) / static_cast<double>(kWindow - 1);
  return std::clamp(level + trend, 0.0, 1.0);
}

int label(const FeatureVector& x, const LabelPolicy& p) {
  return label_score(x, p) > p.theta ? +1 : -1;
}

std::vector<svm::Sample> gen_dataset(std::size_t n, const LabelPolicy& p, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("gen_dataset: need at least 2 samples");
  p.validate();
  int seen = -1;
  for (int attempt = 0; attempt < kMaxDatasetAttempts; ++attempt) {
    std::vector<svm::Sample> data(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      FeatureVector& x = data[i].x;
      if (i % 2 == 0) {
        for (double& u : x) u = rng.uniform();
      } else {
        x[0] = rng.uniform();
        for (std::size_t k = 1; k < kWindow; ++k)
          x[k] = std::clamp(x[k - 1] + rng.normal(0.0, 0.05), 0.0, 1.0);
      }
      data[i].y = label(x, p);
      (data[i].y > 0 ? pos : neg) = true;
    }
    if (pos && neg) return data;
    seen = pos ? +1 : -1;
  }
  throw svm::SingleClassError(seen);
}

namespace {

std::string real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_dataset_csv(std::span<const svm::Sample> data) {
  std::string out = "u1,u2,u3,u4,u5,label\n";
  for (const auto& s : data) {
    for (double u : s.x) out += real(u) + ',';
    out += s.y > 0 ? "+1\n" : "-1\n";
  }
  return out;
}

std::vector<svm::Sample> parse_dataset_csv(std::string_view text) {
  std::vector<svm::Sample> out;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + why);
  };
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line_no == 1) {
      if (line != "u1,u2,u3,u4,u5,label") fail("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    svm::Sample s;
    for (std::size_t i = 0; i <= kWindow; ++i) {
      const auto comma = line.find(',');
      if ((i < kWindow) == (comma == std::string_view::npos)) fail("expected 6 fields");
      std::string_view field = line.substr(0, comma);
      line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
      if (i == kWindow) {
        if (field == "+1")
          s.y = 1;
        else if (field == "-1")
          s.y = -1;
        else
          fail("label must be +1 or -1");
        break;
      }
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), s.x[i]);
      if (ec != std::errc{} || ptr != field.data() + field.size()) fail("bad number");
    }
    out.push_back(s);
  }
  return out;
}

AqmDecision sam_decide(const svm::SvmModel& m, const PatternWindow& w, const QueueState& q) {
  if (q.full()) return AqmDecision::Drop;
  return svm::classify(m, w.features()) > 0 ? AqmDecision::Drop : AqmDecision::Enqueue;
}

SamController::SamController(std::shared_ptr<const svm::SvmModel> model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("sam controller requires a trained model");
  model_->validate();
}

AqmDecision SamController::on_arrival(const aqm::ArrivalInfo& arrival) {
  window_.record_arrival(arrival.queue);
  return sam_decide(*model_, window_, arrival.queue);
}

TrainReport train_sam(const svm::TrainConfig& cfg, const LabelPolicy& policy, std::size_t n,
                      RngStream& rng) {
  const auto data = gen_dataset(n, policy, rng);
  TrainReport report;
  report.samples = data.size();
  report.result = svm::smo_train(data, cfg, rng);
  std::size_t correct = 0;
  for (const auto& s : data) {
    report.positives += s.y > 0;
    correct += svm::classify(report.result.model, s.x) == s.y;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  report.support_vectors = report.result.model.support_vectors.size();
  return report;
}

TrainReport train_sam(const svm::TrainConfig& cfg, const LabelPolicy& policy, std::size_t n,
                      RngStream& rng, const std::filesystem::path& path) {
  TrainReport report = train_sam(cfg, policy, n, rng);
  svm::save_model(report.result.model, path);
  return report;
}

}  // namespace samaqm::sam
