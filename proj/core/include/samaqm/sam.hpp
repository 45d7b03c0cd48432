#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "samaqm/aqm.hpp"
#include "samaqm/rng.hpp"
#include "samaqm/svm.hpp"
#include "samaqm/types.hpp"

namespace samaqm::sam {

inline constexpr std::size_t kWindow = svm::kFeatureDim;

/// Buffer utilization at the last five arrivals, oldest first.
using FeatureVector = svm::Features;

/// Fixed five-slot history of utilizations. Slots that have not been filled
/// yet read as 0 (an empty history looks like an empty queue).
class PatternWindow {
 public:
  /// Pushes occupancy / capacity as the newest sample. Call once per arrival
  /// before deciding, with the pre-admission occupancy.
  void record_arrival(const QueueState& q) { push(q.utilization()); }
  void push(double utilization);

  FeatureVector features() const;
  std::size_t filled() const { return filled_; }

 private:
  std::array<double, kWindow> ring_{};
  std::size_t next_ = 0;
  std::size_t filled_ = 0;
};

/// Teacher used to label training patterns:
///   score = clamp01(sum_i w_i u_i + g (u5 - u1) / 4),  drop iff score > theta.
struct LabelPolicy {
  double theta = 0.5;
  double trend_gain = 2.0;
  std::array<double, kWindow> weights{1.0 / 15, 2.0 / 15, 3.0 / 15, 4.0 / 15, 5.0 / 15};

  /// Throws std::invalid_argument when the weights are not a distribution or
  /// a scalar knob is out of range (theta must lie in (0, 1]).
  void validate() const;
};

double label_score(const FeatureVector& x, const LabelPolicy& p);
int label(const FeatureVector& x, const LabelPolicy& p);

/// n labeled patterns: even indices are i.i.d. uniform vectors, odd indices
/// bounded random walks u_{k+1} = clamp01(u_k + N(0, 0.05)) from a uniform
/// start. A draw missing either class is regenerated up to 64 times before
/// svm::SingleClassError is thrown.
std::vector<svm::Sample> gen_dataset(std::size_t n, const LabelPolicy& p, RngStream& rng);

inline constexpr int kMaxDatasetAttempts = 64;

/// `u1,u2,u3,u4,u5,label` header, then one row per sample with label +1 or -1.
std::string format_dataset_csv(std::span<const svm::Sample> data);
std::vector<svm::Sample> parse_dataset_csv(std::string_view text);

/// Full buffer always drops; otherwise the model classifies the pattern.
AqmDecision sam_decide(const svm::SvmModel& m, const PatternWindow& w, const QueueState& q);

class SamController final : public aqm::AqmController {
 public:
  /// Throws std::invalid_argument if the model is missing or invalid.
  explicit SamController(std::shared_ptr<const svm::SvmModel> model);

  std::string_view name() const override { return "sam"; }
  AqmDecision on_arrival(const aqm::ArrivalInfo& arrival) override;

  const PatternWindow& window() const { return window_; }

 private:
  std::shared_ptr<const svm::SvmModel> model_;
  PatternWindow window_;
};

struct TrainReport {
  std::size_t samples = 0;
  std::size_t positives = 0;
  /// Fraction of training samples where classify() matches the teacher label.
  double accuracy = 0.0;
  std::size_t support_vectors = 0;
  svm::TrainResult result;
};

/// gen_dataset -> smo_train -> save_model(path).
TrainReport train_sam(const svm::TrainConfig& cfg, const LabelPolicy& policy, std::size_t n,
                      RngStream& rng, const std::filesystem::path& path);

/// Same pipeline without touching the filesystem.
TrainReport train_sam(const svm::TrainConfig& cfg, const LabelPolicy& policy, std::size_t n,
                      RngStream& rng);

}  // namespace samaqm::sam
