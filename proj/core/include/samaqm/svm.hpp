#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "samaqm/rng.hpp"

namespace samaqm::svm {

inline constexpr std::size_t kFeatureDim = 5;

using Features = std::array<double, kFeatureDim>;

struct Sample {
  Features x{};
  /// +1 drop, -1 enqueue.
  int y = -1;
};

/// Only RBF ships; the enum is where other kernels would slot in.
enum class KernelType { Rbf };

/// Trained classifier. coeffs[i] = alpha_i * y_i for support_vectors[i].
struct SvmModel {
  std::vector<Features> support_vectors;
  std::vector<double> coeffs;
  double bias = 0.0;
  double gamma = 1.0;
  KernelType kernel = KernelType::Rbf;

  /// Non-empty, equal-length lists and a positive gamma; std::invalid_argument otherwise.
  void validate() const;
};

struct TrainConfig {
  /// Box constraint.
  double C = 10.0;
  double gamma = 2.0;
  /// KKT tolerance on y f(x).
  double tol = 1e-3;
  /// Cap on full sweeps over the training set.
  int max_passes = 200;

  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training data holds one label only.
class SingleClassError : public TrainingError {
 public:
  explicit SingleClassError(int label);
  int label() const { return label_; }

 private:
  int label_;
};

class ConvergenceError : public TrainingError {
 public:
  ConvergenceError(int passes, double worst_violation);
  double worst_violation() const { return worst_; }

 private:
  double worst_;
};

/// Malformed model file; line() is 1-based.
class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// exp(-gamma * |x - z|^2). Throws std::logic_error on a dimension mismatch.
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

/// f(x) = sum_i coeffs_i K(sv_i, x) + bias.
double decision_value(const SvmModel& m, std::span<const double> x);

/// +1 iff f(x) > 0; an exact zero enqueues (-1).
int classify(const SvmModel& m, std::span<const double> x);

struct TrainResult {
  SvmModel model;
  /// Dual variables for every training sample, in input order.
  std::vector<double> alpha;
  double dual_objective = 0.0;
  double max_kkt_violation = 0.0;
  int passes = 0;
  std::size_t steps = 0;
};

/// Sequential minimal optimization on the C-SVM dual with an RBF kernel.
///
/// First index from alternating full / non-bound sweeps over KKT violators;
/// the partner is tried starting from a random position (non-bound samples
/// first, then all). Throws SingleClassError, or ConvergenceError when the
/// KKT conditions are still violated after max_passes full sweeps.
TrainResult smo_train(std::span<const Sample> data, const TrainConfig& cfg, RngStream& rng);

/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(std::span<const Sample> data, std::span<const double> alpha, double gamma);

/// Largest KKT violation of `model` on `data` for dual variables `alpha`.
double kkt_violation(std::span<const Sample> data, std::span<const double> alpha,
                     const SvmModel& model, double C);

// Model file:
//   svm-rbf v1
//   gamma <g>
//   bias <b>
//   nsv <n>
//   <coeff> <f1> <f2> <f3> <f4> <f5>     (n lines)
// Reals use the shortest representation that round-trips exactly.
std::string format_model(const SvmModel& m);
SvmModel parse_model(std::string_view text);
void save_model(const SvmModel& m, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace samaqm::svm
