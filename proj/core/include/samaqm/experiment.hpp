#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "samaqm/aqm.hpp"
#include "samaqm/config.hpp"
#include "samaqm/metrics.hpp"
#include "samaqm/sim.hpp"
#include "samaqm/svm.hpp"

namespace samaqm::experiment {

/// Outcome of one controller on one scenario.
struct RunResult {
  std::string controller;
  std::uint64_t seed = 0;
  metrics::MetricsLog log;
  metrics::RunSummary summary;
  sim::RunTotals totals;
};

/// Builds a controller by name. `model` is required for "sam" only.
std::unique_ptr<aqm::AqmController> make_controller(const config::ScenarioConfig& cfg,
                                                    std::string_view name, std::uint64_t seed,
                                                    std::shared_ptr<const svm::SvmModel> model);

/// Runs the dumbbell (FTP + HTTP sources -> AQM bottleneck -> sink) for
/// cfg.duration_s seconds with controller `name`.
RunResult run_scenario(const config::ScenarioConfig& cfg, std::string_view name,
                       std::shared_ptr<const svm::SvmModel> model = nullptr);

/// Convenience overload using cfg.controller and, for sam, cfg.sam_model_path.
RunResult run_scenario(const config::ScenarioConfig& cfg);

struct CompareOptions {
  std::vector<std::string> controllers;
  /// Off by default: every controller sees the same traffic randomness.
  bool distinct_seeds = false;
  /// Run controllers on separate threads.
  bool parallel = true;
};

/// Runs each controller on an isolated copy of the scenario; results come
/// back in the order of opts.controllers.
std::vector<RunResult> compare(const config::ScenarioConfig& base, const CompareOptions& opts,
                               std::shared_ptr<const svm::SvmModel> model);

/// Trains a SAM model from cfg's label policy and SVM settings.
std::shared_ptr<const svm::SvmModel> train_model(const config::ScenarioConfig& cfg);

/// `<dir>/<controller>.csv` per run, plus `summary.csv` and `summary.txt`.
void write_outputs(const std::filesystem::path& dir, const std::vector<RunResult>& runs);

std::vector<metrics::RunSummary> summaries(const std::vector<RunResult>& runs);

}  // namespace samaqm::experiment
