#include "samaqm/experiment.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

#include "samaqm/io.hpp"
#include "samaqm/sam.hpp"
#include "samaqm/transport.hpp"

namespace samaqm::experiment {

std::unique_ptr<aqm::AqmController> make_controller(const config::ScenarioConfig& cfg,
                                                    std::string_view name, std::uint64_t seed,
                                                    std::shared_ptr<const svm::SvmModel> model) {
  RngStream rng(seed, "aqm/" + std::string(name));
  if (name == "droptail") return std::make_unique<aqm::DropTailController>();
  if (name == "red")
    return std::make_unique<aqm::RedController>(cfg.red_params(), cfg.buffer_packets, rng);
  if (name == "blue") return std::make_unique<aqm::BlueController>(cfg.blue, rng);
  if (name == "pi") return std::make_unique<aqm::PiController>(cfg.pi_params(), rng);
  if (name == "sam") return std::make_unique<sam::SamController>(std::move(model));
  throw std::invalid_argument("unknown controller '" + std::string(name) + "'");
}

RunResult run_scenario(const config::ScenarioConfig& cfg, std::string_view name,
                       std::shared_ptr<const svm::SvmModel> model) {
  sim::LinkConfig link{cfg.bandwidth_bps, cfg.buffer_packets};
  sim::Simulator sim(link, make_controller(cfg, name, cfg.seed, std::move(model)));

  RunResult out{std::string(name), cfg.seed, metrics::MetricsLog(cfg.duration_s), {}, {}};
  metrics::MetricsRecorder recorder(sim, out.log, cfg.sample_interval_s);
  transport::TrafficModel traffic(sim, cfg.traffic_mix(), cfg.seed);

  out.totals = sim.run_until(cfg.duration_s);
  out.log.finish(cfg.duration_s);
  out.summary = metrics::summary(out.log, name, sim.queue_state());
  return out;
}

RunResult run_scenario(const config::ScenarioConfig& cfg) {
  config::require_runnable(cfg);
  std::shared_ptr<const svm::SvmModel> model;
  if (cfg.controller == "sam")
    model = std::make_shared<const svm::SvmModel>(svm::load_model(cfg.sam_model_path));
  return run_scenario(cfg, cfg.controller, std::move(model));
}

std::vector<RunResult> compare(const config::ScenarioConfig& base, const CompareOptions& opts,
                               std::shared_ptr<const svm::SvmModel> model) {
  if (opts.controllers.size() < 2) throw std::invalid_argument("compare needs at least two controllers");
  std::set<std::string> unique(opts.controllers.begin(), opts.controllers.end());
  if (unique.size() != opts.controllers.size())
    throw std::invalid_argument("compare: controller listed twice");
  for (const auto& c : opts.controllers) {
    if (std::find(config::kControllers.begin(), config::kControllers.end(), c) ==
        config::kControllers.end())
      throw std::invalid_argument("unknown controller '" + c + "'");
    if (c == "sam" && !model) throw std::invalid_argument("compare: sam requires a model");
  }

  const std::size_t n = opts.controllers.size();
  std::vector<std::optional<RunResult>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  auto job = [&](std::size_t i) {
    try {
      config::ScenarioConfig cfg = base;
      if (opts.distinct_seeds) cfg.seed = mix64(base.seed + i);
      slots[i].emplace(run_scenario(cfg, opts.controllers[i], model));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (opts.parallel) {
    std::vector<std::jthread> workers;
    workers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) workers.emplace_back(job, i);
  } else {
    for (std::size_t i = 0; i < n; ++i) job(i);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<RunResult> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::shared_ptr<const svm::SvmModel> train_model(const config::ScenarioConfig& cfg) {
  RngStream rng(cfg.seed, "sam/train");
  auto report = sam::train_sam(cfg.svm, cfg.policy, cfg.train_n, rng);
  return std::make_shared<const svm::SvmModel>(std::move(report.result.model));
}

std::vector<metrics::RunSummary> summaries(const std::vector<RunResult>& runs) {
  std::vector<metrics::RunSummary> rows;
  rows.reserve(runs.size());
  for (const auto& r : runs) rows.push_back(r.summary);
  return rows;
}

void write_outputs(const std::filesystem::path& dir, const std::vector<RunResult>& runs) {
  std::filesystem::create_directories(dir);
  for (const auto& r : runs) metrics::export_csv(r.log, dir / (r.controller + ".csv"));
  const auto rows = summaries(runs);
  write_file_atomic(dir / "summary.csv", metrics::format_summary_csv(rows));
  write_file_atomic(dir / "summary.txt", metrics::format_summary_table(rows));
}

}  // namespace samaqm::experiment
