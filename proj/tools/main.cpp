// samaqm: run, train, gen-dataset and compare subcommands.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "samaqm/config.hpp"
#include "samaqm/experiment.hpp"
#include "samaqm/io.hpp"
#include "samaqm/metrics.hpp"
#include "samaqm/sam.hpp"
#include "samaqm/svm.hpp"

namespace fs = std::filesystem;
using namespace samaqm;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string preset;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Flat key = value config file");
  cmd->add_option("--set", args.overrides, "Override a config key (key=value), repeatable");
  cmd->add_option("--preset", args.preset, "Scenario preset")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", args.seed, "Random seed (overrides config)");
}

config::ScenarioConfig load(const CommonArgs& args) {
  std::optional<fs::path> path;
  if (!args.config_path.empty()) path = args.config_path;
  const auto preset = args.preset.empty() ? config::Preset::None : config::parse_preset(args.preset);
  auto cfg = config::parse_config(path, args.overrides, preset);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int cmd_run(const CommonArgs& args, const std::string& out_dir) {
  const auto cfg = load(args);
  config::require_runnable(cfg);
  std::shared_ptr<const svm::SvmModel> model;
  // Load before simulating so a bad model never produces partial output.
  if (cfg.controller == "sam")
    model = std::make_shared<const svm::SvmModel>(svm::load_model(cfg.sam_model_path));
  std::vector<experiment::RunResult> runs;
  runs.push_back(experiment::run_scenario(cfg, cfg.controller, model));
  experiment::write_outputs(out_dir, runs);
  std::cout << metrics::format_summary_table(experiment::summaries(runs));
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& out_path, std::optional<std::size_t> n) {
  auto cfg = load(args);
  if (n) cfg.train_n = *n;
  RngStream rng(cfg.seed, "sam/train");
  const auto report = sam::train_sam(cfg.svm, cfg.policy, cfg.train_n, rng, out_path);
  std::printf("dataset size:        %zu\n", report.samples);
  std::printf("class balance:       %zu drop / %zu enqueue (%.1f%% drop)\n", report.positives,
              report.samples - report.positives,
              100.0 * static_cast<double>(report.positives) / static_cast<double>(report.samples));
  std::printf("training accuracy:   %.2f%%\n", 100.0 * report.accuracy);
  std::printf("support vectors:     %zu\n", report.support_vectors);
  std::printf("model written to:    %s\n", out_path.c_str());
  return 0;
}

int cmd_gen_dataset(const CommonArgs& args, const std::string& out_path, std::optional<std::size_t> n) {
  auto cfg = load(args);
  if (n) cfg.train_n = *n;
  RngStream rng(cfg.seed, "sam/dataset");
  const auto data = sam::gen_dataset(cfg.train_n, cfg.policy, rng);
  write_file_atomic(out_path, sam::format_dataset_csv(data));
  std::size_t pos = 0;
  for (const auto& s : data) pos += s.y > 0;
  std::printf("wrote %zu samples to %s: %zu drop / %zu enqueue\n", data.size(), out_path.c_str(), pos,
              data.size() - pos);
  return 0;
}

int cmd_compare(const CommonArgs& args, const std::string& out_dir, const std::string& controllers,
                bool distinct_seeds, bool sequential) {
  const auto cfg = load(args);
  experiment::CompareOptions opts;
  opts.controllers = split_list(controllers);
  opts.distinct_seeds = distinct_seeds;
  opts.parallel = !sequential;

  std::shared_ptr<const svm::SvmModel> model;
  if (std::find(opts.controllers.begin(), opts.controllers.end(), "sam") != opts.controllers.end()) {
    if (!cfg.sam_model_path.empty()) {
      model = std::make_shared<const svm::SvmModel>(svm::load_model(cfg.sam_model_path));
    } else {
      model = experiment::train_model(cfg);
      fs::create_directories(out_dir);
      svm::save_model(*model, fs::path(out_dir) / "sam_model.txt");
    }
  }
  const auto runs = experiment::compare(cfg, opts, model);
  experiment::write_outputs(out_dir, runs);
  std::cout << metrics::format_summary_table(experiment::summaries(runs));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active queue management simulator: RED, Blue, PI and SVM-based SAM"};
  app.require_subcommand(1);

  CommonArgs run_args, train_args, data_args, cmp_args;
  std::string run_out = "out", train_out = "sam_model.txt", data_out = "dataset.csv", cmp_out = "out";
  std::optional<std::size_t> train_n, data_n;
  std::string controllers = "red,blue,pi,sam";
  bool distinct_seeds = false, sequential = false;

  auto* run = app.add_subcommand("run", "Simulate one controller on the dumbbell scenario");
  add_common(run, run_args);
  run->add_option("--out", run_out, "Output directory");

  auto* train = app.add_subcommand("train", "Generate a labeled dataset and train a SAM model");
  add_common(train, train_args);
  train->add_option("--out", train_out, "Model file to write");
  train->add_option("--n", train_n, "Dataset size (train.n)");

  auto* gen = app.add_subcommand("gen-dataset", "Write a labeled buffer-utilization dataset");
  add_common(gen, data_args);
  gen->add_option("--out", data_out, "CSV file to write");
  gen->add_option("--n", data_n, "Dataset size (train.n)");

  auto* cmp = app.add_subcommand("compare", "Run several controllers on one scenario");
  add_common(cmp, cmp_args);
  cmp->add_option("--out", cmp_out, "Output directory");
  cmp->add_option("--controllers", controllers, "Comma-separated controller list");
  cmp->add_flag("--distinct-seeds", distinct_seeds, "Give each controller its own seed");
  cmp->add_flag("--sequential", sequential, "Run controllers one after another");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return cmd_run(run_args, run_out);
    if (train->parsed()) return cmd_train(train_args, train_out, train_n);
    if (gen->parsed()) return cmd_gen_dataset(data_args, data_out, data_n);
    if (cmp->parsed()) return cmd_compare(cmp_args, cmp_out, controllers, distinct_seeds, sequential);
  } catch (const std::exception& e) {
    std::cerr << "samaqm: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
