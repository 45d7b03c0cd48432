#include <benchmark/benchmark.h>

#include <memory>

#include "samaqm/config.hpp"
#include "samaqm/experiment.hpp"
#include "samaqm/sam.hpp"
#include "samaqm/sim.hpp"
#include "samaqm/svm.hpp"

using namespace samaqm;

namespace {

std::vector<svm::Sample> dataset(std::size_t n) {
  RngStream rng(1, "bench/data");
  return sam::gen_dataset(n, sam::LabelPolicy{}, rng);
}

void BM_SmoTrain(benchmark::State& state) {
  const auto data = dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    RngStream rng(1, "bench/smo");
    benchmark::DoNotOptimize(svm::smo_train(data, svm::TrainConfig{}, rng));
  }
}
BENCHMARK(BM_SmoTrain)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

// Per-arrival cost of SAM: one kernel evaluation per support vector.
void BM_DecisionValue(benchmark::State& state) {
  RngStream rng(1, "bench/smo");
  const auto model = svm::smo_train(dataset(2000), svm::TrainConfig{}, rng).model;
  RngStream probe(2, "bench/probe");
  svm::Features x;
  for (double& v : x) v = probe.uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(svm::decision_value(model, x));
    x[0] = x[4];
  }
  state.counters["support_vectors"] = static_cast<double>(model.support_vectors.size());
}
BENCHMARK(BM_DecisionValue);

void BM_SchedulerDispatch(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    sim::Scheduler s;
    RngStream rng(3, "bench/sched");
    std::int64_t fired = 0;
    for (std::int64_t i = 0; i < n; ++i)
      s.schedule(rng.uniform(0.0, 100.0), sim::EventKind::TimerFire, [&fired] { ++fired; });
    s.run_until(100.0);
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SchedulerDispatch)->Arg(1 << 12)->Arg(1 << 16);

void BM_DeskRun(benchmark::State& state, const char* controller) {
  config::ScenarioConfig cfg;
  config::apply_preset(cfg, config::Preset::Desk);
  cfg.train_n = 500;
  std::shared_ptr<const svm::SvmModel> model;
  if (std::string_view(controller) == "sam") model = experiment::train_model(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(experiment::run_scenario(cfg, controller, model).totals);
}
BENCHMARK_CAPTURE(BM_DeskRun, red, "red")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_DeskRun, blue, "blue")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_DeskRun, pi, "pi")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_DeskRun, sam, "sam")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
