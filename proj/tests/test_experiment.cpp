#include <doctest.h>

#include <filesystem>

#include "samaqm/experiment.hpp"
#include "samaqm/io.hpp"

using namespace samaqm;
using namespace samaqm::experiment;

namespace {

config::ScenarioConfig small() {
  config::ScenarioConfig cfg;
  config::apply_preset(cfg, config::Preset::Desk);
  cfg.duration_s = 15.0;
  cfg.train_n = 300;
  return cfg;
}

}  // namespace

TEST_CASE("every controller conserves packets") {
  const auto cfg = small();
  const auto model = train_model(cfg);
  for (const auto& name : config::kControllers) {
    const auto r = run_scenario(cfg, name, model);
    CHECK(r.totals.conserved());
    CHECK(r.summary.conserved());
    CHECK(r.summary.controller == name);
    CHECK(r.log.series().size() == 15);
    CHECK(r.totals.arrivals > 0);
  }
}

TEST_CASE("a run is a pure function of its config") {
  const auto cfg = small();
  const auto a = run_scenario(cfg, "red");
  const auto b = run_scenario(cfg, "red");
  CHECK(a.totals == b.totals);
  CHECK(metrics::format_csv(a.log) == metrics::format_csv(b.log));
  auto other = cfg;
  other.seed = 2;
  CHECK(!(run_scenario(other, "red").totals == a.totals));
}

TEST_CASE("run_scenario by config checks runnability") {
  auto cfg = small();
  CHECK_THROWS_AS(run_scenario(cfg), config::MissingKeyError);
  cfg.controller = "sam";
  CHECK_THROWS_AS(run_scenario(cfg), config::MissingKeyError);
  cfg.controller = "blue";
  CHECK(run_scenario(cfg).controller == "blue");
  CHECK_THROWS_AS(make_controller(cfg, "codel", 1, nullptr), std::invalid_argument);
}

TEST_CASE("compare shares the traffic seed unless asked otherwise") {
  const auto cfg = small();
  CompareOptions opts;
  opts.controllers = {"droptail", "red", "blue"};
  const auto runs = compare(cfg, opts, nullptr);
  REQUIRE(runs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(runs[i].controller == opts.controllers[i]);
    CHECK(runs[i].seed == cfg.seed);
  }
  // Same result sequentially as in parallel.
  opts.parallel = false;
  const auto seq = compare(cfg, opts, nullptr);
  for (std::size_t i = 0; i < 3; ++i) CHECK(seq[i].totals == runs[i].totals);

  opts.distinct_seeds = true;
  const auto distinct = compare(cfg, opts, nullptr);
  CHECK(distinct[0].seed != distinct[1].seed);
  CHECK(distinct[1].seed != distinct[2].seed);
}

TEST_CASE("compare rejects bad controller lists") {
  const auto cfg = small();
  CompareOptions opts;
  opts.controllers = {"red"};
  CHECK_THROWS_AS(compare(cfg, opts, nullptr), std::invalid_argument);
  opts.controllers = {"red", "red"};
  CHECK_THROWS_AS(compare(cfg, opts, nullptr), std::invalid_argument);
  opts.controllers = {"red", "codel"};
  CHECK_THROWS_AS(compare(cfg, opts, nullptr), std::invalid_argument);
  opts.controllers = {"red", "sam"};
  CHECK_THROWS_AS(compare(cfg, opts, nullptr), std::invalid_argument);
}

TEST_CASE("write_outputs lays out one CSV per controller plus summaries") {
  const auto cfg = small();
  CompareOptions opts;
  opts.controllers = {"droptail", "pi"};
  const auto runs = compare(cfg, opts, nullptr);
  const auto dir = std::filesystem::temp_directory_path() / "samaqm_outputs";
  std::filesystem::remove_all(dir);
  write_outputs(dir, runs);
  CHECK(std::filesystem::exists(dir / "droptail.csv"));
  CHECK(std::filesystem::exists(dir / "pi.csv"));
  CHECK(read_file(dir / "summary.csv") == metrics::format_summary_csv(summaries(runs)));
  CHECK(read_file(dir / "summary.txt") == metrics::format_summary_table(summaries(runs)));
  std::filesystem::remove_all(dir);
}
