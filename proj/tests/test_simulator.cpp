#include "doctest.h"
#include "vrucp/errors.hpp"
#include "vrucp/simulator.hpp"

using namespace vrucp;
using namespace vrucp::sim;

namespace {

io::TrajectoryTable scattered(std::int64_t k, double seconds, double rate) {
  std::vector<VruState> states;
  const int frames = static_cast<int>(seconds * rate);
  for (int f = 0; f < frames; ++f) {
    for (std::int64_t v = 1; v <= k; ++v) {
      VruState s;
      s.id = VruId{v};
      s.timestamp = f / rate;
      s.position = {static_cast<double>(v) * 20.0, 0.0};
      states.push_back(s);
    }
  }
  return io::TrajectoryTable::from_states(states, rate);
}

io::TrajectoryTable four_groups() {
  io::ScenarioSpec spec;
  spec.frame_rate = 10.0;
  for (int g = 0; g < 4; ++g) {
    spec.groups.push_back(io::GroupSpec{static_cast<std::size_t>(3 + g), 0.5, {0.0, 8.0 * g}, {1.0, 0.0}, 0.0, 30.0});
  }
  spec.walkers.push_back(io::WalkerSpec{{0, -20}, {1.3, 0}, 0.0, 30.0});
  return io::synth_scenario(spec, 4);
}

SimReport constant_report(std::vector<std::pair<cpm::Policy, std::int64_t>> rates, int seconds) {
  SimReport r;
  for (const auto& [policy, bytes] : rates) {
    PolicyResult pr;
    pr.policy = policy;
    for (int s = 0; s < seconds; ++s) pr.series.push_back({s, bytes, 2});
    r.policies.push_back(pr);
  }
  return r;
}

}  // namespace

TEST_CASE("no-cluster bytes are linear in the VRU count") {
  const auto table = scattered(3, 4.0, 10.0);
  SimConfig config;
  config.policies = {cpm::Policy::kNoCluster};
  const auto report = run_simulation(table, config);
  REQUIRE(report.policies.size() == 1);
  const auto& series = report.policies[0].series;
  REQUIRE(series.size() == 4);
  for (const auto& bin : series) {
    CHECK(bin.messages == 2);
    CHECK(bin.bytes == 2 * (60 + 3 * 35));
  }
  CHECK(report.clusters.empty());
}

TEST_CASE("an empty table gives an empty, all-zero report") {
  const auto report = run_simulation(io::TrajectoryTable{}, SimConfig{});
  CHECK(report.policies.size() == 6);
  for (const auto& pr : report.policies) {
    CHECK(pr.total_bytes == 0);
    for (const auto& b : pr.series) CHECK(b.bytes == 0);
  }
  const auto summary = summarize(report);
  for (const auto& row : summary.rows) CHECK(row.bytes_per_second.median == 0.0);
}

TEST_CASE("grouped walkers: clustering lowers the median and never costs bytes") {
  const auto table = four_groups();
  const auto report = run_simulation(table, SimConfig{});
  REQUIRE(report.clusters.size() == 4);
  const auto summary = summarize(report);
  const auto& baseline = report.policies[0];
  REQUIRE(baseline.policy == cpm::Policy::kNoCluster);
  for (std::size_t i = 1; i < report.policies.size(); ++i) {
    const auto& pr = report.policies[i];
    REQUIRE(pr.series.size() == baseline.series.size());
    for (std::size_t s = 0; s < pr.series.size(); ++s) CHECK(pr.series[s].bytes <= baseline.series[s].bytes);
    REQUIRE(summary.rows[i].reduction.has_value());
    CHECK(*summary.rows[i].reduction > 0.0);
  }
  CHECK(summary.rows[5].policy == cpm::Policy::kAdaptive);
  CHECK(summary.rows[5].bytes_per_second.median < summary.rows[0].bytes_per_second.median);
}

TEST_CASE("stored evaluations respect the metric invariants") {
  const auto report = run_simulation(four_groups(), SimConfig{});
  REQUIRE(report.evaluations.size() % 4 == 0);
  REQUIRE_FALSE(report.evaluations.empty());
  for (std::size_t i = 0; i < report.evaluations.size(); i += 4) {
    const ShapeRecord* chosen = nullptr;
    const auto& poly = report.evaluations[i + 3];
    REQUIRE(poly.kind == geometry::ShapeKind::kPolygon);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& e = report.evaluations[i + k];
      CHECK(e.cluster_id == poly.cluster_id);
      CHECK(poly.ca >= e.ca);
      CHECK(e.cadi > 0);
      if (e.chosen_by_adaptive) {
        CHECK(chosen == nullptr);
        chosen = &e;
      }
    }
    REQUIRE(chosen != nullptr);
    CHECK(chosen->ca == poly.ca);
  }
  std::size_t counted = 0;
  for (const auto& [size, by_kind] : report.adaptive_choices) {
    for (const auto& [kind, n] : by_kind) counted += n;
  }
  CHECK(counted * 4 == report.evaluations.size());
}

TEST_CASE("runs are deterministic") {
  const auto table = four_groups();
  SimConfig config;
  config.seed = 42;
  const auto a = to_json(run_simulation(table, config)).dump();
  const auto b = to_json(run_simulation(table, config)).dump();
  CHECK(a == b);
}

TEST_CASE("summary statistics") {
  const auto third = summarize(constant_report({{cpm::Policy::kNoCluster, 300}, {cpm::Policy::kAdaptive, 100}}, 5));
  REQUIRE(third.rows[1].reduction.has_value());
  CHECK(*third.rows[1].reduction == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(third.rows[0].reduction.has_value());

  const auto same = summarize(constant_report({{cpm::Policy::kNoCluster, 300}, {cpm::Policy::kCircle, 300}}, 5));
  CHECK(*same.rows[1].reduction == 0.0);

  const auto alone = summarize(constant_report({{cpm::Policy::kNoCluster, 300}}, 5));
  CHECK(alone.rows.size() == 1);
  CHECK_FALSE(alone.rows[0].reduction.has_value());
}

TEST_CASE("quartiles and rank correlation") {
  // Reference values computed with NumPy (percentile) and SciPy (spearmanr).
  const auto q = quartiles({4, 1, 3, 2});
  CHECK(q.min == 1);
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q3 == doctest::Approx(3.25));
  CHECK(q.max == 4);
  CHECK(quartiles({}).median == 0.0);

  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{5, 6, 7, 8, 7};
  CHECK(*spearman(x, y) == doctest::Approx(0.8207826816681233));
  const std::vector<double> down{9, 7, 5, 3, 1};
  CHECK(*spearman(x, down) == doctest::Approx(-1.0));
  const std::vector<double> flat{2, 2, 2, 2, 2};
  CHECK_FALSE(spearman(x, flat).has_value());
  CHECK_FALSE(spearman(std::vector<double>{1}, std::vector<double>{1}).has_value());
}

TEST_CASE("configuration checks") {
  const auto table = scattered(2, 2.0, 10.0);
  SimConfig config;
  config.rate = 0.0;
  CHECK_THROWS_AS(run_simulation(table, config), ConfigError);
  config = {};
  config.policies.clear();
  CHECK_THROWS_AS(run_simulation(table, config), ConfigError);
  config = {};
  config.cpm.mode = metrics::SizeMode::kFull;
  CHECK_THROWS_AS(run_simulation(table, config), ConfigError);
  config.enforce_byte_bound = false;
  CHECK_NOTHROW(run_simulation(table, config));
  config = {};
  config.rate = 50.0;  // above the native 10 Hz
  CHECK_THROWS_AS(run_simulation(table, config), InvalidInputError);
}

TEST_CASE("event-triggered generation adds rounds for arriving VRUs") {
  io::ScenarioSpec spec;
  spec.frame_rate = 10.0;
  spec.walkers.push_back(io::WalkerSpec{{0, 0}, {1, 0}, 0.0, 5.0});
  spec.walkers.push_back(io::WalkerSpec{{0, 30}, {1, 0}, 1.3, 3.0});
  const auto table = io::synth_scenario(spec, 1);
  SimConfig config;
  config.policies = {cpm::Policy::kNoCluster};
  const auto fixed = run_simulation(table, config);
  config.generation = Generation::kEventTriggered;
  const auto event = run_simulation(table, config);
  CHECK(event.policies[0].message_count == fixed.policies[0].message_count + 1);
  CHECK(event.policies[0].series.size() == fixed.policies[0].series.size());
  CHECK(generation_from_string("event") == Generation::kEventTriggered);
  CHECK_THROWS_AS(generation_from_string("sometimes"), InvalidInputError);
}

TEST_CASE("report json carries provenance and recomputable medians") {
  const auto report = run_simulation(four_groups(), SimConfig{});
  const auto j = to_json(report);
  CHECK(j["provenance"]["dataset_hash"] == report.dataset_hash);
  CHECK(j["provenance"]["config"]["e"] == 1.5);
  CHECK(j["provenance"]["config"]["policies"].size() == 6);
  for (const auto& p : j["policies"]) {
    std::vector<double> bytes;
    for (const auto& row : p["series"]) bytes.push_back(row[1].get<double>());
    CHECK(quartiles(bytes).median == p["bytes_per_second"]["median"].get<double>());
  }
}
