#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "lorasim/scenario/config.hpp"
#include "lorasim/scenario/presets.hpp"

namespace lorasim::scenario {
namespace {

using std::chrono::minutes;
using std::chrono::seconds;

ConfigError parse_error(const std::string& text) {
  try {
    parse_scenario_text(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a ConfigError for:\n" << text;
  return ConfigError("none");
}

TEST(Config, EmptyDocumentUsesDefaults) {
  const auto c = parse_scenario_text("");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.duration, std::chrono::hours(24));
  EXPECT_EQ(c.nodes.size(), 5u);
  EXPECT_EQ(c.radio, radio::RadioParams{});
  EXPECT_EQ(c.metrics.interval, minutes(5));
  EXPECT_EQ(c.cluster.offline_timeout, seconds(90));
  ASSERT_EQ(c.services.size(), 2u);
  EXPECT_EQ(c.services[0].spec.id, "influxdb");
  EXPECT_EQ(c.services[0].placement.primary, 0);
  EXPECT_EQ(c.services[0].placement.fallbacks, (std::vector<NodeId>{1, 2}));
  EXPECT_FALSE(c.sync.enabled);
}

TEST(Config, MinimalFileOverridesOnlyGivenKeys) {
  const auto c = parse_scenario_text(
      "seed: 9\n"
      "radio:\n"
      "  spreading_factor: 9\n"
      "  coding_rate: 4/8\n"
      "metrics:\n"
      "  interval: 10m\n"
      "  start_offsets: synchronized\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.radio.spreading_factor, 9);
  EXPECT_EQ(c.radio.coding_rate_denominator, 8);
  EXPECT_EQ(c.radio.bandwidth_hz, 125'000u);
  EXPECT_EQ(c.metrics.interval, minutes(10));
  EXPECT_EQ(c.offset_mode, OffsetMode::kSynchronized);
  EXPECT_EQ(c.metrics.payload_bytes, 256u);
}

TEST(Config, FullSchema) {
  const auto c = parse_scenario_text(R"(
name: demo
duration: 6h
radio: {bandwidth: 250000, tx_power_dbm: 5, crc: false}
channel: {path_loss_exponent: 3.0, shadowing_sigma_db: 0, frame_loss: 0.05, capture: false, duty_cycle: 0.1}
nodes:
  - {id: 1, position: [0, 0]}
  - {id: 2, position: [5, 0, 1]}
  - {id: 3, position: [0, 5], reports_metrics: false}
metrics:
  start_offsets: {1: 0s, 2: 30s}
  payload_bytes: 128
transport: {max_retries: 3, gap_timeout_floor: 1s}
cluster: {heartbeat_interval: 20s, offline_timeout: 60s, suspect_timeout: 40s}
services:
  - id: db
    image_size_mb: 8.83
    start_time: {uniform: [1s, 2s]}
    primary: 1
    fallbacks: [2, 3]
faults:
  - {at: 1h, kill_node: 1}
  - {at: 2h, revive_node: 1}
  - {at: 3h, kill_service: db}
sync: {publisher: 2, interval: 30m}
outputs: {latency: lat.csv}
)");
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.radio.bandwidth_hz, 250'000u);
  EXPECT_FALSE(c.radio.crc_enabled);
  EXPECT_FALSE(c.channel.capture_enabled);
  EXPECT_EQ(c.channel.duty_budget_num * 10, c.channel.duty_budget_den);
  EXPECT_EQ(c.nodes.size(), 3u);
  EXPECT_FALSE(c.nodes[2].reports_metrics);
  EXPECT_EQ(c.nodes[1].z, 1.0);
  EXPECT_EQ(c.offset_mode, OffsetMode::kExplicit);
  EXPECT_EQ(c.start_offsets().at(2), seconds(30));
  EXPECT_FALSE(c.start_offsets().contains(3));
  EXPECT_EQ(c.services.at(0).spec.start_time.kind, cluster::StartTimeModel::Kind::kUniform);
  EXPECT_EQ(c.faults.size(), 3u);
  EXPECT_EQ(c.faults[2].kind, FaultEvent::Kind::kKillService);
  EXPECT_TRUE(c.sync.enabled);
  EXPECT_EQ(c.sync.publisher, 2);
  EXPECT_EQ(c.outputs.latency, "lat.csv");
  EXPECT_EQ(c.outputs.summary, "summary.json");
}

TEST(Config, StaggeredOffsetsSpreadAcrossInterval) {
  auto c = parse_scenario_text("");
  const auto off = c.start_offsets();
  EXPECT_EQ(off.at(0), Duration(0));
  EXPECT_EQ(off.at(1), minutes(1));
  EXPECT_EQ(off.at(4), minutes(4));
}

TEST(Config, UnknownKeyReportsLine) {
  const auto e = parse_error("seed: 1\nradio:\n  spreading_factr: 9\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.column(), 3);
  EXPECT_NE(std::string(e.what()).find("test.yaml:3:3"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("spreading_factr"), std::string::npos);
}

TEST(Config, UnknownTopLevelKey) {
  EXPECT_EQ(parse_error("seed: 1\nwat: 2\n").line(), 2);
}

TEST(Config, OutOfRangeScalarReportsLine) {
  const auto e = parse_error("radio:\n  spreading_factor: 13\n");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("spreading_factor"), std::string::npos);
  EXPECT_EQ(parse_error("radio:\n  bandwidth: 200000\n").line(), 2);
  EXPECT_EQ(parse_error("metrics:\n  interval: soon\n").line(), 2);
}

TEST(Config, OffsetAtOrBeyondIntervalRejected) {
  const auto e = parse_error("metrics:\n  interval: 5m\n  start_offsets: {0: 5m}\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("start_offsets"), std::string::npos);
  EXPECT_NO_THROW(parse_scenario_text("metrics:\n  start_offsets: {0: 299s}\n"));
}

TEST(Config, LayoutErrorsPointAtServices) {
  const auto e = parse_error("services:\n  - {id: db, primary: 0, fallbacks: [0]}\n");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("primary"), std::string::npos);
  EXPECT_EQ(parse_error("services:\n  - {id: db, primary: 0, fallbacks: []}\n").line(), 2);
  EXPECT_EQ(parse_error("services:\n  - {id: db, primary: 0, fallbacks: [1, 1]}\n").line(), 2);
}

TEST(Config, FaultErrors) {
  EXPECT_EQ(parse_error("faults:\n  - {at: 1h, kill_service: nope}\n").line(), 2);
  EXPECT_EQ(parse_error("faults:\n  - {at: 1h, kill_node: 1, revive_node: 1}\n").line(), 2);
  EXPECT_EQ(parse_error("duration: 1h\nfaults:\n  - {at: 2h, kill_node: 1}\n").line(), 3);
}

TEST(Config, CrossFieldInvariants) {
  EXPECT_EQ(parse_error("cluster:\n  heartbeat_interval: 2m\n").line(), 2);
  EXPECT_EQ(parse_error("channel:\n  frame_loss: 1.0\n").line(), 2);
  EXPECT_EQ(parse_error("nodes:\n  - {id: 0, position: [0, 0]}\n  - {id: 0, position: [1, 0]}\n").line(), 2);
  EXPECT_EQ(parse_error("nodes:\n  - {id: 0, position: [0, 0]}\n  - {id: 1, position: [0, 0]}\n").line(), 2);
}

TEST(Config, SyntaxErrorHasPosition) {
  const auto e = parse_error("radio: [1, 2\n");
  EXPECT_GE(e.line(), 1);
}

TEST(Config, PresetKeyAndBase) {
  const auto c = parse_scenario_text("preset: bw-500k\nseed: 4\n");
  EXPECT_EQ(c.radio.bandwidth_hz, 500'000u);
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(parse_error("preset: nope\n").line(), 1);
  const auto based = parse_scenario_text("seed: 5\n", "x", preset("cr-4-8"));
  EXPECT_EQ(based.radio.coding_rate_denominator, 8);
}

TEST(Config, ReadsFile) {
  const auto path = std::filesystem::temp_directory_path() / "lorasim_config_test.yaml";
  std::ofstream(path) << "seed: 77\n";
  EXPECT_EQ(parse_scenario(path.string()).seed, 77u);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_scenario(path.string()), ConfigError);
}

TEST(Presets, AllValidateAndDiffer) {
  const auto names = preset_names();
  for (const char* want : {"baseline-4-node", "interval-10min", "bw-500k", "cr-4-8", "power-5dbm",
                           "failover-imagesize", "baseline-5-node", "sync-start-4-node", "failover-basic"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  for (const auto& n : names) EXPECT_NO_THROW(preset(n).validate()) << n;
  EXPECT_THROW(preset("nope"), std::out_of_range);

  const auto base = preset("baseline-4-node");
  EXPECT_EQ(preset("bw-500k").radio.bandwidth_hz, 500'000u);
  EXPECT_EQ(preset("cr-4-8").radio.coding_rate_denominator, 8);
  EXPECT_EQ(preset("power-5dbm").radio.tx_power_dbm, 5);
  EXPECT_EQ(preset("interval-10min").metrics.interval, 2 * base.metrics.interval);
  EXPECT_EQ(preset("sync-start-4-node").offset_mode, OffsetMode::kSynchronized);
  EXPECT_EQ(base.offset_mode, OffsetMode::kStaggered);
  std::size_t reporters = 0;
  for (const auto& n : base.nodes) reporters += n.reports_metrics;
  EXPECT_EQ(reporters, 4u);
}

TEST(Presets, ImageSizePresetSpansThreeSizes) {
  const auto c = preset("failover-imagesize");
  std::set<double> sizes;
  for (const auto& s : c.services) sizes.insert(s.spec.image_size_mb);
  EXPECT_TRUE(sizes.contains(8.83));
  EXPECT_TRUE(sizes.contains(339.0));
  EXPECT_TRUE(sizes.contains(5470.0));
  EXPECT_FALSE(c.faults.empty());
}

}  // namespace
}  // namespace lorasim::scenario
