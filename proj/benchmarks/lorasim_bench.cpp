#include <benchmark/benchmark.h>

#include <cstdint>
#include <numeric>
#include <vector>

#include "lorasim/codec/frame.hpp"
#include "lorasim/codec/reassembly.hpp"
#include "lorasim/radio/params.hpp"
#include "lorasim/scenario/presets.hpp"
#include "lorasim/scenario/simulation.hpp"

using namespace lorasim;

namespace {

std::vector<std::uint8_t> payload(std::size_t n) {
  std::vector<std::uint8_t> p(n);
  std::iota(p.begin(), p.end(), std::uint8_t{0});
  return p;
}

}  // namespace

static void BM_Airtime(benchmark::State& state) {
  radio::RadioParams p;
  std::size_t len = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(radio::airtime(p, len));
    len = (len + 1) % 256;
  }
}
BENCHMARK(BM_Airtime);

static void BM_EncodeMessage(benchmark::State& state) {
  const auto p = payload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto frames = codec::encode_message(codec::FrameKind::kData, 1, 2, 7, p);
    benchmark::DoNotOptimize(frames);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_EncodeMessage)->Arg(100)->Arg(10 << 10)->Arg(1 << 20);

static void BM_FrameRoundTrip(benchmark::State& state) {
  const auto frames = codec::encode_message(codec::FrameKind::kData, 1, 2, 7, payload(180));
  for (auto _ : state) {
    const auto wire = codec::encode_frame(frames.front());
    benchmark::DoNotOptimize(codec::decode_frame(wire));
  }
}
BENCHMARK(BM_FrameRoundTrip);

static void BM_Reassemble(benchmark::State& state) {
  const auto frames =
      codec::encode_message(codec::FrameKind::kData, 1, 2, 7, payload(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    codec::ReassemblySet set;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      benchmark::DoNotOptimize(set.accept_fragment(*it, SimTime(0)));
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Reassemble)->Arg(10 << 10)->Arg(1 << 20);

static void BM_ScenarioHour(benchmark::State& state) {
  auto cfg = scenario::preset("baseline-5-node");
  cfg.duration = std::chrono::hours(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scenario::run_scenario(cfg));
  }
}
BENCHMARK(BM_ScenarioHour)->Unit(benchmark::kMillisecond);

static void BM_ScenarioDay(benchmark::State& state) {
  const auto cfg = scenario::preset("failover-imagesize");
  for (auto _ : state) {
    benchmark::DoNotOptimize(scenario::run_scenario(cfg));
  }
}
BENCHMARK(BM_ScenarioDay)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
