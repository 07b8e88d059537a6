#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "lorasim/metrics/metrics.hpp"
#include "lorasim/sim/rng.hpp"

namespace lorasim::metrics {
namespace {

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

MetricsPacket sample_packet() {
  MetricsPacket p;
  p.source = 2;
  p.sequence = 17;
  p.origin = SimTime(1'500'000);
  p.cpu_percent = 23.5;
  p.memory_percent = 41.25;
  p.running_services = {"grafana", "influxdb"};
  p.hops = 1;
  return p;
}

TEST(MetricsCodec, TextLayout) {
  const auto wire = encode_metrics(sample_packet());
  EXPECT_EQ(std::string(wire.begin(), wire.end()), "M1;2;17;1500000;1;23.50;41.25;grafana,influxdb;");
}

TEST(MetricsCodec, PaddingAndRoundTrip) {
  const auto p = sample_packet();
  const auto wire = encode_metrics(p, 256);
  EXPECT_EQ(wire.size(), 256u);
  EXPECT_EQ(decode_metrics(wire), p);
  EXPECT_EQ(encode_metrics(p, 10).size(), encode_metrics(p).size());
}

TEST(MetricsCodec, EmptyServices) {
  auto p = sample_packet();
  p.running_services.clear();
  EXPECT_EQ(decode_metrics(encode_metrics(p, 64)), p);
}

TEST(MetricsCodec, RejectsMalformed) {
  for (const char* bad : {"", "M2;1;1;1;0;1.00;1.00;;", "M1;1;1;1;0;1.00;1.00;", "M1;x;1;1;0;1.00;1.00;;",
                          "M1;300;1;1;0;1.00;1.00;;", "M1;1;1;1;0;cpu;1.00;;", "M1;1;1;1;0;1.00;1.00;;..x",
                          "M1;1;-1;1;0;1.00;1.00;;"}) {
    EXPECT_THROW(decode_metrics(bytes(bad)), std::invalid_argument) << bad;
  }
}

TEST(MetricsSampling, GaugesStayInModelRange) {
  sim::RngStream rng(4);
  LoadModel load;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const auto p = sample_metrics(1, i, SimTime(i), load, rng, {});
    EXPECT_GE(p.cpu_percent, 10.0);
    EXPECT_LE(p.cpu_percent, 30.0);
    EXPECT_GE(p.memory_percent, 35.0);
    EXPECT_LE(p.memory_percent, 45.0);
  }
}

TEST(Ingestor, IdempotentOnSourceAndSequence) {
  Ingestor ing;
  const auto p = sample_packet();
  const auto r = ing.ingest(p, SimTime(2'000'000), 0);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->latency(), Duration(500'000));
  EXPECT_FALSE(ing.ingest(p, SimTime(3'000'000), 1));
  EXPECT_EQ(ing.duplicates(), 1u);
  EXPECT_EQ(ing.records().size(), 1u);
  EXPECT_TRUE(ing.seen(2, 17));
  EXPECT_THROW(ing.ingest(sample_packet(), SimTime(1), 0), std::invalid_argument);
}

TEST(Ingestor, LineProtocol) {
  Ingestor ing;
  ing.ingest(sample_packet(), SimTime(2'000'000), 0);
  std::ostringstream os;
  ing.store().write(os);
  EXPECT_EQ(os.str(),
            "node_metrics,node=2,ingestor=0 cpu=23.50,mem=41.25,seq=17i,latency_us=500000i,"
            "services=\"grafana,influxdb\" 1500000000\n");
}

TEST(PacketLedger, ConservationThroughCopies) {
  PacketLedger l;
  l.sampled({1, 0});
  l.sampled({1, 1});
  l.sampled({1, 2});
  EXPECT_EQ(l.in_flight_count(), 3u);

  l.ingested({1, 0});
  l.copy_dropped({1, 0});

  l.copy_created({1, 1});
  l.copy_dropped({1, 1});
  EXPECT_EQ(l.lost_count(), 0u);
  l.copy_dropped({1, 1});
  EXPECT_EQ(l.lost_count(), 1u);

  EXPECT_EQ(l.sampled_count(), l.ingested_count() + l.lost_count() + l.in_flight_count());
  EXPECT_EQ(l.in_flight_count(), 1u);
}

TEST(PacketLedger, RejectsInconsistentEvents) {
  PacketLedger l;
  EXPECT_THROW(l.copy_created({0, 0}), std::logic_error);
  EXPECT_THROW(l.ingested({0, 0}), std::logic_error);
  l.sampled({0, 0});
  EXPECT_THROW(l.sampled({0, 0}), std::logic_error);
  l.copy_dropped({0, 0});
  EXPECT_THROW(l.copy_dropped({0, 0}), std::logic_error);
  EXPECT_THROW(l.ingested({0, 0}), std::logic_error);
}

TEST(PacketLedger, DoubleIngestCountsOnce) {
  PacketLedger l;
  l.sampled({0, 0});
  l.copy_created({0, 0});
  l.ingested({0, 0});
  l.ingested({0, 0});
  EXPECT_EQ(l.ingested_count(), 1u);
}

}  // namespace
}  // namespace lorasim::metrics
