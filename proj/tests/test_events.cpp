#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "trinet/error.hpp"
#include "trinet/events.hpp"

using namespace trinet;

namespace {

OutcomeDistribution fritz(double visibility = 1.0, double anticorrelation = 0.0) {
  return OutcomeDistribution(triangle_variables(), oracle::fritz_distribution(visibility, anticorrelation));
}

EventRecord photon(Party station, Source source, std::uint8_t bit, Picoseconds t) {
  return {t, station, static_cast<std::uint8_t>(2 * source_port(station, source) + bit), source};
}

TwoFold two(Source s, Picoseconds t, std::uint8_t x = 0, std::uint8_t y = 0) { return {s, t, {x, y}}; }

std::array<std::vector<TwoFold>, 3> by_source(std::vector<TwoFold> all) {
  std::array<std::vector<TwoFold>, 3> out;
  for (const auto& t : all) out[index(t.source)].push_back(t);
  return out;
}

PipelineConfig noiseless(double duration, std::uint64_t seed) {
  auto c = PipelineConfig::noiseless();
  c.duration = duration;
  c.chunk = 100.0;
  c.seed = seed;
  return c;
}

std::size_t source_events(const EventStreams& s, Party station, Source source) {
  return static_cast<std::size_t>(std::count_if(s.stations[index(station)].begin(), s.stations[index(station)].end(),
                                                [&](const EventRecord& e) { return e.source == source; }));
}

}  // namespace

TEST(Ports, StationWiringIsConsistent) {
  for (Party p : kParties)
    for (std::uint8_t port = 0; port < 2; ++port) {
      const Source s = port_source(p, port);
      EXPECT_EQ(source_port(p, s), port);
      const auto ends = endpoints(s);
      EXPECT_TRUE(ends[0] == p || ends[1] == p);
    }
  EXPECT_EQ(port_source(Party::A, 0), Source::AC);
  EXPECT_EQ(port_source(Party::C, 1), Source::BC);
  EXPECT_THROW(source_port(Party::A, Source::BC), DomainError);
}

TEST(Config, Validation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.w1 = c.w2;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.efficiency = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.dark_rate = -1.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(TwoFold, WindowDecidesCoincidence) {
  EventStreams s;
  s.stations[0] = {photon(Party::A, Source::AB, 1, 1'000'000)};
  s.stations[1] = {photon(Party::B, Source::AB, 0, 1'003'000)};
  const auto hit = twofold_coincidences(s, 4'100);
  ASSERT_EQ(hit[index(Source::AB)].size(), 1u);
  EXPECT_EQ(hit[index(Source::AB)][0].time, 1'000'000);
  EXPECT_EQ(hit[index(Source::AB)][0].bits, (std::array<std::uint8_t, 2>{1, 0}));
  s.stations[1][0].timestamp = 1'005'000;
  EXPECT_TRUE(twofold_coincidences(s, 4'100)[index(Source::AB)].empty());
}

TEST(TwoFold, GreedyEarliestFirstAndSingleUse) {
  EventStreams s;
  s.stations[0] = {photon(Party::A, Source::AB, 0, 0), photon(Party::A, Source::AB, 1, 2'000)};
  s.stations[1] = {photon(Party::B, Source::AB, 1, 1'000)};
  const auto t = twofold_coincidences(s, 4'100)[index(Source::AB)];
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].time, 0);
  EXPECT_EQ(t[0].bits[0], 0);
}

TEST(TwoFold, PortsOfOtherSourcesDoNotPair) {
  EventStreams s;
  s.stations[0] = {photon(Party::A, Source::AC, 0, 0)};
  s.stations[1] = {photon(Party::B, Source::AB, 0, 0)};
  for (const auto& list : twofold_coincidences(s, 4'100)) EXPECT_TRUE(list.empty());
}

TEST(TwoFold, UnsortedOrInconsistentInputIsRejected) {
  EventStreams s;
  s.stations[0] = {photon(Party::A, Source::AB, 0, 5'000), photon(Party::A, Source::AB, 0, 1'000)};
  EXPECT_THROW(twofold_coincidences(s, 4'100), DomainError);
  EventStreams wrong;
  wrong.stations[0] = {photon(Party::B, Source::AB, 0, 0)};
  EXPECT_THROW(twofold_coincidences(wrong, 4'100), DomainError);
}

TEST(TwoFold, WiderWindowNeverLosesCoincidences) {
  PipelineConfig c;
  c.duration = 20.0;
  const auto streams = synthesize(fritz(0.95, 3e-5), c);
  std::array<std::size_t, 3> previous{};
  for (Picoseconds w1 = 1'000; w1 <= 16 * kMicrosecond; w1 *= 2) {
    const auto t = twofold_coincidences(streams, w1);
    for (std::size_t s = 0; s < 3; ++s) {
      EXPECT_GE(t[s].size(), previous[s]) << w1;
      previous[s] = t[s].size();
    }
  }
}

TEST(SixFold, OnePerSourceInWindow) {
  const auto six = sixfold_coincidences(
      by_source({two(Source::AB, 100, 1, 0), two(Source::AC, 5'000, 1, 1), two(Source::BC, 19'000'000, 0, 1)}),
      20 * kMicrosecond);
  ASSERT_EQ(six.size(), 1u);
  // a = 2*a0 + a1 with a0 from AC and a1 from AB; b0 from BC, b1 from AB; c0 from AC, c1 from BC.
  EXPECT_EQ(six[0].a, 3);
  EXPECT_EQ(six[0].b, 0);
  EXPECT_EQ(six[0].c, 3);
}

TEST(SixFold, FirstTwoFoldOfARepeatedSourceIsKept) {
  const auto six = sixfold_coincidences(by_source({two(Source::AB, 100, 0, 0), two(Source::AB, 200, 1, 1),
                                                   two(Source::AC, 300), two(Source::BC, 400)}),
                                        20 * kMicrosecond);
  ASSERT_EQ(six.size(), 1u);
  EXPECT_EQ(six[0].twofolds[index(Source::AB)].time, 100);
  EXPECT_EQ(six[0].a, 0);
}

TEST(SixFold, ConsumedTwoFoldsAreNotReused) {
  const auto w2 = 20 * kMicrosecond;
  const auto six = sixfold_coincidences(by_source({two(Source::AB, 0), two(Source::AC, 10), two(Source::BC, 20),
                                                   two(Source::AB, 30), two(Source::AC, w2 + 100),
                                                   two(Source::BC, w2 + 200)}),
                                        w2);
  EXPECT_EQ(six.size(), 1u);
}

TEST(SixFold, DisjointSupportsGiveNothing) {
  std::vector<TwoFold> all;
  for (int k = 0; k < 10; ++k) {
    all.push_back(two(Source::AB, k * 1'000));
    all.push_back(two(Source::AC, kSecond + k * 1'000));
    all.push_back(two(Source::BC, 2 * kSecond + k * 1'000));
  }
  EXPECT_TRUE(sixfold_coincidences(by_source(all), 20 * kMicrosecond).empty());
}

TEST(Counts, PointMassAndEmpty) {
  SixfoldEvent e;
  e.a = 2;
  e.b = 1;
  e.c = 3;
  const std::vector<SixfoldEvent> events(7, e);
  const auto t = counts_to_distribution(events);
  EXPECT_EQ(t.counts[2 * 16 + 1 * 4 + 3], 7u);
  EXPECT_EQ(t.distribution[2 * 16 + 1 * 4 + 3], 1.0);
  EXPECT_THROW(counts_to_distribution(std::vector<SixfoldEvent>{}), DomainError);
}

TEST(Synthesis, NoiselessPairsAllSurvive) {
  const auto streams = synthesize(fritz(), noiseless(30.0, 3));
  const auto t = twofold_coincidences(streams, 1);
  for (Source s : kSources) {
    const auto [x, y] = endpoints(s);
    EXPECT_EQ(source_events(streams, x, s), source_events(streams, y, s));
    EXPECT_EQ(t[index(s)].size(), source_events(streams, x, s));
  }
}

TEST(Synthesis, PairCountFollowsRate) {
  auto c = noiseless(200.0, 4);
  c.trial_rate = 50.0;
  const auto streams = synthesize(fritz(), c);
  const double expected = c.trial_rate * c.duration;
  for (Source s : kSources)
    EXPECT_LE(std::abs(static_cast<double>(source_events(streams, endpoints(s)[0], s)) - expected),
              4 * std::sqrt(expected));
}

TEST(Synthesis, StreamsSortedAndDeterministic) {
  PipelineConfig c;
  c.duration = 2.0;
  c.seed = 9;
  const auto a = synthesize(fritz(0.95), c);
  const auto b = synthesize(fritz(0.95), c);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.size(), 0u);
  for (const auto& stream : a.stations)
    for (std::size_t i = 1; i < stream.size(); ++i) {
      EXPECT_LE(stream[i - 1].timestamp, stream[i].timestamp);
      if (stream[i - 1].timestamp == stream[i].timestamp) EXPECT_LT(stream[i - 1].channel, stream[i].channel);
      EXPECT_EQ(stream[i].timestamp % c.resolution, 0);
    }
  c.seed = 10;
  EXPECT_NE(a, synthesize(fritz(0.95), c));
  EXPECT_NE(a, synthesize(fritz(0.95), PipelineConfig{c}, 2.0));
}

TEST(Pipeline, NoiselessConvergesToTheModel) {
  const auto p = fritz();
  // Mean total variation over four seeds, so one lucky small run cannot mask the trend.
  auto mean_tv = [&](double events, std::uint64_t seed) {
    double tv = 0.0;
    for (std::uint64_t k = 0; k < 4; ++k) {
      const auto run = run_pipeline(p, noiseless(events / 74.0, seed + k));
      EXPECT_GT(static_cast<double>(run.sixfolds), 0.95 * events);
      tv += total_variation(p, from_counts(triangle_variables(), run.counts)) / 4;
    }
    return tv;
  };
  const double tv_small = mean_tv(1.0e5, 20);
  const double tv_large = mean_tv(1.0e6, 30);
  EXPECT_LE(tv_large, 0.005);
  EXPECT_LT(tv_large, 0.5 * tv_small);
}

TEST(Pipeline, AnticorrelationIsReproduced) {
  constexpr double eps = 3e-5;
  const auto run = run_pipeline(fritz(1.0, eps), noiseless(1.0e6 / 74.0, 13));
  std::uint64_t flipped = 0;
  for (std::size_t k = 0; k < 64; ++k)
    if ((k / 16) >> 1 != (k % 4) >> 1) flipped += run.counts[k];
  const double expected = eps * static_cast<double>(run.sixfolds);
  EXPECT_LE(std::abs(static_cast<double>(flipped) - expected), 4 * std::sqrt(expected));
}

TEST(Pipeline, WindowListMatchesSingleRuns) {
  PipelineConfig c;
  c.duration = 30.0;
  c.seed = 5;
  const std::vector<Windows> ws{{4'100, 20 * kMicrosecond}, {kMicrosecond, 20 * kMicrosecond}, {4'100, kMicrosecond * 2}};
  const auto runs = run_pipeline(fritz(0.95), c, ws);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    auto single = c;
    single.w1 = ws[i].w1;
    single.w2 = ws[i].w2;
    const auto r = run_pipeline(fritz(0.95), single);
    EXPECT_EQ(r.counts, runs[i].counts);
    EXPECT_EQ(r.twofolds, runs[i].twofolds);
  }
  EXPECT_GT(runs[0].sixfolds, runs[2].sixfolds);
}

TEST(Io, EventCsvRoundTrip) {
  PipelineConfig c;
  c.duration = 0.5;
  const auto streams = synthesize(fritz(0.9), c);
  std::stringstream ss;
  write_events_csv(ss, streams);
  EXPECT_EQ(read_events_csv(ss), streams);
  std::istringstream bad("12,A,2,BC\n");
  EXPECT_THROW(read_events_csv(bad), DomainError);
  std::istringstream junk("x,y\n");
  EXPECT_THROW(read_events_csv(junk), DomainError);
}

TEST(Io, CountsJsonRoundTrip) {
  std::vector<std::uint64_t> counts(64);
  for (std::size_t k = 0; k < 64; ++k) counts[k] = k * k;
  const auto text = counts_to_json(counts);
  EXPECT_EQ(nlohmann::json::parse(text)["3,2,1"].get<std::uint64_t>(), counts[3 * 16 + 2 * 4 + 1]);
  EXPECT_EQ(counts_from_json(text), counts);
  EXPECT_THROW(counts_from_json(R"({"4,0,0": 1})"), DomainError);
  EXPECT_THROW(counts_from_json(R"({"0,0,0": -1})"), DomainError);
  EXPECT_THROW(counts_from_json("[1,2]"), DomainError);
}
