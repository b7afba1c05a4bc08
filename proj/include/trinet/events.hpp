#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trinet/distribution.hpp"
#include "trinet/triangle.hpp"

namespace trinet {

using Picoseconds = std::int64_t;

inline constexpr Picoseconds kNanosecond = 1'000;
inline constexpr Picoseconds kMicrosecond = 1'000'000;
inline constexpr Picoseconds kSecond = 1'000'000'000'000;

// Each station has two input ports, one per source it receives, and one detector per bit value on
// each port: channel = 2 * port + bit.  Port 0 carries the high outcome bit (a0 from AC, b0 from BC,
// c0 from AC) and port 1 the low bit (a1 from AB, b1 from AB, c1 from BC).
Source port_source(Party station, std::uint8_t port);
std::uint8_t source_port(Party station, Source source);

struct EventRecord {
  Picoseconds timestamp = 0;
  Party station = Party::A;
  std::uint8_t channel = 0;
  Source source = Source::AB;

  std::uint8_t bit() const noexcept { return channel & 1u; }
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Time-sorted detections per station, ties ordered by channel.
struct EventStreams {
  std::array<std::vector<EventRecord>, 3> stations;

  std::size_t size() const noexcept;
  friend bool operator==(const EventStreams&, const EventStreams&) = default;
};

struct PipelineConfig {
  Picoseconds w1 = 4'100;
  Picoseconds w2 = 20 * kMicrosecond;
  double trial_rate = 74.0;  // Hz; joint emissions of one pair per source, outcomes drawn from p
  Picoseconds trial_spread = 10 * kMicrosecond;  // emission offsets of a trial's pairs, uniform
  std::array<double, 3> background_rates{20.0, 20.0, 20.0};  // Hz of uncorrelated pairs per source
  double dark_rate = 1000.0;  // Hz per detector channel
  double efficiency = 0.9;    // probability that a photon is detected
  Picoseconds jitter = 500;   // standard deviation of Gaussian timing noise
  Picoseconds resolution = 81;
  double duration = 36'000.0;  // seconds
  double chunk = 10.0;         // seconds synthesized and reduced at a time
  std::uint64_t seed = 0;

  void validate() const;
  // Every pair kept, no dark counts, no jitter.
  static PipelineConfig noiseless();
};

struct TwoFold {
  Source source = Source::AB;
  Picoseconds time = 0;  // earlier of the two detections
  std::array<std::uint8_t, 2> bits{};  // at the source's two endpoints, in name order

  friend bool operator==(const TwoFold&, const TwoFold&) = default;
};

struct SixfoldEvent {
  std::array<TwoFold, 3> twofolds;  // indexed by source
  std::uint8_t a = 0, b = 0, c = 0;

  std::size_t outcome_index() const noexcept { return static_cast<std::size_t>(a) * 16 + b * 4 + c; }
  friend bool operator==(const SixfoldEvent&, const SixfoldEvent&) = default;
};

// Events for seconds [start, start + cfg.duration) of a run; same seed and start give the same streams.
EventStreams synthesize(const OutcomeDistribution& p, const PipelineConfig& cfg, double start = 0.0);

std::array<std::vector<TwoFold>, 3> twofold_coincidences(const EventStreams& streams, Picoseconds w1);
std::vector<SixfoldEvent> sixfold_coincidences(const std::array<std::vector<TwoFold>, 3>& twofolds, Picoseconds w2);

struct CountsTable {
  std::vector<std::uint64_t> counts;  // 64 cells, index 16a + 4b + c
  OutcomeDistribution distribution;
};
CountsTable counts_to_distribution(std::span<const SixfoldEvent> events);

struct Windows {
  Picoseconds w1 = 4'100;
  Picoseconds w2 = 20 * kMicrosecond;
};

struct PipelineRun {
  Windows windows;
  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(64, 0);
  std::uint64_t sixfolds = 0;
  std::array<std::uint64_t, 3> twofolds{};
};

// Synthesizes cfg.duration seconds chunk by chunk and reduces every chunk under each window pair.
std::vector<PipelineRun> run_pipeline(const OutcomeDistribution& p, const PipelineConfig& cfg,
                                      std::span<const Windows> windows);
PipelineRun run_pipeline(const OutcomeDistribution& p, const PipelineConfig& cfg);

// Lines timestamp_ps,station,channel,source; a header line and lines starting with '#' are skipped.
void write_events_csv(std::ostream& os, const EventStreams& streams);
EventStreams read_events_csv(std::istream& is);

// Object keyed "a,b,c"; the reader also accepts that object as the "counts" member of a wrapper.
std::string counts_to_json(std::span<const std::uint64_t> counts);
std::vector<std::uint64_t> counts_from_json(const std::string& text);

}  // namespace trinet
