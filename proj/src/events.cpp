#include "trinet/events.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "trinet/error.hpp"
#include "trinet/random.hpp"

namespace trinet {

namespace {

constexpr std::array<std::array<Source, 2>, 3> kPorts{{{Source::AC, Source::AB},
                                                       {Source::BC, Source::AB},
                                                       {Source::AC, Source::BC}}};

// Bits a source carries to its two endpoints for outcome (a, b, c).
std::array<std::uint8_t, 2> source_bits(Source s, std::size_t a, std::size_t b, std::size_t c) {
  switch (s) {
    case Source::AB: return {static_cast<std::uint8_t>(a & 1), static_cast<std::uint8_t>(b & 1)};
    case Source::AC: return {static_cast<std::uint8_t>(a >> 1), static_cast<std::uint8_t>(c >> 1)};
    case Source::BC: return {static_cast<std::uint8_t>(b >> 1), static_cast<std::uint8_t>(c & 1)};
  }
  return {};
}

bool event_less(const EventRecord& x, const EventRecord& y) {
  return x.timestamp != y.timestamp ? x.timestamp < y.timestamp : x.channel < y.channel;
}

void check_target(const OutcomeDistribution& p) {
  const auto& v = p.variables();
  if (v.size() != 3 || v[0].cardinality != 4 || v[1].cardinality != 4 || v[2].cardinality != 4)
    throw DomainError("event synthesis needs a distribution over quaternary a, b, c");
}

std::vector<TwoFold> match_source(const EventStreams& streams, Source s, Picoseconds w1) {
  const auto [x, y] = endpoints(s);
  std::vector<const EventRecord*> ex, ey;
  for (const auto& e : streams.stations[index(x)])
    if (e.source == s) ex.push_back(&e);
  for (const auto& e : streams.stations[index(y)])
    if (e.source == s) ey.push_back(&e);
  std::vector<TwoFold> out;
  std::size_t i = 0, j = 0;
  while (i < ex.size() && j < ey.size()) {
    const Picoseconds d = ex[i]->timestamp - ey[j]->timestamp;
    if (std::abs(d) <= w1) {
      out.push_back({s, std::min(ex[i]->timestamp, ey[j]->timestamp), {ex[i]->bit(), ey[j]->bit()}});
      ++i;
      ++j;
    } else if (d < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

Party parse_station(const std::string& s) {
  if (s == "A") return Party::A;
  if (s == "B") return Party::B;
  if (s == "C") return Party::C;
  throw DomainError("unknown station '" + s + "'");
}

Source parse_source(const std::string& s) {
  for (Source src : kSources)
    if (to_string(src) == s) return src;
  throw DomainError("unknown source '" + s + "'");
}

}  // namespace

Source port_source(Party station, std::uint8_t port) {
  if (port > 1) throw DomainError("stations have two ports");
  return kPorts[index(station)][port];
}

std::uint8_t source_port(Party station, Source source) {
  const auto& ports = kPorts[index(station)];
  if (ports[0] == source) return 0;
  if (ports[1] == source) return 1;
  throw DomainError("source " + std::string(to_string(source)) + " does not reach station " +
                    std::string(to_string(station)));
}

std::size_t EventStreams::size() const noexcept {
  return stations[0].size() + stations[1].size() + stations[2].size();
}

void PipelineConfig::validate() const {
  if (!(w1 >= 0 && w1 < w2)) throw DomainError("windows must satisfy 0 <= w1 < w2");
  if (!(trial_rate >= 0.0 && dark_rate >= 0.0 && std::isfinite(trial_rate) && std::isfinite(dark_rate)))
    throw DomainError("rates must be finite and nonnegative");
  for (double r : background_rates)
    if (!(r >= 0.0 && std::isfinite(r))) throw DomainError("rates must be finite and nonnegative");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw DomainError("efficiency must lie in (0,1]");
  if (jitter < 0 || trial_spread < 0 || resolution <= 0) throw DomainError("timing parameters out of range");
  if (!(duration >= 0.0 && chunk > 0.0 && std::isfinite(duration))) throw DomainError("durations out of range");
}

PipelineConfig PipelineConfig::noiseless() {
  PipelineConfig c;
  c.background_rates = {0.0, 0.0, 0.0};
  c.dark_rate = 0.0;
  c.efficiency = 1.0;
  c.jitter = 0;
  return c;
}

EventStreams synthesize(const OutcomeDistribution& p, const PipelineConfig& cfg, double start) {
  cfg.validate();
  check_target(p);
  if (!(start >= 0.0)) throw DomainError("start time must be nonnegative");
  auto rng = make_rng(cfg.seed, std::bit_cast<std::uint64_t>(start));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Times are generated relative to the chunk start, where doubles are exact to well below 1 ps.
  const auto origin = static_cast<Picoseconds>(std::llround(start * static_cast<double>(kSecond)));
  const double length = cfg.duration * static_cast<double>(kSecond);
  EventStreams out;

  auto detect = [&](Party station, std::uint8_t channel, Source source, double t, bool photon) {
    if (photon && cfg.efficiency < 1.0 && unit(rng) >= cfg.efficiency) return;
    if (photon && cfg.jitter > 0) t += static_cast<double>(cfg.jitter) * gauss(rng);
    Picoseconds ts = origin + static_cast<Picoseconds>(std::llround(t));
    ts = std::max<Picoseconds>(0, ts - ts % cfg.resolution);
    out.stations[index(station)].push_back({ts, station, channel, source});
  };
  auto emit_pair = [&](Source s, std::array<std::uint8_t, 2> bits, double t) {
    const auto ends = endpoints(s);
    for (int k = 0; k < 2; ++k)
      detect(ends[k], static_cast<std::uint8_t>(2 * source_port(ends[k], s) + bits[k]), s, t, true);
  };
  auto poisson_times = [&](double rate_hz, auto&& at) {
    if (rate_hz <= 0.0) return;
    std::exponential_distribution<double> gap(rate_hz / static_cast<double>(kSecond));
    for (double t = gap(rng); t < length; t += gap(rng)) at(t);
  };

  const auto probs = p.probabilities();
  std::discrete_distribution<std::size_t> outcome(probs.begin(), probs.end());
  const double spread = static_cast<double>(cfg.trial_spread);
  poisson_times(cfg.trial_rate, [&](double t) {
    const std::size_t k = outcome(rng);
    for (Source s : kSources) emit_pair(s, source_bits(s, k / 16, (k / 4) % 4, k % 4), t + spread * unit(rng));
  });

  for (Source s : kSources) {
    std::array<double, 4> marginal{};
    for (std::size_t k = 0; k < 64; ++k) {
      const auto bits = source_bits(s, k / 16, (k / 4) % 4, k % 4);
      marginal[2 * bits[0] + bits[1]] += probs[k];
    }
    std::discrete_distribution<int> pick(marginal.begin(), marginal.end());
    poisson_times(cfg.background_rates[index(s)], [&](double t) {
      const int m = pick(rng);
      emit_pair(s, {static_cast<std::uint8_t>(m >> 1), static_cast<std::uint8_t>(m & 1)}, t);
    });
  }

  for (Party station : kParties)
    for (std::uint8_t channel = 0; channel < 4; ++channel)
      poisson_times(cfg.dark_rate,
                    [&](double t) { detect(station, channel, port_source(station, channel / 2), t, false); });

  for (auto& stream : out.stations) std::sort(stream.begin(), stream.end(), event_less);
  return out;
}

std::array<std::vector<TwoFold>, 3> twofold_coincidences(const EventStreams& streams, Picoseconds w1) {
  if (w1 < 0) throw DomainError("two-fold window must be nonnegative");
  for (Party station : kParties) {
    const auto& s = streams.stations[index(station)];
    for (const auto& e : s)
      if (e.station != station || e.channel > 3 || e.timestamp < 0 || port_source(station, e.channel / 2) != e.source)
        throw DomainError("event record inconsistent with its station stream");
    if (!std::is_sorted(s.begin(), s.end(), [](const auto& x, const auto& y) { return x.timestamp < y.timestamp; }))
      throw DomainError("event stream of station " + std::string(to_string(station)) + " is not time-sorted");
  }
  std::array<std::future<std::vector<TwoFold>>, 3> jobs;
  for (Source s : kSources)
    jobs[index(s)] = std::async(std::launch::async, [&streams, s, w1] { return match_source(streams, s, w1); });
  std::array<std::vector<TwoFold>, 3> out;
  for (Source s : kSources) out[index(s)] = jobs[index(s)].get();
  return out;
}

std::vector<SixfoldEvent> sixfold_coincidences(const std::array<std::vector<TwoFold>, 3>& twofolds, Picoseconds w2) {
  if (w2 < 0) throw DomainError("six-fold window must be nonnegative");
  for (const auto& list : twofolds)
    if (!std::is_sorted(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.time < y.time; }))
      throw DomainError("two-fold list is not time-sorted");
  std::vector<SixfoldEvent> out;
  std::array<std::size_t, 3> head{};
  auto time_at = [&](std::size_t s) { return twofolds[s][head[s]].time; };
  for (;;) {
    if (head[0] == twofolds[0].size() || head[1] == twofolds[1].size() || head[2] == twofolds[2].size()) break;
    std::size_t anchor = 0;
    for (std::size_t s = 1; s < 3; ++s)
      if (time_at(s) < time_at(anchor)) anchor = s;
    const Picoseconds end = time_at(anchor) + w2;
    if (time_at(0) > end || time_at(1) > end || time_at(2) > end) {
      ++head[anchor];
      continue;
    }
    SixfoldEvent ev;
    for (std::size_t s = 0; s < 3; ++s) ev.twofolds[s] = twofolds[s][head[s]];
    const auto& ab = ev.twofolds[index(Source::AB)].bits;
    const auto& ac = ev.twofolds[index(Source::AC)].bits;
    const auto& bc = ev.twofolds[index(Source::BC)].bits;
    ev.a = static_cast<std::uint8_t>(2 * ac[0] + ab[0]);
    ev.b = static_cast<std::uint8_t>(2 * bc[0] + ab[1]);
    ev.c = static_cast<std::uint8_t>(2 * ac[1] + bc[1]);
    out.push_back(ev);
    for (std::size_t s = 0; s < 3; ++s)
      while (head[s] < twofolds[s].size() && twofolds[s][head[s]].time <= end) ++head[s];
  }
  return out;
}

CountsTable counts_to_distribution(std::span<const SixfoldEvent> events) {
  if (events.empty()) throw DomainError("no six-fold events to tally");
  std::vector<std::uint64_t> counts(64, 0);
  for (const auto& e : events) ++counts[e.outcome_index()];
  auto dist = from_counts(triangle_variables(), counts);
  return {std::move(counts), std::move(dist)};
}

std::vector<PipelineRun> run_pipeline(const OutcomeDistribution& p, const PipelineConfig& cfg,
                                      std::span<const Windows> windows) {
  cfg.validate();
  for (const auto& w : windows)
    if (!(w.w1 >= 0 && w.w1 < w.w2)) throw DomainError("windows must satisfy 0 <= w1 < w2");
  std::vector<PipelineRun> runs(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) runs[i].windows = windows[i];
  const auto chunks = static_cast<std::size_t>(std::ceil(cfg.duration / cfg.chunk - 1e-9));
  for (std::size_t k = 0; k < chunks; ++k) {
    auto part = cfg;
    const double start = static_cast<double>(k) * cfg.chunk;
    part.duration = std::min(cfg.chunk, cfg.duration - start);
    const auto streams = synthesize(p, part, start);
    for (auto& run : runs) {
      const auto two = twofold_coincidences(streams, run.windows.w1);
      for (std::size_t s = 0; s < 3; ++s) run.twofolds[s] += two[s].size();
      for (const auto& e : sixfold_coincidences(two, run.windows.w2)) {
        ++run.counts[e.outcome_index()];
        ++run.sixfolds;
      }
    }
  }
  return runs;
}

PipelineRun run_pipeline(const OutcomeDistribution& p, const PipelineConfig& cfg) {
  const Windows w{cfg.w1, cfg.w2};
  return run_pipeline(p, cfg, std::span<const Windows>(&w, 1)).front();
}

void write_events_csv(std::ostream& os, const EventStreams& streams) {
  os << "timestamp_ps,station,channel,source\n";
  for (const auto& stream : streams.stations)
    for (const auto& e : stream)
      os << e.timestamp << ',' << to_string(e.station) << ',' << static_cast<int>(e.channel) << ','
         << to_string(e.source) << '\n';
}

EventStreams read_events_csv(std::istream& is) {
  EventStreams out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty() || line.front() == '#' || line.rfind("timestamp", 0) == 0) continue;
    std::istringstream fields(line);
    std::string ts, station, channel, source;
    if (!std::getline(fields, ts, ',') || !std::getline(fields, station, ',') || !std::getline(fields, channel, ',') ||
        !std::getline(fields, source))
      throw DomainError("malformed event line " + std::to_string(number));
    EventRecord e;
    try {
      e.timestamp = std::stoll(ts);
      const int ch = std::stoi(channel);
      if (ch < 0 || ch > 3) throw DomainError("channel out of range");
      e.channel = static_cast<std::uint8_t>(ch);
    } catch (const std::logic_error&) {
      throw DomainError("malformed event line " + std::to_string(number));
    }
    e.station = parse_station(station);
    e.source = parse_source(source);
    if (e.timestamp < 0 || port_source(e.station, e.channel / 2) != e.source)
      throw DomainError("invalid event on line " + std::to_string(number));
    out.stations[index(e.station)].push_back(e);
  }
  return out;
}

std::string counts_to_json(std::span<const std::uint64_t> counts) {
  if (counts.size() != 64) throw DomainError("counts table must have 64 cells");
  nlohmann::ordered_json j;
  for (std::size_t k = 0; k < 64; ++k)
    j[std::to_string(k / 16) + "," + std::to_string((k / 4) % 4) + "," + std::to_string(k % 4)] = counts[k];
  return j.dump(1);
}

std::vector<std::uint64_t> counts_from_json(const std::string& text) {
  std::vector<std::uint64_t> counts(64, 0);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("counts JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("counts")) j = nlohmann::json(j["counts"]);
  if (!j.is_object()) throw DomainError("counts JSON must be an object keyed by \"a,b,c\"");
  for (const auto& [key, value] : j.items()) {
    unsigned a = 4, b = 4, c = 4;
    char s1 = 0, s2 = 0;
    std::istringstream in(key);
    if (!(in >> a >> s1 >> b >> s2 >> c) || s1 != ',' || s2 != ',' || a > 3 || b > 3 || c > 3 || !in.eof())
      throw DomainError("bad counts key '" + key + "'");
    if (!value.is_number_unsigned()) throw DomainError("counts must be nonnegative integers");
    counts[a * 16 + b * 4 + c] = value.get<std::uint64_t>();
  }
  return counts;
}

}  // namespace trinet
