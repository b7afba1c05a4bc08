#include "trinet/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "trinet/entropic.hpp"
#include "trinet/error.hpp"

namespace trinet {

std::vector<WindowPoint> window_sweep(const OutcomeDistribution& p, const PipelineConfig& cfg,
                                      std::span<const Windows> windows, const Certificate& cert,
                                      std::size_t mc_trials, std::uint64_t mc_seed) {
  if (cert.d != 4) throw DomainError("window sweeps need a d = 4 certificate");
  std::vector<WindowPoint> out;
  for (const auto& run : run_pipeline(p, cfg, windows)) {
    WindowPoint w{run.windows, run.sixfolds, {}, std::nullopt};
    if (run.sixfolds == 0) {
      w.inflation.value = w.inflation.std_error = std::numeric_limits<double>::quiet_NaN();
      w.inflation.std_error_defined = false;
      out.push_back(w);
      continue;
    }
    w.inflation = poisson_mc_error(cert, run.counts, mc_trials, mc_seed);
    try {
      w.entropic = entropic_mc_error(run.counts, mc_trials, mc_seed);
    } catch (const DomainError&) {
      w.entropic.reset();
    }
    out.push_back(w);
  }
  return out;
}

void write_window_csv(std::ostream& os, std::span<const WindowPoint> points) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  os << "w1_ps,w2_ps,sixfolds,V,V_stderr,E,E_stderr\n" << std::setprecision(10);
  for (const auto& p : points)
    os << p.windows.w1 << ',' << p.windows.w2 << ',' << p.sixfolds << ',' << p.inflation.value << ','
       << p.inflation.std_error << ',' << (p.entropic ? p.entropic->value : nan) << ','
       << (p.entropic ? p.entropic->std_error : nan) << '\n';
}

std::vector<SweepPoint> inflation_points(std::span<const WindowPoint> points, bool by_w1) {
  std::vector<SweepPoint> out;
  for (const auto& p : points)
    out.push_back({static_cast<double>(by_w1 ? p.windows.w1 : p.windows.w2), p.inflation.value, p.inflation.std_error});
  return out;
}

}  // namespace trinet
