#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "trinet/events.hpp"
#include "trinet/witness.hpp"

namespace trinet {

struct WindowPoint {
  Windows windows;
  std::uint64_t sixfolds = 0;
  WitnessReport inflation;               // V of the certificate, Poissonian error
  std::optional<WitnessReport> entropic; // absent when a CHSH conditioning cell is empty
};

// One pipeline run reduced under every window pair, each scored with the certificate and the entropic witness.
std::vector<WindowPoint> window_sweep(const OutcomeDistribution& p, const PipelineConfig& cfg,
                                      std::span<const Windows> windows, const Certificate& cert,
                                      std::size_t mc_trials = kDefaultMcTrials, std::uint64_t mc_seed = 0);

// Columns w1_ps,w2_ps,sixfolds,V,V_stderr,E,E_stderr; a missing E is written as nan.
void write_window_csv(std::ostream& os, std::span<const WindowPoint> points);

std::vector<SweepPoint> inflation_points(std::span<const WindowPoint> points, bool by_w1);

}  // namespace trinet
