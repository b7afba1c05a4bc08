#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "trinet/distribution.hpp"
#include "trinet/witness.hpp"

namespace trinet {

// All entropies are in bits, with 0 log 0 = 0.
double shannon_entropy(std::span<const double> p);
double entropy(const OutcomeDistribution& p, std::span<const std::string> vars);
double entropy(const OutcomeDistribution& p, std::initializer_list<std::string> vars);
double conditional_entropy(const OutcomeDistribution& p, std::span<const std::string> x,
                           std::span<const std::string> given);
double mutual_info(const OutcomeDistribution& p, std::span<const std::string> x, std::span<const std::string> y);
// I(X:Y:Z) = H(XYZ) - H(XY) - H(XZ) - H(YZ) + H(X) + H(Y) + H(Z)
double tripartite_info(const OutcomeDistribution& p, std::span<const std::string> x, std::span<const std::string> y,
                       std::span<const std::string> z);

struct ThetaTerms {
  // H(a0,b0|C); H(a0,b0) - I(a0:b0:C) - I(a0:C) - I(b0:C); H(a0,b0) + H(C) - 2I(a0:b0:C) - 2I(a0:C) - 2I(b0:C)
  std::array<double, 3> terms{};
  double minimum = 0.0;  // may be negative on finite-sample data
  double h_a0b0c = 0.0, h_a0b0 = 0.0, h_a0c = 0.0, h_b0c = 0.0, h_a0 = 0.0, h_b0 = 0.0, h_c = 0.0;
  double i_a0b0c = 0.0, i_a0c = 0.0, i_b0c = 0.0;
};

// Needs variables a0, b0 and the composite c (any others are summed out).
ThetaTerms theta_terms(const OutcomeDistribution& q);
double theta(const OutcomeDistribution& q);

// Largest |E00 + E01 + E10 + E11 - 2 E_xy| over the four sign placements, from p(a1,b1|a0,b0).
double chsh(const ConditionalDistribution& cond);

struct EntropicReport {
  double s_chsh = 0.0;
  ThetaTerms theta_terms;
  double theta = 0.0;  // minimum clamped at zero
  bool theta_clamped = false;
  double e = 0.0;      // 2 - s_chsh + sqrt(16 theta / log2 e); negative certifies nonclassicality
};

EntropicReport entropic_witness(const OutcomeDistribution& p, std::span<const PairSplit> splits);
EntropicReport entropic_witness(const OutcomeDistribution& p);
double witness_value(double s_chsh, double theta);

// Poissonian Monte-Carlo error on E from a 64-cell counts table over quaternary a, b, c.
WitnessReport entropic_mc_error(std::span<const std::uint64_t> counts, std::size_t trials = kDefaultMcTrials,
                                std::uint64_t seed = 0);

std::string to_json(const EntropicReport& report);

}  // namespace trinet
