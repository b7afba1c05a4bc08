#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trinet/distribution.hpp"
#include "trinet/inflation.hpp"
#include "trinet/lp.hpp"

namespace trinet {

// Quadratic inequality sum_{x,y} coefficients[x * d^3 + y] p(x) p(y) >= 0 on classical p, with
// x = (a1,b1,c1) and y = (a2,b2,c2) indexed as 16a + 4b + c at d = 4.
struct Certificate {
  std::uint32_t d = 0;
  std::vector<double> coefficients;
  std::string mode;
  std::optional<std::size_t> classes;
  double margin = 0.0;
  double min_slack = 0.0;
  double y_dot_v = 0.0;
  std::string problem_hash;

  std::size_t outcome_count() const noexcept { return std::size_t{d} * d * d; }
};

// Throws DomainError on non-finite coefficients or a size other than d^6.
void validate(const Certificate& cert);

Certificate make_certificate(const InflationLp& lp, const FarkasCertificate& farkas);

struct InflationTest {
  LpResult lp;
  std::size_t rows = 0;
  std::uint64_t columns = 0;
  std::optional<Certificate> certificate;  // present when the LP is infeasible
};

// Builds the inflation LP for p (d taken from its variables), solves it, and extracts a certificate.
InflationTest inflation_test(const OutcomeDistribution& p, LpMode mode, const AssembleOptions& assemble = {},
                             const LpOptions& lp = {});

double evaluate(const Certificate& cert, const OutcomeDistribution& p);
double evaluate(const Certificate& cert, std::span<const double> p);

// (y + y^T) / 2; evaluation depends on y only through this.
Certificate symmetrized(const Certificate& cert);

struct WitnessReport {
  double value = 0.0;
  double std_error = 0.0;  // NaN when fewer than two trials
  double sigmas = 0.0;     // |V| / std_error when V < 0, else 0
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool std_error_defined = true;
};

inline constexpr std::size_t kDefaultMcTrials = 10'000;

// Resamples every count from Poisson(count), renormalizes, and evaluates; value and std_error are
// the mean and sample standard deviation over trials.
WitnessReport poisson_mc_error(const Certificate& cert, std::span<const std::uint64_t> counts,
                               std::size_t trials = kDefaultMcTrials, std::uint64_t seed = 0);

// Generic form for any statistic of the resampled frequency table.
WitnessReport poisson_mc(const std::function<double(std::span<const double>)>& statistic,
                         std::span<const std::uint64_t> counts, std::size_t trials, std::uint64_t seed);

bool violates(const WitnessReport& report, double min_sigmas);

enum class Trend { NonDecreasing, NonIncreasing, Mixed };
std::string_view to_string(Trend t);

struct SweepPoint {
  double parameter = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct SweepTable {
  std::string parameter;
  std::vector<SweepPoint> points;
  Trend trend = Trend::Mixed;
  std::optional<double> crossing;  // parameter where the value changes sign

  void write_csv(std::ostream& os) const;
};

Trend classify_trend(std::span<const SweepPoint> points);

// Evaluates the certificate across the grid; the first sign change between grid points is refined
// by bisection on the family to an interval of width <= crossing_tolerance.
SweepTable noise_sweep(const Certificate& cert, const std::function<OutcomeDistribution(double)>& family,
                       std::span<const double> grid, std::string parameter = "v",
                       double crossing_tolerance = 1e-4);

struct ExactVerification {
  bool valid = false;
  std::string min_slack;  // exact rational before any shift
  std::string shift;      // added to every coefficient so all slacks are nonnegative
  std::string y_dot_v;    // after the shift
  std::vector<std::string> coefficients;  // "num/den", after the shift
};

// Closest fraction with denominator <= max_denominator, as "num/den" (or an integer).
std::string rationalize(double x, std::int64_t max_denominator);

// Continued-fraction rounding of every coefficient to denominators <= max_denominator, an exact
// shift along the all-ones direction (which adds the same amount to every column slack and to
// y.v) so the minimum slack over all inflation columns is zero, then an exact check of y.v < 0.
ExactVerification verify_exact(const Certificate& cert, const OutcomeDistribution& p,
                               std::int64_t max_denominator = 1'000'000);

// Certificate JSON: {mode, d, classes?, coefficients:[{index, value}], margin,
// verification:{min_slack, y_dot_v, exact?}, problem_hash}; zero coefficients are omitted.
std::string to_json(const Certificate& cert, const ExactVerification* exact = nullptr);
Certificate certificate_from_json(const std::string& text);

}  // namespace trinet
