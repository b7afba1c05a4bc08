#include "trinet/witness.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "trinet/error.hpp"
#include "trinet/hash.hpp"
#include "trinet/random.hpp"

namespace trinet {

namespace {

using nlohmann::json;

std::size_t ipow6(std::uint32_t d) {
  std::size_t n = 1;
  for (int i = 0; i < 6; ++i) n *= d;
  return n;
}

std::string problem_hash(const InflationLp& lp) {
  std::string bytes(to_string(lp.mode()));
  bytes += ':' + std::to_string(lp.d()) + ':';
  const auto& v = lp.marginal_target();
  bytes.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  return sha256_hex(bytes);
}

// Best rational approximation with denominator <= max_den (continued fractions with the final
// semiconvergent).
mpq_class best_rational(double x, std::int64_t max_den) {
  const mpq_class exact(x);
  if (exact.get_den() <= max_den) return exact;
  const bool negative = sgn(exact) < 0;
  mpq_class r = abs(exact);
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  const mpz_class limit = static_cast<long>(max_den);
  while (true) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    const mpz_class k2 = a * k1 + k0;
    if (k2 > limit) {
      const mpz_class t = (limit - k0) / k1;
      const mpq_class semi(t * h1 + h0, t * k1 + k0);
      const mpq_class conv(h1, k1);
      mpq_class best = abs(semi - abs(exact)) < abs(conv - abs(exact)) ? semi : conv;
      best.canonicalize();
      return negative ? mpq_class(-best) : best;
    }
    const mpz_class h2 = a * h1 + h0;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const mpq_class frac = r - a;
    if (frac == 0) break;
    r = 1 / frac;
  }
  mpq_class best(h1, k1);
  best.canonicalize();
  return negative ? mpq_class(-best) : best;
}

}  // namespace

std::string rationalize(double x, std::int64_t max_denominator) {
  if (!std::isfinite(x) || max_denominator < 1) throw DomainError("cannot rationalize");
  return best_rational(x, max_denominator).get_str();
}

void validate(const Certificate& cert) {
  if (cert.d < 2) throw DomainError("certificate outcome cardinality must be at least 2");
  if (cert.coefficients.size() != ipow6(cert.d)) throw DomainError("certificate must have d^6 coefficients");
  if (!std::all_of(cert.coefficients.begin(), cert.coefficients.end(), [](double y) { return std::isfinite(y); }))
    throw DomainError("certificate coefficients must be finite");
}

Certificate make_certificate(const InflationLp& lp, const FarkasCertificate& farkas) {
  Certificate cert;
  cert.d = lp.d();
  cert.coefficients = lp.detwirl(farkas.y);
  cert.mode = std::string(to_string(lp.mode()));
  if (lp.mode() != LpMode::Full) cert.classes = lp.rows();
  cert.margin = farkas.margin;
  cert.min_slack = farkas.min_slack;
  const auto& v = lp.marginal_target();
  cert.y_dot_v = std::inner_product(cert.coefficients.begin(), cert.coefficients.end(), v.begin(), 0.0);
  cert.problem_hash = problem_hash(lp);
  validate(cert);
  return cert;
}

double evaluate(const Certificate& cert, std::span<const double> p) {
  const std::size_t n = cert.outcome_count();
  if (p.size() != n || cert.coefficients.size() != n * n)
    throw DomainError("distribution size does not match the certificate");
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (p[x] == 0.0) continue;
    const double* row = cert.coefficients.data() + x * n;
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) s += row[y] * p[y];
    total += p[x] * s;
  }
  return total;
}

InflationTest inflation_test(const OutcomeDistribution& p, LpMode mode, const AssembleOptions& assemble,
                             const LpOptions& options) {
  const auto& v = p.variables();
  if (v.size() != 3 || v[0].cardinality != v[1].cardinality || v[0].cardinality != v[2].cardinality)
    throw DomainError("inflation test needs a distribution over a, b, c of equal cardinality");
  const InflationProblem problem(static_cast<std::uint32_t>(v[0].cardinality));
  const auto lp = assemble_lp(problem, p, mode, assemble);
  InflationTest t;
  t.lp = solve_feasibility(lp, lp.target(), options);
  t.rows = lp.rows();
  t.columns = lp.cols();
  if (t.lp.status == LpStatus::Infeasible) t.certificate = make_certificate(lp, extract_certificate(lp, lp.target(), t.lp));
  return t;
}

double evaluate(const Certificate& cert, const OutcomeDistribution& p) {
  const auto& vars = p.variables();
  if (vars.size() != 3 ||
      std::any_of(vars.begin(), vars.end(), [&](const Variable& v) { return v.cardinality != cert.d; }))
    throw DomainError("distribution cardinalities do not match the certificate");
  return evaluate(cert, p.probabilities());
}

Certificate symmetrized(const Certificate& cert) {
  validate(cert);
  Certificate out = cert;
  const std::size_t n = cert.outcome_count();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      out.coefficients[x * n + y] = 0.5 * (cert.coefficients[x * n + y] + cert.coefficients[y * n + x]);
  return out;
}

WitnessReport poisson_mc(const std::function<double(std::span<const double>)>& statistic,
                         std::span<const std::uint64_t> counts, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("at least one Monte-Carlo trial is required");
  if (std::all_of(counts.begin(), counts.end(), [](std::uint64_t c) { return c == 0; }))
    throw DomainError("counts must not be all zero");
  std::vector<double> values(trials);
  std::vector<double> freq(counts.size());
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = make_rng(seed, t);
    double total = 0.0;
    do {
      total = 0.0;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        freq[i] = counts[i] == 0 ? 0.0
                                 : static_cast<double>(std::poisson_distribution<std::uint64_t>(
                                       static_cast<double>(counts[i]))(rng));
        total += freq[i];
      }
    } while (total == 0.0);
    for (auto& f : freq) f /= total;
    values[t] = statistic(freq);
  }
  WitnessReport r;
  r.trials = trials;
  r.seed = seed;
  r.value = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(trials);
  if (trials < 2) {
    r.std_error = std::numeric_limits<double>::quiet_NaN();
    r.std_error_defined = false;
    return r;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - r.value) * (v - r.value);
  r.std_error = std::sqrt(ss / static_cast<double>(trials - 1));
  if (r.value < 0.0 && r.std_error > 0.0) r.sigmas = -r.value / r.std_error;
  return r;
}

WitnessReport poisson_mc_error(const Certificate& cert, std::span<const std::uint64_t> counts, std::size_t trials,
                               std::uint64_t seed) {
  validate(cert);
  if (counts.size() != cert.outcome_count()) throw DomainError("counts table does not match the certificate");
  return poisson_mc([&](std::span<const double> p) { return evaluate(cert, p); }, counts, trials, seed);
}

bool violates(const WitnessReport& report, double min_sigmas) {
  return report.value < 0.0 && report.std_error_defined && report.sigmas >= min_sigmas;
}

std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::NonDecreasing: return "non-decreasing";
    case Trend::NonIncreasing: return "non-increasing";
    case Trend::Mixed: return "mixed";
  }
  return "mixed";
}

Trend classify_trend(std::span<const SweepPoint> points) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double step = points[i].value - points[i - 1].value;
    const double tol = 1e-12 * std::max({1.0, std::abs(points[i].value), std::abs(points[i - 1].value)});
    if (step < -tol) up = false;
    if (step > tol) down = false;
  }
  if (up) return Trend::NonDecreasing;
  if (down) return Trend::NonIncreasing;
  return Trend::Mixed;
}

void SweepTable::write_csv(std::ostream& os) const {
  os << "parameter,value,V,stderr\n" << std::setprecision(17);
  for (const auto& pt : points) os << parameter << ',' << pt.parameter << ',' << pt.value << ',' << pt.std_error << '\n';
}

SweepTable noise_sweep(const Certificate& cert, const std::function<OutcomeDistribution(double)>& family,
                       std::span<const double> grid, std::string parameter, double crossing_tolerance) {
  validate(cert);
  SweepTable table;
  table.parameter = std::move(parameter);
  for (double g : grid) table.points.push_back({g, evaluate(cert, family(g)), 0.0});
  table.trend = classify_trend(table.points);
  for (std::size_t i = 1; i < table.points.size(); ++i) {
    const auto& lo = table.points[i - 1];
    const auto& hi = table.points[i];
    if ((lo.value < 0.0) == (hi.value < 0.0)) continue;
    double a = lo.parameter, b = hi.parameter;
    const bool a_negative = lo.value < 0.0;
    while (std::abs(b - a) > crossing_tolerance) {
      const double mid = 0.5 * (a + b);
      if ((evaluate(cert, family(mid)) < 0.0) == a_negative) a = mid;
      else b = mid;
    }
    table.crossing = 0.5 * (a + b);
    break;
  }
  return table;
}

ExactVerification verify_exact(const Certificate& cert, const OutcomeDistribution& p, std::int64_t max_denominator) {
  validate(cert);
  if (max_denominator < 1) throw DomainError("maximum denominator must be positive");
  const auto v = marginal_target(p, cert.d);
  std::vector<mpq_class> y(cert.coefficients.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = best_rational(cert.coefficients[i], max_denominator);

  const InflationProblem problem(cert.d);
  const ColumnOrbits orbits(problem, false);
  mpq_class min_slack;
  bool first = true;
  mpq_class sum;
  for (std::size_t k = 0; k < orbits.count(); ++k) {
    const auto rows = orbits.member_rows(k);
    sum = 0;
    for (auto r : rows) sum += y[r];
    sum /= static_cast<unsigned long>(rows.size());
    if (first || sum < min_slack) {
      min_slack = sum;
      first = false;
    }
  }
  const mpq_class shift = min_slack < 0 ? mpq_class(-min_slack) : mpq_class(0);
  mpq_class dot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] += shift;
    if (v[i] != 0.0) dot += y[i] * mpq_class(v[i]);
  }
  ExactVerification out;
  out.valid = dot < 0;
  out.min_slack = min_slack.get_str();
  out.shift = shift.get_str();
  out.y_dot_v = dot.get_str();
  out.coefficients.reserve(y.size());
  for (const auto& q : y) out.coefficients.push_back(q.get_str());
  return out;
}

std::string to_json(const Certificate& cert, const ExactVerification* exact) {
  validate(cert);
  json j;
  j["mode"] = cert.mode;
  j["d"] = cert.d;
  if (cert.classes) j["classes"] = *cert.classes;
  json coeffs = json::array();
  for (std::size_t i = 0; i < cert.coefficients.size(); ++i) {
    if (cert.coefficients[i] == 0.0 && !exact) continue;
    json c{{"index", i}, {"value", cert.coefficients[i]}};
    if (exact) c["rational"] = exact->coefficients[i];
    coeffs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coeffs);
  j["margin"] = cert.margin;
  j["verification"] = {{"min_slack", cert.min_slack}, {"y_dot_v", cert.y_dot_v}};
  if (exact)
    j["verification"]["exact"] = {{"valid", exact->valid},
                                  {"min_slack", exact->min_slack},
                                  {"shift", exact->shift},
                                  {"y_dot_v", exact->y_dot_v}};
  j["problem_hash"] = cert.problem_hash;
  return j.dump(1);
}

Certificate certificate_from_json(const std::string& text) {
  Certificate cert;
  try {
    const auto j = json::parse(text);
    cert.d = j.at("d").get<std::uint32_t>();
    if (cert.d < 2 || cert.d > 16) throw DomainError("certificate cardinality out of range");
    cert.mode = j.value("mode", std::string("external"));
    if (j.contains("classes")) cert.classes = j["classes"].get<std::size_t>();
    cert.coefficients.assign(ipow6(cert.d), 0.0);
    for (const auto& c : j.at("coefficients")) {
      const auto idx = c.at("index").get<std::size_t>();
      if (idx >= cert.coefficients.size()) throw DomainError("certificate coefficient index out of range");
      cert.coefficients[idx] = c.at("value").get<double>();
    }
    cert.margin = j.value("margin", 0.0);
    if (j.contains("verification")) {
      cert.min_slack = j["verification"].value("min_slack", 0.0);
      cert.y_dot_v = j["verification"].value("y_dot_v", 0.0);
    }
    cert.problem_hash = j.value("problem_hash", std::string());
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed certificate JSON: ") + e.what());
  }
  validate(cert);
  return cert;
}

}  // namespace trinet
