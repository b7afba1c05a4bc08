#include "trinet/entropic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "trinet/error.hpp"

namespace trinet {

namespace {

std::vector<std::string> join(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::string> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

double entropy(const OutcomeDistribution& p, std::span<const std::string> vars) {
  if (vars.empty()) return 0.0;
  return shannon_entropy(marginal(p, vars).probabilities());
}

double entropy(const OutcomeDistribution& p, std::initializer_list<std::string> vars) {
  return entropy(p, std::span<const std::string>(vars.begin(), vars.size()));
}

double conditional_entropy(const OutcomeDistribution& p, std::span<const std::string> x,
                           std::span<const std::string> given) {
  return entropy(p, join(x, given)) - entropy(p, given);
}

double mutual_info(const OutcomeDistribution& p, std::span<const std::string> x, std::span<const std::string> y) {
  return entropy(p, x) + entropy(p, y) - entropy(p, join(x, y));
}

double tripartite_info(const OutcomeDistribution& p, std::span<const std::string> x, std::span<const std::string> y,
                       std::span<const std::string> z) {
  const auto xy = join(x, y), xz = join(x, z), yz = join(y, z), xyz = join(xy, z);
  return entropy(p, xyz) - entropy(p, xy) - entropy(p, xz) - entropy(p, yz) + entropy(p, x) + entropy(p, y) +
         entropy(p, z);
}

ThetaTerms theta_terms(const OutcomeDistribution& q) {
  const auto m = marginal(q, {"a0", "b0", "c"});
  ThetaTerms t;
  t.h_a0b0c = entropy(m, {"a0", "b0", "c"});
  t.h_a0b0 = entropy(m, {"a0", "b0"});
  t.h_a0c = entropy(m, {"a0", "c"});
  t.h_b0c = entropy(m, {"b0", "c"});
  t.h_a0 = entropy(m, {"a0"});
  t.h_b0 = entropy(m, {"b0"});
  t.h_c = entropy(m, {"c"});
  t.i_a0b0c = t.h_a0b0c - t.h_a0b0 - t.h_a0c - t.h_b0c + t.h_a0 + t.h_b0 + t.h_c;
  t.i_a0c = t.h_a0 + t.h_c - t.h_a0c;
  t.i_b0c = t.h_b0 + t.h_c - t.h_b0c;
  t.terms[0] = t.h_a0b0c - t.h_c;
  t.terms[1] = t.h_a0b0 - t.i_a0b0c - t.i_a0c - t.i_b0c;
  t.terms[2] = t.h_a0b0 + t.h_c - 2 * t.i_a0b0c - 2 * t.i_a0c - 2 * t.i_b0c;
  t.minimum = *std::min_element(t.terms.begin(), t.terms.end());
  return t;
}

double theta(const OutcomeDistribution& q) { return std::max(0.0, theta_terms(q).minimum); }

double chsh(const ConditionalDistribution& cond) {
  if (cond.condition_count() != 4 || cond.outcome_count() != 4)
    throw DomainError("CHSH needs binary settings and binary outcomes");
  std::array<double, 4> e{};
  for (std::size_t xy = 0; xy < 4; ++xy) {
    if (!cond.defined(xy)) throw DomainError("CHSH conditioning cell has zero probability");
    const auto s = cond.slice(xy);
    e[xy] = s[0] - s[1] - s[2] + s[3];
  }
  const double total = e[0] + e[1] + e[2] + e[3];
  double best = 0.0;
  for (double exy : e) best = std::max(best, std::abs(total - 2 * exy));
  return best;
}

double witness_value(double s_chsh, double theta) {
  return 2.0 - s_chsh + std::sqrt(16.0 * theta / std::numbers::log2e);
}

EntropicReport entropic_witness(const OutcomeDistribution& p, std::span<const PairSplit> splits) {
  if (splits.size() < 2) throw DomainError("entropic witness needs splits for a and b");
  EntropicReport r;
  r.s_chsh = chsh(bayesian_inversion(p, splits));
  const auto q = split_pairs(p, splits.subspan(0, 2));
  r.theta_terms = theta_terms(q);
  r.theta_clamped = r.theta_terms.minimum < 0.0;
  r.theta = std::max(0.0, r.theta_terms.minimum);
  r.e = witness_value(r.s_chsh, r.theta);
  return r;
}

EntropicReport entropic_witness(const OutcomeDistribution& p) {
  const auto s = triangle_splits();
  return entropic_witness(p, s);
}

WitnessReport entropic_mc_error(std::span<const std::uint64_t> counts, std::size_t trials, std::uint64_t seed) {
  if (counts.size() != 64) throw DomainError("entropic witness needs a 64-cell counts table");
  const auto vars = triangle_variables(4);
  return poisson_mc(
      [&](std::span<const double> f) {
        const OutcomeDistribution p(vars, std::vector<double>(f.begin(), f.end()), kEmpiricalTolerance);
        return entropic_witness(p).e;
      },
      counts, trials, seed);
}

std::string to_json(const EntropicReport& r) {
  const auto& t = r.theta_terms;
  nlohmann::json j;
  j["S_chsh"] = r.s_chsh;
  j["theta"] = r.theta;
  j["theta_terms"] = t.terms;
  j["theta_minimum"] = t.minimum;
  j["theta_clamped"] = r.theta_clamped;
  j["E"] = r.e;
  j["entropies"] = {{"H(a0,b0,C)", t.h_a0b0c}, {"H(a0,b0)", t.h_a0b0}, {"H(a0,C)", t.h_a0c},
                    {"H(b0,C)", t.h_b0c},     {"H(a0)", t.h_a0},       {"H(b0)", t.h_b0},
                    {"H(C)", t.h_c},          {"I(a0:b0:C)", t.i_a0b0c}, {"I(a0:C)", t.i_a0c},
                    {"I(b0:C)", t.i_b0c}};
  j["units"] = "bits";
  return j.dump(1);
}

}  // namespace trinet
