#include "trinet/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "trinet/error.hpp"

namespace trinet {

namespace {

void check_variables(std::span<const Variable> variables) {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].cardinality == 0) throw DomainError("variable '" + variables[i].name + "' has cardinality 0");
    for (std::size_t j = 0; j < i; ++j)
      if (variables[j].name == variables[i].name)
        throw DomainError("duplicate variable name '" + variables[i].name + "'");
  }
}

void check_probability_vector(std::span<const double> values, double tolerance, std::string_view what) {
  double sum = 0.0;
  for (double x : values) {
    if (!std::isfinite(x) || x < 0.0) {
      std::ostringstream os;
      os << what << ": entry " << x << " is not a nonnegative finite number";
      throw DomainError(os.str());
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": entries sum to " << sum;
    throw DomainError(os.str());
  }
}

std::vector<std::size_t> strides_of(std::span<const Variable> variables) {
  std::vector<std::size_t> strides(variables.size());
  std::size_t s = 1;
  for (std::size_t i = variables.size(); i-- > 0;) {
    strides[i] = s;
    s *= variables[i].cardinality;
  }
  return strides;
}

// Maps each index of p to the index of the same outcome in the table over `keep`.
std::vector<std::size_t> projection_map(const OutcomeDistribution& p, std::span<const std::size_t> keep_pos) {
  const auto& vars = p.variables();
  std::vector<Variable> kept;
  for (auto k : keep_pos) kept.push_back(vars[k]);
  const auto kept_strides = strides_of(kept);

  std::vector<std::size_t> map(p.size());
  std::vector<std::size_t> digits(vars.size(), 0);
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    std::size_t target = 0;
    for (std::size_t k = 0; k < keep_pos.size(); ++k) target += digits[keep_pos[k]] * kept_strides[k];
    map[idx] = target;
    for (std::size_t v = vars.size(); v-- > 0;) {
      if (++digits[v] < vars[v].cardinality) break;
      digits[v] = 0;
    }
  }
  return map;
}

std::vector<std::size_t> positions_of(const OutcomeDistribution& p, std::span<const std::string> names) {
  std::vector<std::size_t> pos;
  pos.reserve(names.size());
  for (const auto& n : names) {
    auto k = p.position(n);
    if (std::find(pos.begin(), pos.end(), k) != pos.end()) throw DomainError("variable '" + n + "' listed twice");
    pos.push_back(k);
  }
  return pos;
}

std::vector<double> dirichlet(std::size_t n, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(n);
  double sum = 0.0;
  for (auto& x : out) {
    x = gamma(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
    return out;
  }
  for (auto& x : out) x /= sum;
  return out;
}

std::size_t draw(std::span<const double> probs, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return probs.size() - 1;
}

}  // namespace

std::size_t outcome_space_size(std::span<const Variable> variables) {
  std::size_t n = 1;
  for (const auto& v : variables) {
    if (v.cardinality != 0 && n > std::numeric_limits<std::size_t>::max() / v.cardinality)
      throw CapacityError("outcome space size overflows 64-bit indexing");
    n *= v.cardinality;
  }
  return n;
}

OutcomeDistribution::OutcomeDistribution(std::vector<Variable> variables, std::vector<double> probabilities,
                                         double tolerance)
    : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
  check_variables(variables_);
  if (probabilities_.size() != outcome_space_size(variables_))
    throw DomainError("probability table length " + std::to_string(probabilities_.size()) +
                      " does not match outcome space size " + std::to_string(outcome_space_size(variables_)));
  check_probability_vector(probabilities_, tolerance, "distribution");
}

OutcomeDistribution OutcomeDistribution::uniform(std::vector<Variable> variables) {
  const auto n = outcome_space_size(variables);
  return OutcomeDistribution(std::move(variables), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

OutcomeDistribution OutcomeDistribution::point_mass(std::vector<Variable> variables, std::size_t index) {
  const auto n = outcome_space_size(variables);
  if (index >= n) throw DomainError("point mass index out of range");
  std::vector<double> probs(n, 0.0);
  probs[index] = 1.0;
  return OutcomeDistribution(std::move(variables), std::move(probs));
}

std::size_t OutcomeDistribution::index_of(std::span<const std::size_t> outcome) const {
  if (outcome.size() != variables_.size()) throw DomainError("outcome arity does not match variable count");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    if (outcome[i] >= variables_[i].cardinality) throw DomainError("outcome value out of range");
    idx = idx * variables_[i].cardinality + outcome[i];
  }
  return idx;
}

double OutcomeDistribution::at(std::span<const std::size_t> outcome) const {
  return probabilities_[index_of(outcome)];
}

std::vector<std::size_t> OutcomeDistribution::outcome_of(std::size_t index) const {
  if (index >= size()) throw DomainError("index out of range");
  std::vector<std::size_t> out(variables_.size());
  for (std::size_t i = variables_.size(); i-- > 0;) {
    out[i] = index % variables_[i].cardinality;
    index /= variables_[i].cardinality;
  }
  return out;
}

std::size_t OutcomeDistribution::position(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  throw DomainError("unknown variable '" + std::string(name) + "'");
}

bool OutcomeDistribution::has_variable(std::string_view name) const noexcept {
  return std::any_of(variables_.begin(), variables_.end(), [&](const Variable& v) { return v.name == name; });
}

std::vector<Variable> triangle_variables(std::size_t d) { return {{"a", d}, {"b", d}, {"c", d}}; }

ConditionalDistribution::ConditionalDistribution(std::vector<Variable> conditions, std::vector<Variable> outcomes,
                                                 std::vector<std::optional<std::vector<double>>> slices)
    : conditions_(std::move(conditions)), outcomes_(std::move(outcomes)), slices_(std::move(slices)) {
  check_variables(conditions_);
  check_variables(outcomes_);
  outcome_count_ = outcome_space_size(outcomes_);
  if (slices_.size() != outcome_space_size(conditions_)) throw DomainError("conditional slice count mismatch");
  for (const auto& s : slices_) {
    if (!s) continue;
    if (s->size() != outcome_count_) throw DomainError("conditional slice length mismatch");
    check_probability_vector(*s, kExactTolerance, "conditional slice");
  }
}

bool ConditionalDistribution::defined(std::size_t condition) const {
  if (condition >= slices_.size()) throw DomainError("condition index out of range");
  return slices_[condition].has_value();
}

std::span<const double> ConditionalDistribution::slice(std::size_t condition) const {
  if (!defined(condition))
    throw DomainError("conditional is undefined at condition " + std::to_string(condition) +
                      " (zero-probability conditioning event)");
  return *slices_[condition];
}

OutcomeDistribution mix_with_uniform(const OutcomeDistribution& p, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("mixing weight must lie in [0,1]");
  const double u = (1.0 - v) / static_cast<double>(p.size());
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = v * p[i] + u;
  return OutcomeDistribution(p.variables(), std::move(out));
}

OutcomeDistribution tensor_square(const OutcomeDistribution& p) {
  std::vector<Variable> vars;
  for (int copy = 1; copy <= 2; ++copy)
    for (const auto& v : p.variables()) vars.push_back({v.name + "." + std::to_string(copy), v.cardinality});
  const auto n = p.size();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = p[i] * p[j];
  return OutcomeDistribution(std::move(vars), std::move(out));
}

OutcomeDistribution marginal(const OutcomeDistribution& p, std::span<const std::string> keep) {
  const auto pos = positions_of(p, keep);
  std::vector<Variable> kept;
  for (auto k : pos) kept.push_back(p.variables()[k]);
  std::vector<double> out(outcome_space_size(kept), 0.0);
  const auto map = projection_map(p, pos);
  for (std::size_t i = 0; i < p.size(); ++i) out[map[i]] += p[i];
  return OutcomeDistribution(std::move(kept), std::move(out), 1e-9);
}

OutcomeDistribution marginal(const OutcomeDistribution& p, std::initializer_list<std::string> keep) {
  return marginal(p, std::span<const std::string>(keep.begin(), keep.size()));
}

ConditionalDistribution conditional(const OutcomeDistribution& p, std::span<const std::string> outcomes,
                                    std::span<const std::string> conditions) {
  std::vector<std::string> joint(conditions.begin(), conditions.end());
  joint.insert(joint.end(), outcomes.begin(), outcomes.end());
  const auto j = marginal(p, joint);
  const auto pc = marginal(p, conditions);
  const std::size_t n_out = j.size() / pc.size();

  std::vector<std::optional<std::vector<double>>> slices(pc.size());
  for (std::size_t c = 0; c < pc.size(); ++c) {
    double mass = 0.0;
    for (std::size_t o = 0; o < n_out; ++o) mass += j[c * n_out + o];
    if (mass <= 0.0) continue;
    std::vector<double> s(n_out);
    for (std::size_t o = 0; o < n_out; ++o) s[o] = j[c * n_out + o] / mass;
    slices[c] = std::move(s);
  }
  std::vector<Variable> cond_vars(pc.variables());
  std::vector<Variable> out_vars(j.variables().begin() + static_cast<std::ptrdiff_t>(conditions.size()),
                                 j.variables().end());
  return ConditionalDistribution(std::move(cond_vars), std::move(out_vars), std::move(slices));
}

std::vector<PairSplit> triangle_splits() {
  return {{"a", "a0", "a1"}, {"b", "b0", "b1"}, {"c", "c0", "c1"}};
}

OutcomeDistribution split_pairs(const OutcomeDistribution& p, std::span<const PairSplit> splits) {
  std::vector<Variable> vars;
  for (const auto& v : p.variables()) {
    auto it = std::find_if(splits.begin(), splits.end(), [&](const PairSplit& s) { return s.composite == v.name; });
    if (it == splits.end()) {
      vars.push_back(v);
      continue;
    }
    if (v.cardinality != 4) throw DomainError("only quaternary variables can be split into bit pairs");
    vars.push_back({it->high, 2});
    vars.push_back({it->low, 2});
  }
  for (const auto& s : splits) (void)p.position(s.composite);
  std::vector<double> probs(p.probabilities().begin(), p.probabilities().end());
  return OutcomeDistribution(std::move(vars), std::move(probs), 1e-9);
}

ConditionalDistribution bayesian_inversion(const OutcomeDistribution& p, std::span<const PairSplit> splits) {
  const auto q = split_pairs(p, splits);
  if (splits.size() < 2) throw DomainError("bayesian inversion needs splits for a and b");
  const std::array<std::string, 2> outcomes{splits[0].low, splits[1].low};
  const std::array<std::string, 2> conditions{splits[0].high, splits[1].high};
  return conditional(q, outcomes, conditions);
}

ConditionalDistribution bayesian_inversion(const OutcomeDistribution& p) {
  const auto s = triangle_splits();
  return bayesian_inversion(p, s);
}

ClassicalTriangleModel::ClassicalTriangleModel(std::array<std::vector<double>, 3> priors,
                                               std::array<std::size_t, 3> outcome_cards,
                                               std::vector<double> response_a, std::vector<double> response_b,
                                               std::vector<double> response_c)
    : priors_(std::move(priors)),
      outcome_cards_(outcome_cards),
      response_a_(std::move(response_a)),
      response_b_(std::move(response_b)),
      response_c_(std::move(response_c)) {
  for (const auto& prior : priors_) {
    if (prior.empty()) throw DomainError("latent cardinality must be positive");
    check_probability_vector(prior, kExactTolerance, "latent prior");
  }
  for (auto d : outcome_cards_)
    if (d == 0) throw DomainError("outcome cardinality must be positive");
  const auto [n_ab, n_ac, n_bc] = latent_cards();
  auto check_table = [](const std::vector<double>& table, std::size_t rows, std::size_t d, std::string_view what) {
    if (table.size() != rows * d) throw DomainError(std::string(what) + ": response table has wrong size");
    for (std::size_t r = 0; r < rows; ++r)
      check_probability_vector(std::span<const double>(table).subspan(r * d, d), kExactTolerance, what);
  };
  check_table(response_a_, n_ab * n_ac, outcome_cards_[0], "response of a");
  check_table(response_b_, n_ab * n_bc, outcome_cards_[1], "response of b");
  check_table(response_c_, n_ac * n_bc, outcome_cards_[2], "response of c");
}

std::array<std::size_t, 3> ClassicalTriangleModel::latent_cards() const noexcept {
  return {priors_[0].size(), priors_[1].size(), priors_[2].size()};
}

std::span<const double> ClassicalTriangleModel::response_a(std::size_t l_ab, std::size_t l_ac) const {
  const auto d = outcome_cards_[0];
  return std::span<const double>(response_a_).subspan((l_ab * priors_[1].size() + l_ac) * d, d);
}

std::span<const double> ClassicalTriangleModel::response_b(std::size_t l_ab, std::size_t l_bc) const {
  const auto d = outcome_cards_[1];
  return std::span<const double>(response_b_).subspan((l_ab * priors_[2].size() + l_bc) * d, d);
}

std::span<const double> ClassicalTriangleModel::response_c(std::size_t l_ac, std::size_t l_bc) const {
  const auto d = outcome_cards_[2];
  return std::span<const double>(response_c_).subspan((l_ac * priors_[2].size() + l_bc) * d, d);
}

OutcomeDistribution realize_classical(const ClassicalTriangleModel& model) {
  const auto [n_ab, n_ac, n_bc] = model.latent_cards();
  const auto [da, db, dc] = model.outcome_cards();
  const auto& pri = model.priors();
  std::vector<double> out(da * db * dc, 0.0);
  for (std::size_t i = 0; i < n_ab; ++i)
    for (std::size_t j = 0; j < n_ac; ++j)
      for (std::size_t k = 0; k < n_bc; ++k) {
        const double w = pri[0][i] * pri[1][j] * pri[2][k];
        if (w == 0.0) continue;
        const auto ra = model.response_a(i, j);
        const auto rb = model.response_b(i, k);
        const auto rc = model.response_c(j, k);
        for (std::size_t a = 0; a < da; ++a) {
          if (ra[a] == 0.0) continue;
          for (std::size_t b = 0; b < db; ++b) {
            const double wab = w * ra[a] * rb[b];
            if (wab == 0.0) continue;
            double* row = &out[(a * db + b) * dc];
            for (std::size_t c = 0; c < dc; ++c) row[c] += wab * rc[c];
          }
        }
      }
  return OutcomeDistribution({{"a", da}, {"b", db}, {"c", dc}}, std::move(out));
}

ClassicalTriangleModel random_classical_model(std::array<std::size_t, 3> latent_cards, std::uint64_t seed,
                                              std::size_t outcome_card) {
  for (auto n : latent_cards)
    if (n == 0) throw DomainError("latent cardinality must be positive");
  if (outcome_card == 0) throw DomainError("outcome cardinality must be positive");
  Rng rng = make_rng(seed, 0x7269616e);
  std::array<std::vector<double>, 3> priors;
  for (std::size_t s = 0; s < 3; ++s) priors[s] = dirichlet(latent_cards[s], 1.0, rng);
  // Low concentration keeps responses close to deterministic, which gives structured distributions.
  auto table = [&](std::size_t rows) {
    std::vector<double> t;
    for (std::size_t r = 0; r < rows; ++r) {
      auto col = dirichlet(outcome_card, 0.3, rng);
      t.insert(t.end(), col.begin(), col.end());
    }
    return t;
  };
  auto ra = table(latent_cards[0] * latent_cards[1]);
  auto rb = table(latent_cards[0] * latent_cards[2]);
  auto rc = table(latent_cards[1] * latent_cards[2]);
  return ClassicalTriangleModel(std::move(priors), {outcome_card, outcome_card, outcome_card}, std::move(ra),
                                std::move(rb), std::move(rc));
}

std::vector<std::uint64_t> sample_counts(const OutcomeDistribution& p, std::uint64_t n, Rng& rng) {
  std::vector<std::uint64_t> counts(p.size(), 0);
  std::uint64_t remaining = n;
  double mass = 1.0;
  for (std::size_t i = 0; i < p.size() && remaining > 0; ++i) {
    if (i + 1 == p.size()) {
      counts[i] = remaining;
      break;
    }
    const double q = mass > 0.0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
    const auto k = std::binomial_distribution<std::uint64_t>(remaining, q)(rng);
    counts[i] = k;
    remaining -= k;
    mass -= p[i];
  }
  return counts;
}

std::vector<std::uint64_t> sample_classical(const ClassicalTriangleModel& model, std::uint64_t n, Rng& rng) {
  const auto [da, db, dc] = model.outcome_cards();
  std::vector<std::uint64_t> counts(da * db * dc, 0);
  const auto& pri = model.priors();
  for (std::uint64_t s = 0; s < n; ++s) {
    const auto i = draw(pri[0], rng);
    const auto j = draw(pri[1], rng);
    const auto k = draw(pri[2], rng);
    const auto a = draw(model.response_a(i, j), rng);
    const auto b = draw(model.response_b(i, k), rng);
    const auto c = draw(model.response_c(j, k), rng);
    ++counts[(a * db + b) * dc + c];
  }
  return counts;
}

OutcomeDistribution from_counts(std::vector<Variable> variables, std::span<const std::uint64_t> counts,
                                Estimator estimator) {
  if (counts.size() != outcome_space_size(variables)) throw DomainError("counts table size mismatch");
  const double pseudo = estimator == Estimator::AddHalf ? 0.5 : 0.0;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                       [](double acc, std::uint64_t c) { return acc + static_cast<double>(c); }) +
                       pseudo * static_cast<double>(counts.size());
  if (total <= 0.0) throw DomainError("counts table is empty");
  std::vector<double> probs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) probs[i] = (static_cast<double>(counts[i]) + pseudo) / total;
  return OutcomeDistribution(std::move(variables), std::move(probs), kEmpiricalTolerance);
}

double total_variation(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.size() != q.size()) throw DomainError("total variation of distributions over different spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

std::string to_json(const OutcomeDistribution& p) {
  nlohmann::ordered_json j;
  j["variables"] = nlohmann::ordered_json::array();
  for (const auto& v : p.variables()) j["variables"].push_back({{"name", v.name}, {"cardinality", v.cardinality}});
  j["probabilities"] = std::vector<double>(p.probabilities().begin(), p.probabilities().end());
  return j.dump(1);
}

OutcomeDistribution distribution_from_json(const std::string& text, double tolerance) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<Variable> vars;
    for (const auto& v : j.at("variables")) vars.push_back({v.at("name").get<std::string>(), v.at("cardinality").get<std::size_t>()});
    return OutcomeDistribution(std::move(vars), j.at("probabilities").get<std::vector<double>>(), tolerance);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("distribution JSON: ") + e.what());
  }
}

}  // namespace trinet
