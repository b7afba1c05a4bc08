#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trinet/random.hpp"

namespace trinet {

inline constexpr double kExactTolerance = 1e-12;
inline constexpr double kEmpiricalTolerance = 1e-9;

struct Variable {
  std::string name;
  std::size_t cardinality = 0;
  friend bool operator==(const Variable&, const Variable&) = default;
};

std::size_t outcome_space_size(std::span<const Variable> variables);

// Joint table over named discrete variables, row-major with the first variable outermost.
class OutcomeDistribution {
 public:
  OutcomeDistribution(std::vector<Variable> variables, std::vector<double> probabilities,
                      double tolerance = kExactTolerance);

  static OutcomeDistribution uniform(std::vector<Variable> variables);
  static OutcomeDistribution point_mass(std::vector<Variable> variables, std::size_t index);

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  std::size_t size() const noexcept { return probabilities_.size(); }
  double operator[](std::size_t index) const { return probabilities_[index]; }

  double at(std::span<const std::size_t> outcome) const;
  double at(std::initializer_list<std::size_t> outcome) const {
    return at(std::span<const std::size_t>(outcome.begin(), outcome.size()));
  }
  std::size_t index_of(std::span<const std::size_t> outcome) const;
  std::vector<std::size_t> outcome_of(std::size_t index) const;
  std::size_t position(std::string_view name) const;
  bool has_variable(std::string_view name) const noexcept;

 private:
  std::vector<Variable> variables_;
  std::vector<double> probabilities_;
};

// a, b, c with cardinality d each.
std::vector<Variable> triangle_variables(std::size_t d = 4);

// Table of p(outcomes | conditions); a slice is absent when its condition has zero mass.
class ConditionalDistribution {
 public:
  ConditionalDistribution(std::vector<Variable> conditions, std::vector<Variable> outcomes,
                          std::vector<std::optional<std::vector<double>>> slices);

  const std::vector<Variable>& conditions() const noexcept { return conditions_; }
  const std::vector<Variable>& outcomes() const noexcept { return outcomes_; }
  std::size_t condition_count() const noexcept { return slices_.size(); }
  std::size_t outcome_count() const noexcept { return outcome_count_; }

  bool defined(std::size_t condition) const;
  std::span<const double> slice(std::size_t condition) const;
  double at(std::size_t condition, std::size_t outcome) const { return slice(condition)[outcome]; }

 private:
  std::vector<Variable> conditions_;
  std::vector<Variable> outcomes_;
  std::size_t outcome_count_ = 0;
  std::vector<std::optional<std::vector<double>>> slices_;
};

OutcomeDistribution mix_with_uniform(const OutcomeDistribution& p, double v);
OutcomeDistribution tensor_square(const OutcomeDistribution& p);
OutcomeDistribution marginal(const OutcomeDistribution& p, std::span<const std::string> keep);
OutcomeDistribution marginal(const OutcomeDistribution& p, std::initializer_list<std::string> keep);
ConditionalDistribution conditional(const OutcomeDistribution& p, std::span<const std::string> outcomes,
                                    std::span<const std::string> conditions);

// A composite variable viewed as a pair: value = cardinality(low) * high + low.
struct PairSplit {
  std::string composite;
  std::string high;
  std::string low;
};

std::vector<PairSplit> triangle_splits();
OutcomeDistribution split_pairs(const OutcomeDistribution& p, std::span<const PairSplit> splits);

// p(a1, b1 | a0, b0) from p over composite a, b (c is summed out).
ConditionalDistribution bayesian_inversion(const OutcomeDistribution& p,
                                           std::span<const PairSplit> splits);
ConditionalDistribution bayesian_inversion(const OutcomeDistribution& p);

// Sources are ordered AB, AC, BC throughout.
class ClassicalTriangleModel {
 public:
  // Response tables are row-major: response_a[(l_ab * |AC| + l_ac) * d_a + a],
  // response_b[(l_ab * |BC| + l_bc) * d_b + b], response_c[(l_ac * |BC| + l_bc) * d_c + c].
  ClassicalTriangleModel(std::array<std::vector<double>, 3> priors, std::array<std::size_t, 3> outcome_cards,
                         std::vector<double> response_a, std::vector<double> response_b,
                         std::vector<double> response_c);

  std::array<std::size_t, 3> latent_cards() const noexcept;
  const std::array<std::vector<double>, 3>& priors() const noexcept { return priors_; }
  const std::array<std::size_t, 3>& outcome_cards() const noexcept { return outcome_cards_; }
  std::span<const double> response_a(std::size_t l_ab, std::size_t l_ac) const;
  std::span<const double> response_b(std::size_t l_ab, std::size_t l_bc) const;
  std::span<const double> response_c(std::size_t l_ac, std::size_t l_bc) const;

 private:
  std::array<std::vector<double>, 3> priors_;
  std::array<std::size_t, 3> outcome_cards_;
  std::vector<double> response_a_, response_b_, response_c_;
};

OutcomeDistribution realize_classical(const ClassicalTriangleModel& model);
ClassicalTriangleModel random_classical_model(std::array<std::size_t, 3> latent_cards, std::uint64_t seed,
                                              std::size_t outcome_card = 4);

enum class Estimator { RawFrequency, AddHalf };

std::vector<std::uint64_t> sample_counts(const OutcomeDistribution& p, std::uint64_t n, Rng& rng);
std::vector<std::uint64_t> sample_classical(const ClassicalTriangleModel& model, std::uint64_t n, Rng& rng);
OutcomeDistribution from_counts(std::vector<Variable> variables, std::span<const std::uint64_t> counts,
                                Estimator estimator = Estimator::RawFrequency);

double total_variation(const OutcomeDistribution& p, const OutcomeDistribution& q);

// {"variables": [{"name", "cardinality"}...], "probabilities": [...]} with the row-major table.
std::string to_json(const OutcomeDistribution& p);
OutcomeDistribution distribution_from_json(const std::string& text, double tolerance = kEmpiricalTolerance);

}  // namespace trinet
