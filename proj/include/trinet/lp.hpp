#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "trinet/sparse.hpp"

namespace trinet {

// Column access for the simplex; implementations may generate columns on demand.
class ColumnSource {
 public:
  using ColumnEntries = std::vector<std::pair<std::uint32_t, double>>;

  virtual ~ColumnSource() = default;
  virtual std::size_t rows() const = 0;
  virtual std::uint64_t cols() const = 0;
  virtual void column(std::uint64_t j, ColumnEntries& out) const = 0;
  // out[j] = y . A_j for every column.
  virtual void price(std::span<const double> y, std::span<double> out) const = 0;
  // A vector u with u . A_j = 1 for all j, when the structure provides one.
  virtual std::optional<std::vector<double>> unit_direction() const { return std::nullopt; }
};

class SparseColumns final : public ColumnSource {
 public:
  explicit SparseColumns(const SparseMatrix& a);
  std::size_t rows() const override { return rows_; }
  std::uint64_t cols() const override { return start_.size() - 1; }
  void column(std::uint64_t j, ColumnEntries& out) const override;
  void price(std::span<const double> y, std::span<double> out) const override;

 private:
  std::size_t rows_;
  std::vector<std::uint64_t> start_;
  std::vector<std::uint32_t> row_;
  std::vector<double> value_;
};

enum class LpStatus { Feasible, Infeasible, Ambiguous };
std::string_view to_string(LpStatus s);

struct LpOptions {
  double feasibility_tolerance = 1e-8;    // optimum above -tol: feasible
  double infeasibility_threshold = 1e-6;  // optimum below -threshold: infeasible
  double residual_penalty = 1e3;          // cost on the artificial residual columns
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  std::size_t refactor_interval = 200;
  std::size_t max_iterations = 2'000'000;
  std::size_t columns_per_round = 0;      // 0: chosen from the row count
  std::size_t working_set_limit = 0;      // 0: chosen from the row count
  bool rescale_ambiguous = true;
  bool verbose = false;
};

struct LpResult {
  LpStatus status = LpStatus::Ambiguous;
  double objective = 0.0;  // optimum of max -1.s subject to A(x - s) = v, x, s >= 0 (always <= 0)
  std::vector<std::pair<std::uint64_t, double>> primal;  // nonzero x_j
  std::vector<double> dual;  // y with 0 <= y.A <= 1 and y.v = objective
  double primal_residual = 0.0;
  double min_reduced = 0.0;  // min_j y.A_j over all columns
  double max_reduced = 0.0;  // max_j y.A_j over all columns
  std::size_t iterations = 0;
  std::size_t pricing_rounds = 0;
  std::size_t refactorizations = 0;
  bool rescaled = false;
  std::chrono::duration<double> elapsed{0.0};
};

LpResult solve_feasibility(const ColumnSource& a, std::span<const double> v, const LpOptions& options = {});
LpResult solve_feasibility(const SparseMatrix& a, std::span<const double> v, const LpOptions& options = {});

struct FarkasCertificate {
  std::vector<double> y;  // y.A >= 0 componentwise and y.v < 0
  double margin = 0.0;    // -y.v
  double min_slack = 0.0; // min_j y.A_j
};

// From an infeasible solve; the dual is shifted along unit_direction() (when available) so
// that every y.A_j is nonnegative in floating point.
FarkasCertificate extract_certificate(const ColumnSource& a, std::span<const double> v, const LpResult& result);
FarkasCertificate extract_certificate(const SparseMatrix& a, std::span<const double> v,
                                      const LpOptions& options = {});

// Solver-independent check: min(y.A) >= -tol and y.v < 0.
bool verify_certificate(std::span<const double> y, const SparseMatrix& a, std::span<const double> v,
                        double tol = 1e-10);

}  // namespace trinet
