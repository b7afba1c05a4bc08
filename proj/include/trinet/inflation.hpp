#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trinet/distribution.hpp"
#include "trinet/lp.hpp"
#include "trinet/sparse.hpp"
#include "trinet/triangle.hpp"

namespace trinet {

// Slots of the second-order inflation: a1 b1 c1 a2 b2 c2 a3 b3 c3 a4 b4 c4.
inline constexpr std::size_t kInflationSlots = 12;
// Slots whose joint marginal must equal p (x) p: the all-first-copy and all-second-copy triangles.
inline constexpr std::array<std::uint8_t, 6> kMarginalSlots{0, 1, 2, 9, 10, 11};
// Largest joint space materialized without an explicit override.
inline constexpr std::uint64_t kDefaultJointCapacity = std::uint64_t{1} << 22;

struct InflationSlot {
  Party party;
  std::array<std::uint8_t, 2> copies;  // copy (0 or 1) of each source in sources_of(party)
};

const std::array<InflationSlot, kInflationSlots>& inflation_slots();
std::string slot_name(std::size_t slot);

// The variable in slot k moves to slot perm[k].
using SlotPermutation = std::array<std::uint8_t, kInflationSlots>;

struct InflationSymmetry {
  SlotPermutation slots;
  // Induced permutation of the six marginal positions, present only when the element maps the
  // marginal slots onto themselves.
  std::optional<std::array<std::uint8_t, 6>> marginal;
};

class InflationProblem {
 public:
  explicit InflationProblem(std::uint32_t d);

  std::uint32_t d() const noexcept { return d_; }
  std::uint64_t joint_size() const noexcept { return joint_size_; }
  std::uint32_t marginal_size() const noexcept { return marginal_size_; }

  // Source-copy swaps for AB, AC, BC.
  static std::array<SlotPermutation, 3> generators();
  // Closure of the generators; element m is pi1^(m&1) pi2^(m>>1&1) pi3^(m>>2&1), identity first.
  const std::vector<InflationSymmetry>& group() const noexcept { return group_; }

  std::uint64_t apply(const SlotPermutation& g, std::uint64_t joint) const;
  std::uint32_t apply_marginal(const std::array<std::uint8_t, 6>& h, std::uint32_t row) const;
  std::uint32_t marginal_row(std::uint64_t joint) const;

 private:
  std::uint32_t d_;
  std::uint64_t joint_size_;
  std::uint32_t marginal_size_;
  std::array<std::uint64_t, kInflationSlots> place_;
  std::vector<InflationSymmetry> group_;
};

SparseMatrix build_marginalization_matrix(std::uint32_t d, std::uint64_t capacity = kDefaultJointCapacity);

struct SymmetryPair {
  IndexPermutation joint;
  std::optional<IndexPermutation> marginal;
};
std::vector<SymmetryPair> build_symmetry_group(std::uint32_t d, std::uint64_t capacity = kDefaultJointCapacity);

struct Partition {
  std::vector<std::uint32_t> class_of;
  std::vector<std::uint32_t> sizes;
  std::size_t count() const noexcept { return sizes.size(); }
  // Classes are numbered by first appearance in index order.
  static Partition from_labels(std::span<const std::uint64_t> labels);
};

Partition orbit_partition(std::span<const IndexPermutation> perms, std::uint64_t n);

// Orbit-collapsed matrix: rows and columns replaced by orbit means.
SparseMatrix twirl(const SparseMatrix& m, std::span<const SymmetryPair> group);
// Projection onto the symmetric subspace (same dimensions); idempotent.
SparseMatrix symmetrize(const SparseMatrix& m, std::span<const SymmetryPair> group);
// Each column replaced by the mean of its orbit under the joint action.
SparseMatrix symmetrize_columns(const SparseMatrix& m, std::span<const SymmetryPair> group);

// Joint-space orbits under the order-8 group, enumerated without materializing d^12 columns.
class ColumnOrbits {
 public:
  ColumnOrbits(const InflationProblem& problem, bool keep_joint_map);

  std::size_t count() const noexcept { return representative_.size(); }
  std::uint64_t representative(std::size_t k) const { return representative_[k]; }
  std::uint32_t orbit_size(std::size_t k) const { return offset_[k + 1] - offset_[k]; }
  std::span<const std::uint32_t> member_rows(std::size_t k) const {
    return {member_row_.data() + offset_[k], member_row_.data() + offset_[k + 1]};
  }
  bool has_joint_map() const noexcept { return !orbit_of_.empty(); }
  std::uint32_t orbit_of(std::uint64_t joint) const { return orbit_of_[joint]; }

 private:
  std::vector<std::uint64_t> representative_;
  std::vector<std::uint32_t> offset_;
  std::vector<std::uint32_t> member_row_;
  std::vector<std::uint32_t> orbit_of_;
};

// A symmetry of the marginal-pair index space: output position i takes the (relabelled)
// value found at input position source[i].
struct RowSymmetry {
  std::array<std::uint8_t, 6> source;
  std::vector<std::uint8_t> relabel;  // relabel[i * d + x]
};

std::uint32_t apply(const RowSymmetry& h, std::uint32_t row, std::uint32_t d);
// Marginal action of the order-8 group: identity and the swap of the two triangle copies.
std::vector<RowSymmetry> inflation_row_group(std::uint32_t d);
// Copy swap x party permutations x per-party outcome relabellings; every element is an inherent
// symmetry of the orbit-collapsed marginalization matrix.
std::vector<RowSymmetry> extended_row_group(std::uint32_t d);
std::vector<RowSymmetry> identity_row_group(std::uint32_t d);

struct CoefficientClasses {
  Partition classes;
  double tolerance = 0.0;
  std::size_t stabilizer_order = 0;  // group elements that fix the seed within tolerance
};

CoefficientClasses coefficient_classes(std::span<const double> seed, double tolerance,
                                       std::span<const RowSymmetry> group, std::uint32_t d);

enum class LpMode { Full, Twirled, Adapted };
std::string_view to_string(LpMode m);
LpMode lp_mode_from_string(std::string_view s);

struct AssembleOptions {
  std::optional<std::vector<double>> seed;  // adapted mode; defaults to the target itself
  double tolerance = 1e-12;
  bool allow_large = false;                 // permit full mode beyond kDefaultJointCapacity
};

// Constraint system A p' = v in class coordinates. Columns are orbit means of the
// marginalization matrix (one per joint index in full mode, one per orbit otherwise); rows are
// identity, copy-swap orbits, or coefficient classes, with v and A averaged over each class.
class InflationLp final : public ColumnSource {
 public:
  InflationLp(LpMode mode, std::uint32_t d, Partition rows, std::vector<double> marginal_target,
              std::shared_ptr<const ColumnOrbits> orbits, bool per_joint_columns);

  LpMode mode() const noexcept { return mode_; }
  std::uint32_t d() const noexcept { return d_; }
  const Partition& row_classes() const noexcept { return rows_; }
  const std::vector<double>& target() const noexcept { return target_; }
  const std::vector<double>& marginal_target() const noexcept { return marginal_target_; }
  const ColumnOrbits& orbits() const noexcept { return *orbits_; }

  std::size_t rows() const override { return rows_.count(); }
  std::uint64_t cols() const override;
  void column(std::uint64_t j, ColumnEntries& out) const override;
  void price(std::span<const double> y, std::span<double> out) const override;
  std::optional<std::vector<double>> unit_direction() const override;

  SparseMatrix materialize(std::uint64_t capacity = kDefaultJointCapacity) const;
  // Class coefficients -> per-row coefficients with y.(M G) = z.A and y.v = z.target.
  std::vector<double> detwirl(std::span<const double> z) const;

 private:
  LpMode mode_;
  std::uint32_t d_;
  Partition rows_;
  std::vector<double> marginal_target_;
  std::vector<double> target_;
  std::shared_ptr<const ColumnOrbits> orbits_;
  bool per_joint_columns_;
};

// p (x) p laid out over the marginal rows (a1,b1,c1,a4,b4,c4).
std::vector<double> marginal_target(const OutcomeDistribution& p, std::uint32_t d);

InflationLp assemble_lp(const InflationProblem& problem, const OutcomeDistribution& p, LpMode mode,
                        const AssembleOptions& options = {});
InflationLp assemble_lp(const InflationProblem& problem, std::shared_ptr<const ColumnOrbits> orbits,
                        const OutcomeDistribution& p, LpMode mode, const AssembleOptions& options = {});

// Checks y.(M G)_j >= -tol for every joint index by direct enumeration from the group
// definition, and returns the minimum found; independent of ColumnOrbits and the solver.
double min_inflation_slack(std::span<const double> y, std::uint32_t d);

}  // namespace trinet
