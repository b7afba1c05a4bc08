#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace trinet {

class IndexPermutation {
 public:
  explicit IndexPermutation(std::vector<std::uint64_t> image);
  static IndexPermutation identity(std::uint64_t n);

  std::uint64_t size() const noexcept { return image_.size(); }
  std::uint64_t operator()(std::uint64_t i) const { return image_[i]; }
  const std::vector<std::uint64_t>& image() const noexcept { return image_; }

  // (this * other)(i) = this(other(i))
  IndexPermutation compose(const IndexPermutation& other) const;
  IndexPermutation inverse() const;
  bool is_identity() const noexcept;
  friend bool operator==(const IndexPermutation&, const IndexPermutation&) = default;

 private:
  std::vector<std::uint64_t> image_;
};

// Coordinate-format sparse matrix kept sorted by (row, col) with no duplicates or zeros.
class SparseMatrix {
 public:
  struct Entry {
    std::uint64_t row;
    std::uint64_t col;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseMatrix(std::uint64_t rows, std::uint64_t cols, std::vector<Entry> entries);

  std::uint64_t rows() const noexcept { return rows_; }
  std::uint64_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::vector<double> multiply(std::span<const double> x) const;        // A x
  std::vector<double> left_multiply(std::span<const double> y) const;   // y^T A
  std::vector<double> column_sums() const;
  std::vector<double> row_sums() const;

  // Entry (r, c) moves to (row_perm(r), col_perm(c)).
  SparseMatrix permuted(const IndexPermutation& row_perm, const IndexPermutation& col_perm) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

  // Text layout: "rows,cols,nnz" header then one "row,col,value" line per entry.
  void write_csv(std::ostream& os) const;
  static SparseMatrix read_csv(std::istream& is);
  // Binary layout, little-endian: u64 rows, u64 cols, u64 nnz, then nnz x (u64 row, u64 col, f64 value).
  void write_binary(std::ostream& os) const;
  static SparseMatrix read_binary(std::istream& is);

 private:
  std::uint64_t rows_;
  std::uint64_t cols_;
  std::vector<Entry> entries_;
};

}  // namespace trinet
