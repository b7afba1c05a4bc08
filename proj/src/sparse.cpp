#include "trinet/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "trinet/error.hpp"

namespace trinet {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "binary layout assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw DomainError("truncated binary sparse matrix");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

IndexPermutation::IndexPermutation(std::vector<std::uint64_t> image) : image_(std::move(image)) {
  std::vector<bool> seen(image_.size(), false);
  for (auto x : image_) {
    if (x >= image_.size() || seen[x]) throw DomainError("index map is not a permutation");
    seen[x] = true;
  }
}

IndexPermutation IndexPermutation::identity(std::uint64_t n) {
  std::vector<std::uint64_t> image(n);
  for (std::uint64_t i = 0; i < n; ++i) image[i] = i;
  return IndexPermutation(std::move(image));
}

IndexPermutation IndexPermutation::compose(const IndexPermutation& other) const {
  if (other.size() != size()) throw DomainError("composing permutations of different sizes");
  std::vector<std::uint64_t> image(size());
  for (std::uint64_t i = 0; i < size(); ++i) image[i] = image_[other.image_[i]];
  return IndexPermutation(std::move(image));
}

IndexPermutation IndexPermutation::inverse() const {
  std::vector<std::uint64_t> image(size());
  for (std::uint64_t i = 0; i < size(); ++i) image[image_[i]] = i;
  return IndexPermutation(std::move(image));
}

bool IndexPermutation::is_identity() const noexcept {
  for (std::uint64_t i = 0; i < size(); ++i)
    if (image_[i] != i) return false;
  return true;
}

SparseMatrix::SparseMatrix(std::uint64_t rows, std::uint64_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols) {
  for (const auto& e : entries) {
    if (e.row >= rows_ || e.col >= cols_) throw DomainError("sparse entry index out of range");
    if (!std::isfinite(e.value)) throw DomainError("sparse entry is not finite");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });
  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col)
      entries_.back().value += e.value;
    else
      entries_.push_back(e);
  }
  std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw DomainError("matrix-vector dimension mismatch");
  std::vector<double> out(rows_, 0.0);
  for (const auto& e : entries_) out[e.row] += e.value * x[e.col];
  return out;
}

std::vector<double> SparseMatrix::left_multiply(std::span<const double> y) const {
  if (y.size() != rows_) throw DomainError("vector-matrix dimension mismatch");
  std::vector<double> out(cols_, 0.0);
  for (const auto& e : entries_) out[e.col] += y[e.row] * e.value;
  return out;
}

std::vector<double> SparseMatrix::column_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (const auto& e : entries_) out[e.col] += e.value;
  return out;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (const auto& e : entries_) out[e.row] += e.value;
  return out;
}

SparseMatrix SparseMatrix::permuted(const IndexPermutation& row_perm, const IndexPermutation& col_perm) const {
  if (row_perm.size() != rows_ || col_perm.size() != cols_) throw DomainError("permutation size mismatch");
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back({row_perm(e.row), col_perm(e.col), e.value});
  return SparseMatrix(rows_, cols_, std::move(out));
}

void SparseMatrix::write_csv(std::ostream& os) const {
  os << rows_ << ',' << cols_ << ',' << entries_.size() << '\n';
  os.precision(17);
  for (const auto& e : entries_) os << e.row << ',' << e.col << ',' << e.value << '\n';
}

SparseMatrix SparseMatrix::read_csv(std::istream& is) {
  auto parse_line = [](const std::string& line, auto&... out) {
    std::istringstream ls(line);
    char comma = 0;
    bool first = true;
    bool ok = true;
    (([&] {
       if (!first) ok = ok && (ls >> comma) && comma == ',';
       first = false;
       ok = ok && static_cast<bool>(ls >> out);
     }()),
     ...);
    if (!ok) throw DomainError("malformed sparse matrix line: " + line);
  };
  std::string line;
  if (!std::getline(is, line)) throw DomainError("missing sparse matrix header");
  std::uint64_t rows = 0, cols = 0, nnz = 0;
  parse_line(line, rows, cols, nnz);
  std::vector<Entry> entries;
  entries.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    if (!std::getline(is, line)) throw DomainError("sparse matrix has fewer entries than declared");
    Entry e{};
    parse_line(line, e.row, e.col, e.value);
    entries.push_back(e);
  }
  return SparseMatrix(rows, cols, std::move(entries));
}

void SparseMatrix::write_binary(std::ostream& os) const {
  put_le<std::uint64_t>(os, rows_);
  put_le<std::uint64_t>(os, cols_);
  put_le<std::uint64_t>(os, entries_.size());
  for (const auto& e : entries_) {
    put_le<std::uint64_t>(os, e.row);
    put_le<std::uint64_t>(os, e.col);
    put_le<double>(os, e.value);
  }
}

SparseMatrix SparseMatrix::read_binary(std::istream& is) {
  const auto rows = get_le<std::uint64_t>(is);
  const auto cols = get_le<std::uint64_t>(is);
  const auto nnz = get_le<std::uint64_t>(is);
  std::vector<Entry> entries;
  entries.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    Entry e{};
    e.row = get_le<std::uint64_t>(is);
    e.col = get_le<std::uint64_t>(is);
    e.value = get_le<double>(is);
    entries.push_back(e);
  }
  return SparseMatrix(rows, cols, std::move(entries));
}

}  // namespace trinet
