#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "trinet/error.hpp"
#include "trinet/sparse.hpp"

using namespace trinet;

TEST(IndexPermutation, RejectsNonBijections) {
  EXPECT_THROW(IndexPermutation({0, 0, 1}), DomainError);
  EXPECT_THROW(IndexPermutation({0, 3, 1}), DomainError);
  EXPECT_NO_THROW(IndexPermutation({2, 0, 1}));
}

TEST(IndexPermutation, ComposeAndInverse) {
  const IndexPermutation p({2, 0, 1});
  const IndexPermutation q({1, 0, 2});
  const auto pq = p.compose(q);
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_EQ(pq(i), p(q(i)));
  EXPECT_TRUE(p.compose(p.inverse()).is_identity());
  EXPECT_TRUE(p.inverse().compose(p).is_identity());
  EXPECT_TRUE(q.compose(q).is_identity());
  EXPECT_FALSE(p.is_identity());
}

TEST(SparseMatrix, CanonicalizesEntries) {
  const SparseMatrix m(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {0, 0, 1.0}, {0, 0, -1.0}});
  ASSERT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.entries()[0], (SparseMatrix::Entry{0, 1, 2.0}));
  EXPECT_EQ(m.entries()[1], (SparseMatrix::Entry{1, 2, 1.5}));
  EXPECT_THROW(SparseMatrix(2, 2, {{2, 0, 1.0}}), DomainError);
  EXPECT_THROW(SparseMatrix(2, 2, {{0, 0, std::nan("")}}), DomainError);
}

TEST(SparseMatrix, Products) {
  const SparseMatrix m(2, 3, {{0, 0, 1.0}, {0, 2, 2.0}, {1, 1, 3.0}});
  EXPECT_EQ(m.multiply(std::vector<double>{1, 1, 1}), (std::vector<double>{3, 3}));
  EXPECT_EQ(m.left_multiply(std::vector<double>{1, 2}), (std::vector<double>{1, 6, 2}));
  EXPECT_EQ(m.column_sums(), (std::vector<double>{1, 3, 2}));
  EXPECT_EQ(m.row_sums(), (std::vector<double>{3, 3}));
  EXPECT_THROW(m.multiply(std::vector<double>{1, 1}), DomainError);
}

TEST(SparseMatrix, PermutedMovesEntries) {
  const SparseMatrix m(2, 2, {{0, 1, 5.0}});
  const auto p = m.permuted(IndexPermutation({1, 0}), IndexPermutation({1, 0}));
  ASSERT_EQ(p.nnz(), 1u);
  EXPECT_EQ(p.entries()[0], (SparseMatrix::Entry{1, 0, 5.0}));
}

TEST(SparseMatrix, CsvRoundTrip) {
  const SparseMatrix m(3, 4, {{0, 3, 0.1}, {2, 1, -1.0 / 3.0}, {1, 0, 1e-300}});
  std::stringstream ss;
  m.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, 6), "3,4,3\n");
  EXPECT_EQ(SparseMatrix::read_csv(ss), m);
}

TEST(SparseMatrix, BinaryRoundTrip) {
  const SparseMatrix m(3, 4, {{0, 3, 0.1}, {2, 1, -1.0 / 3.0}});
  std::stringstream ss;
  m.write_binary(ss);
  EXPECT_EQ(ss.str().size(), 3 * 8 + 2 * 24u);
  EXPECT_EQ(SparseMatrix::read_binary(ss), m);
}

TEST(SparseMatrix, ReadRejectsMalformedInput) {
  std::stringstream bad_header("3;4;1\n");
  EXPECT_THROW(SparseMatrix::read_csv(bad_header), DomainError);
  std::stringstream short_body("3,4,2\n0,0,1\n");
  EXPECT_THROW(SparseMatrix::read_csv(short_body), DomainError);
  std::stringstream truncated(std::string(10, '\0'));
  EXPECT_THROW(SparseMatrix::read_binary(truncated), DomainError);
}
