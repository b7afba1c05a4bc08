#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "trinet/distribution.hpp"
#include "trinet/random.hpp"
#include "trinet/triangle.hpp"

namespace trinet {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix outer(const std::vector<Complex>& ket);  // |k><k|

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  const std::vector<Complex>& entries() const noexcept { return entries_; }

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex s);
  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  bool is_hermitian(double tol) const;
  double max_abs_diff(const ComplexMatrix& other) const;
  std::vector<double> hermitian_eigenvalues() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Complex> entries_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix mul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix dagger(const ComplexMatrix& a);
Complex trace(const ComplexMatrix& a);

inline constexpr double kQuantumTolerance = 1e-10;

class DensityState {
 public:
  DensityState(ComplexMatrix matrix, std::vector<std::size_t> dims);
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

 private:
  ComplexMatrix matrix_;
  std::vector<std::size_t> dims_;
};

class Povm {
 public:
  explicit Povm(std::vector<ComplexMatrix> effects);
  const std::vector<ComplexMatrix>& effects() const noexcept { return effects_; }
  std::size_t outcomes() const noexcept { return effects_.size(); }
  std::size_t dimension() const noexcept { return effects_.front().rows(); }

 private:
  std::vector<ComplexMatrix> effects_;
};

// States are held in source order AB, AC, BC; within a state the subsystem order follows
// the letters of the source name. Each station declares which source feeds its first and
// second local subsystem; its POVM acts on that ordered pair.
class TriangleQuantumModel {
 public:
  TriangleQuantumModel(std::array<DensityState, 3> states, std::array<Povm, 3> povms,
                       std::array<std::array<Source, 2>, 3> station_order);

  const std::array<DensityState, 3>& states() const noexcept { return states_; }
  const std::array<Povm, 3>& povms() const noexcept { return povms_; }
  const std::array<std::array<Source, 2>, 3>& station_order() const noexcept { return station_order_; }

  // For each measurement-order subsystem slot, the state-order subsystem it reads.
  std::array<std::size_t, 6> subsystem_permutation() const;

 private:
  std::array<DensityState, 3> states_;
  std::array<Povm, 3> povms_;
  std::array<std::array<Source, 2>, 3> station_order_;
};

OutcomeDistribution born_rule(const TriangleQuantumModel& model);

ComplexMatrix pauli(char name);
Povm observable_povm(const ComplexMatrix& observable);

// Two-outcome measurement on the first subsystem followed by a measurement on the second
// chosen by the first outcome; outcome index = 2 * first + second.
Povm wired_povm(const Povm& first, const std::array<Povm, 2>& second_given_first);

DensityState singlet_state(double visibility);
DensityState classical_correlated_state(double anticorrelation);
TriangleQuantumModel fritz_model(double visibility, double anticorrelation);

DensityState random_density_state(std::vector<std::size_t> dims, Rng& rng);
Povm random_povm(std::size_t dimension, std::size_t outcomes, Rng& rng);

}  // namespace trinet
