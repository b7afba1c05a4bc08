#include "trinet/quantum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "trinet/error.hpp"

namespace trinet {

namespace {

using EigenMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EigenMatrix to_eigen(const ComplexMatrix& m) {
  EigenMatrix e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  return e;
}

ComplexMatrix from_eigen(const EigenMatrix& e) {
  ComplexMatrix m(e.rows(), e.cols());
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
  return m;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return Complex(0.5) * (m + dagger(m)); }

void require_square(const ComplexMatrix& m, std::string_view what) {
  if (m.rows() != m.cols()) throw DomainError(std::string(what) + " must be square");
}

void require_psd(const ComplexMatrix& m, std::string_view what) {
  if (!m.is_hermitian(kQuantumTolerance)) throw DomainError(std::string(what) + " is not Hermitian");
  const auto ev = m.hermitian_eigenvalues();
  if (ev.front() < -kQuantumTolerance) {
    std::ostringstream os;
    os << what << " is not positive semidefinite (smallest eigenvalue " << ev.front() << ")";
    throw DomainError(os.str());
  }
}

EigenMatrix ginibre(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  EigenMatrix m(n, n);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : ComplexMatrix(rows, cols, std::vector<Complex>(rows * cols)) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ == 0 || cols_ == 0) throw DomainError("matrix dimensions must be positive");
  if (entries_.size() != rows_ * cols_) throw DomainError("matrix entry count does not match dimensions");
  for (const auto& z : entries_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("matrix entry is not finite");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  if (rows_ == 0 || cols_ == 0) throw DomainError("matrix dimensions must be positive");
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DomainError("ragged matrix literal");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::outer(const std::vector<Complex>& ket) {
  ComplexMatrix m(ket.size(), ket.size());
  for (std::size_t r = 0; r < ket.size(); ++r)
    for (std::size_t c = 0; c < ket.size(); ++c) m(r, c) = ket[r] * std::conj(ket[c]);
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw DomainError("matrix sum dimension mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& z : entries_) z *= s;
  return *this;
}

ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a += Complex(-1.0) * b; }

bool ComplexMatrix::is_hermitian(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r; c < cols_; ++c)
      if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
  return true;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw DomainError("matrix comparison dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) m = std::max(m, std::abs(entries_[i] - other.entries_[i]));
  return m;
}

std::vector<double> ComplexMatrix::hermitian_eigenvalues() const {
  require_square(*this, "eigenvalue input");
  Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(to_eigen(hermitian_part(*this)), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      const Complex s = a(ar, ac);
      if (s == Complex(0.0)) continue;
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc) out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
    }
  return out;
}

ComplexMatrix mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DomainError("matrix product dimension mismatch");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex s = a(r, k);
      if (s == Complex(0.0)) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += s * b(k, c);
    }
  return out;
}

ComplexMatrix dagger(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = std::conj(a(r, c));
  return out;
}

Complex trace(const ComplexMatrix& a) {
  require_square(a, "trace input");
  Complex t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

DensityState::DensityState(ComplexMatrix matrix, std::vector<std::size_t> dims)
    : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  require_square(matrix_, "density matrix");
  std::size_t total = 1;
  for (auto d : dims_) {
    if (d == 0) throw DomainError("subsystem dimension must be positive");
    total *= d;
  }
  if (total != matrix_.rows()) throw DomainError("subsystem dimensions do not multiply to the matrix size");
  if (std::abs(trace(matrix_) - Complex(1.0)) > kQuantumTolerance) throw DomainError("density matrix trace is not 1");
  require_psd(matrix_, "density matrix");
}

Povm::Povm(std::vector<ComplexMatrix> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw DomainError("POVM needs at least one effect");
  const auto n = effects_.front().rows();
  ComplexMatrix sum(n, n);
  for (const auto& e : effects_) {
    require_square(e, "POVM effect");
    if (e.rows() != n) throw DomainError("POVM effects have inconsistent dimensions");
    require_psd(e, "POVM effect");
    sum += e;
  }
  if (sum.max_abs_diff(ComplexMatrix::identity(n)) > kQuantumTolerance)
    throw DomainError("POVM effects do not sum to the identity");
}

TriangleQuantumModel::TriangleQuantumModel(std::array<DensityState, 3> states, std::array<Povm, 3> povms,
                                           std::array<std::array<Source, 2>, 3> station_order)
    : states_(std::move(states)), povms_(std::move(povms)), station_order_(station_order) {
  for (auto s : kSources)
    if (states_[index(s)].dims().size() != 2)
      throw DomainError("state of source " + std::string(to_string(s)) + " must be bipartite");
  for (auto p : kParties) {
    const auto& order = station_order_[index(p)];
    const auto expected = sources_of(p);
    const bool ok = (order[0] == expected[0] && order[1] == expected[1]) ||
                    (order[0] == expected[1] && order[1] == expected[0]);
    if (!ok) throw DomainError("station " + std::string(to_string(p)) + " ordering must list its two sources");
  }
  const auto perm = subsystem_permutation();
  for (auto p : kParties) {
    const auto d0 = states_[perm[2 * index(p)] / 2].dims()[perm[2 * index(p)] % 2];
    const auto d1 = states_[perm[2 * index(p) + 1] / 2].dims()[perm[2 * index(p) + 1] % 2];
    if (povms_[index(p)].dimension() != d0 * d1)
      throw DomainError("POVM of station " + std::string(to_string(p)) + " does not match its subsystem dimensions");
  }
}

std::array<std::size_t, 6> TriangleQuantumModel::subsystem_permutation() const {
  std::array<std::size_t, 6> perm{};
  for (auto p : kParties)
    for (std::size_t k = 0; k < 2; ++k) {
      const auto s = station_order_[index(p)][k];
      const auto ends = endpoints(s);
      perm[2 * index(p) + k] = 2 * index(s) + (ends[0] == p ? 0 : 1);
    }
  return perm;
}

OutcomeDistribution born_rule(const TriangleQuantumModel& model) {
  const auto& st = model.states();
  const auto rho = kron(st[0].matrix(), kron(st[1].matrix(), st[2].matrix()));
  const std::size_t dim = rho.rows();

  std::array<std::size_t, 6> sub_dims{};
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t k = 0; k < 2; ++k) sub_dims[2 * s + k] = st[s].dims()[k];
  std::array<std::size_t, 6> state_stride{};
  for (std::size_t i = 6, acc = 1; i-- > 0;) {
    state_stride[i] = acc;
    acc *= sub_dims[i];
  }

  // Reindex rho into measurement order (A's subsystems, then B's, then C's).
  const auto perm = model.subsystem_permutation();
  std::array<std::size_t, 6> meas_dims{};
  for (std::size_t k = 0; k < 6; ++k) meas_dims[k] = sub_dims[perm[k]];
  std::vector<std::size_t> to_state(dim);
  for (std::size_t m = 0; m < dim; ++m) {
    std::size_t rem = m, s = 0;
    for (std::size_t k = 6; k-- > 0;) {
      s += (rem % meas_dims[k]) * state_stride[perm[k]];
      rem /= meas_dims[k];
    }
    to_state[m] = s;
  }
  ComplexMatrix rho_m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) rho_m(i, j) = rho(to_state[i], to_state[j]);

  const auto& pv = model.povms();
  const std::size_t na = pv[0].outcomes(), nb = pv[1].outcomes(), nc = pv[2].outcomes();
  std::vector<double> probs(na * nb * nc);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      const auto mab = kron(pv[0].effects()[a], pv[1].effects()[b]);
      for (std::size_t c = 0; c < nc; ++c) {
        const auto m = kron(mab, pv[2].effects()[c]);
        Complex t = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) t += rho_m(i, j) * m(j, i);
        if (std::abs(t.imag()) > kQuantumTolerance) throw DomainError("Born-rule probability has an imaginary part");
        if (t.real() < -kQuantumTolerance) throw DomainError("Born-rule probability is negative");
        probs[(a * nb + b) * nc + c] = std::max(t.real(), 0.0);
      }
    }
  return OutcomeDistribution({{"a", na}, {"b", nb}, {"c", nc}}, std::move(probs));
}

ComplexMatrix pauli(char name) {
  const Complex i(0.0, 1.0);
  switch (name) {
    case 'x': return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}};
    case 'y': return ComplexMatrix{{0.0, -i}, {i, 0.0}};
    case 'z': return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}};
    default: throw DomainError(std::string("unknown Pauli matrix '") + name + "'");
  }
}

Povm observable_povm(const ComplexMatrix& observable) {
  if (observable.rows() != 2 || observable.cols() != 2) throw DomainError("observable must be 2x2");
  if (!observable.is_hermitian(kQuantumTolerance)) throw DomainError("observable is not Hermitian");
  Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(to_eigen(hermitian_part(observable)));
  const auto& ev = solver.eigenvalues();
  if (ev(1) - ev(0) < kQuantumTolerance) throw DomainError("observable has a degenerate spectrum");
  std::vector<ComplexMatrix> effects;
  for (Eigen::Index k = 1; k >= 0; --k) {
    const auto v = solver.eigenvectors().col(k);
    effects.push_back(hermitian_part(from_eigen(v * v.adjoint())));
  }
  return Povm(std::move(effects));
}

Povm wired_povm(const Povm& first, const std::array<Povm, 2>& second_given_first) {
  if (first.outcomes() != 2) throw DomainError("wired POVM needs a two-outcome first measurement");
  std::vector<ComplexMatrix> effects;
  for (std::size_t x = 0; x < 2; ++x) {
    const auto& second = second_given_first[x];
    if (second.outcomes() != 2) throw DomainError("wired POVM needs two-outcome second measurements");
    for (std::size_t y = 0; y < 2; ++y) effects.push_back(kron(first.effects()[x], second.effects()[y]));
  }
  return Povm(std::move(effects));
}

DensityState singlet_state(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in [0,1]");
  const double s = 1.0 / std::numbers::sqrt2;
  auto rho = Complex(visibility) * ComplexMatrix::outer({0.0, s, -s, 0.0});
  rho += Complex((1.0 - visibility) / 4.0) * ComplexMatrix::identity(4);
  return DensityState(std::move(rho), {2, 2});
}

DensityState classical_correlated_state(double anticorrelation) {
  if (!(anticorrelation >= 0.0 && anticorrelation <= 0.5))
    throw DomainError("anticorrelation probability must lie in [0,1/2]");
  ComplexMatrix rho(4, 4);
  rho(0, 0) = rho(3, 3) = (1.0 - anticorrelation) / 2.0;
  rho(1, 1) = rho(2, 2) = anticorrelation / 2.0;
  return DensityState(std::move(rho), {2, 2});
}

TriangleQuantumModel fritz_model(double visibility, double anticorrelation) {
  const auto z = observable_povm(pauli('z'));
  const auto x = observable_povm(pauli('x'));
  const double s = 1.0 / std::numbers::sqrt2;
  const auto plus = observable_povm(Complex(s) * (pauli('x') + pauli('z')));
  const auto minus = observable_povm(Complex(s) * (pauli('x') - pauli('z')));

  std::array<Povm, 3> povms{wired_povm(z, {x, z}), wired_povm(z, {plus, minus}), wired_povm(z, {z, z})};
  std::array<DensityState, 3> states{singlet_state(visibility), classical_correlated_state(anticorrelation),
                                     classical_correlated_state(anticorrelation)};
  // a0 and c0 read the AC source, b0 and c1 the BC source; a1 and b1 read the singlet.
  std::array<std::array<Source, 2>, 3> order{{{Source::AC, Source::AB},
                                              {Source::BC, Source::AB},
                                              {Source::AC, Source::BC}}};
  return TriangleQuantumModel(std::move(states), std::move(povms), order);
}

DensityState random_density_state(std::vector<std::size_t> dims, Rng& rng) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  const auto g = ginibre(n, rng);
  EigenMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityState(hermitian_part(from_eigen(rho)), std::move(dims));
}

Povm random_povm(std::size_t dimension, std::size_t outcomes, Rng& rng) {
  std::vector<EigenMatrix> parts;
  EigenMatrix sum = EigenMatrix::Zero(dimension, dimension);
  for (std::size_t k = 0; k < outcomes; ++k) {
    const auto g = ginibre(dimension, rng);
    parts.push_back(g * g.adjoint());
    sum += parts.back();
  }
  Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(sum);
  const EigenMatrix inv_sqrt = solver.operatorInverseSqrt();
  std::vector<ComplexMatrix> effects;
  for (const auto& p : parts) effects.push_back(hermitian_part(from_eigen(inv_sqrt * p * inv_sqrt)));
  return Povm(std::move(effects));
}

}  // namespace trinet
