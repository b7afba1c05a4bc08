#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "trinet/error.hpp"
#include "trinet/quantum.hpp"

using namespace trinet;

namespace {

constexpr double kHi = (1 + 1 / std::numbers::sqrt2) / 16;
constexpr double kLo = (1 - 1 / std::numbers::sqrt2) / 16;

double chsh_of(const ConditionalDistribution& cond) {
  double e[4];
  for (std::size_t xy = 0; xy < 4; ++xy)
    e[xy] = cond.at(xy, 0) - cond.at(xy, 1) - cond.at(xy, 2) + cond.at(xy, 3);
  double best = 0;
  for (int m = 0; m < 4; ++m) {
    double s = 0;
    for (int k = 0; k < 4; ++k) s += (k == m ? -1 : 1) * e[k];
    best = std::max(best, std::abs(s));
  }
  return best;
}

}  // namespace

TEST(ComplexMatrix, BasicAlgebra) {
  const auto i4 = kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2));
  EXPECT_EQ(i4.max_abs_diff(ComplexMatrix::identity(4)), 0.0);
  EXPECT_EQ(trace(pauli('z')), Complex(0.0));
  const auto xz = kron(pauli('x'), pauli('z'));
  EXPECT_EQ(xz(0, 2), Complex(1.0));
  EXPECT_EQ(xz(1, 3), Complex(-1.0));
  EXPECT_EQ(mul(pauli('x'), pauli('x')).max_abs_diff(ComplexMatrix::identity(2)), 0.0);
  const auto y = pauli('y');
  EXPECT_EQ(dagger(y).max_abs_diff(y), 0.0);
  EXPECT_THROW(mul(ComplexMatrix::identity(2), ComplexMatrix::identity(3)), DomainError);
  EXPECT_THROW(trace(ComplexMatrix(2, 3)), DomainError);
  EXPECT_THROW(pauli('q'), DomainError);
}

TEST(Povm, ObservableEigenprojectors) {
  const auto z = observable_povm(pauli('z'));
  EXPECT_EQ(z.effects()[0](0, 0), Complex(1.0));
  EXPECT_NEAR(std::abs(z.effects()[1](1, 1) - Complex(1.0)), 0.0, 1e-15);
  const auto x = observable_povm(pauli('x'));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_NEAR(x.effects()[0](r, c).real(), 0.5, 1e-12);
      EXPECT_NEAR(x.effects()[1](r, c).real(), r == c ? 0.5 : -0.5, 1e-12);
    }
  const auto d = observable_povm(Complex(1 / std::numbers::sqrt2) * (pauli('x') + pauli('z')));
  for (const auto& e : d.effects()) EXPECT_NEAR(trace(e).real(), 1.0, 1e-12);
  EXPECT_THROW(observable_povm(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}), DomainError);
}

TEST(DensityState, Validation) {
  EXPECT_NO_THROW(singlet_state(0.3));
  EXPECT_THROW(DensityState(ComplexMatrix::identity(2), {2}), DomainError);
  EXPECT_THROW(DensityState(ComplexMatrix{{1.5, 0.0}, {0.0, -0.5}}, {2}), DomainError);
  EXPECT_THROW(singlet_state(1.2), DomainError);
  EXPECT_THROW(classical_correlated_state(0.6), DomainError);
}

TEST(BornRule, MaximallyMixedGivesUniform) {
  const auto mixed = [] { return DensityState(Complex(0.25) * ComplexMatrix::identity(4), {2, 2}); };
  std::vector<ComplexMatrix> basis;
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Complex> ket(4, 0.0);
    ket[k] = 1.0;
    basis.push_back(ComplexMatrix::outer(ket));
  }
  const TriangleQuantumModel m({mixed(), mixed(), mixed()}, {Povm(basis), Povm(basis), Povm(basis)},
                               {{{Source::AB, Source::AC}, {Source::AB, Source::BC}, {Source::AC, Source::BC}}});
  const auto p = born_rule(m);
  for (double x : p.probabilities()) EXPECT_NEAR(x, 1.0 / 64, 1e-15);
}

TEST(BornRule, IdealFritzMatchesBruteForceOracle) {
  const auto p = born_rule(fritz_model(1.0, 0.0));
  const auto ref = oracle::fritz_distribution(1.0, 0.0);
  int hi = 0, lo = 0, nonzero = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_NEAR(p[i], ref[i], 1e-12) << i;
    if (p[i] > 1e-15) {
      ++nonzero;
      if (std::abs(p[i] - kHi) < 1e-12) ++hi;
      if (std::abs(p[i] - kLo) < 1e-12) ++lo;
    }
  }
  EXPECT_EQ(nonzero, 16);
  EXPECT_EQ(hi, 8);
  EXPECT_EQ(lo, 8);
  EXPECT_NEAR(kHi, 0.106694, 1e-6);
  EXPECT_NEAR(kLo, 0.018306, 1e-6);
}

TEST(BornRule, FritzPerfectSettingCorrelations) {
  const auto s = split_pairs(born_rule(fritz_model(1.0, 0.0)), triangle_splits());
  const auto ac = marginal(s, {"a0", "c0"});
  const auto bc = marginal(s, {"b0", "c1"});
  EXPECT_NEAR(ac[0] + ac[3], 1.0, 1e-12);
  EXPECT_NEAR(bc[0] + bc[3], 1.0, 1e-12);
  const auto ab = marginal(s, {"a0", "b0"});
  for (double x : ab.probabilities()) EXPECT_NEAR(x, 0.25, 1e-12);
}

TEST(BornRule, NoisyFritzMatchesOracle) {
  for (double v : {0.0, 0.3, 0.95}) {
    for (double eps : {0.0, 3e-5, 0.2}) {
      const auto p = born_rule(fritz_model(v, eps));
      const auto ref = oracle::fritz_distribution(v, eps);
      for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(p[i], ref[i], 1e-12);
    }
  }
}

TEST(BornRule, AnticorrelationParameter) {
  const auto s = split_pairs(born_rule(fritz_model(1.0, 3e-5)), triangle_splits());
  const auto ac = marginal(s, {"a0", "c0"});
  EXPECT_NEAR(ac[1] + ac[2], 3e-5, 1e-15);
  const auto bc = marginal(s, {"b0", "c1"});
  EXPECT_NEAR(bc[1] + bc[2], 3e-5, 1e-15);
}

TEST(BornRule, ZeroVisibilityGivesUniformConditional) {
  const auto cond = bayesian_inversion(born_rule(fritz_model(0.0, 0.0)));
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(cond.at(c, o), 0.25, 1e-12);
}

TEST(BornRule, ChshScalesWithVisibility) {
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0})
    EXPECT_NEAR(chsh_of(bayesian_inversion(born_rule(fritz_model(v, 0.0)))), 2 * std::numbers::sqrt2 * v, 1e-9);
}

TEST(BornRule, RandomModelsGiveValidDistributions) {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<DensityState, 3> st{random_density_state({2, 2}, rng), random_density_state({2, 2}, rng),
                                   random_density_state({2, 2}, rng)};
    std::array<Povm, 3> pv{random_povm(4, 4, rng), random_povm(4, 4, rng), random_povm(4, 4, rng)};
    const TriangleQuantumModel m(st, pv, {{{Source::AC, Source::AB}, {Source::AB, Source::BC}, {Source::BC, Source::AC}}});
    const auto p = born_rule(m);
    double s = 0;
    for (double x : p.probabilities()) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(BornRule, LinearInEachState) {
  Rng rng(5);
  const auto r1 = random_density_state({2, 2}, rng), r2 = random_density_state({2, 2}, rng);
  const auto ac = random_density_state({2, 2}, rng), bc = random_density_state({2, 2}, rng);
  std::array<Povm, 3> pv{random_povm(4, 4, rng), random_povm(4, 4, rng), random_povm(4, 4, rng)};
  const std::array<std::array<Source, 2>, 3> order{{{Source::AB, Source::AC}, {Source::AB, Source::BC}, {Source::AC, Source::BC}}};
  const double t = 0.3;
  const DensityState mix(Complex(t) * r1.matrix() + Complex(1 - t) * r2.matrix(), {2, 2});
  const auto p1 = born_rule(TriangleQuantumModel({r1, ac, bc}, pv, order));
  const auto p2 = born_rule(TriangleQuantumModel({r2, ac, bc}, pv, order));
  const auto pm = born_rule(TriangleQuantumModel({mix, ac, bc}, pv, order));
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(pm[i], t * p1[i] + (1 - t) * p2[i], 1e-10);
}

TEST(TriangleModel, RejectsInconsistentOrdering) {
  const auto f = fritz_model(1.0, 0.0);
  EXPECT_THROW(TriangleQuantumModel(f.states(), f.povms(),
                                    {{{Source::AB, Source::BC}, {Source::BC, Source::AB}, {Source::AC, Source::BC}}}),
               DomainError);
  EXPECT_THROW(fritz_model(-0.1, 0.0), DomainError);
  EXPECT_THROW(fritz_model(1.0, 0.7), DomainError);
}
