#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

namespace oracle {

namespace {

using cplx = std::complex<double>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;

// (I + s n.sigma)/2 for a Bloch vector n in the x-z plane.
Mat2 projector(double nx, double nz, int sign) {
  const double s = sign;
  return {{{cplx((1 + s * nz) / 2), cplx(s * nx / 2)}, {cplx(s * nx / 2), cplx((1 - s * nz) / 2)}}};
}

}  // namespace

std::vector<double> fritz_distribution(double visibility, double anticorrelation) {
  const double r = 1.0 / std::sqrt(2.0);
  // a1 setting per a0, b1 setting per b0, as Bloch vectors (nx, nz).
  const double a_set[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  const double b_set[2][2] = {{r, r}, {r, -r}};

  // Singlet (|01> - |10>)/sqrt2 mixed with white noise, in the |a b> basis.
  cplx rho[4][4] = {};
  const double amp[4] = {0.0, r, -r, 0.0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho[i][j] = visibility * amp[i] * amp[j] + (i == j ? (1 - visibility) / 4 : 0.0);

  auto pair_weight = [&](int x, int y) { return x == y ? (1 - anticorrelation) / 2 : anticorrelation / 2; };

  std::vector<double> p(64, 0.0);
  for (int a0 = 0; a0 < 2; ++a0)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int b0 = 0; b0 < 2; ++b0)
        for (int b1 = 0; b1 < 2; ++b1)
          for (int c0 = 0; c0 < 2; ++c0)
            for (int c1 = 0; c1 < 2; ++c1) {
              const Mat2 pa = projector(a_set[a0][0], a_set[a0][1], a1 == 0 ? 1 : -1);
              const Mat2 pb = projector(b_set[b0][0], b_set[b0][1], b1 == 0 ? 1 : -1);
              // Tr[rho (pa x pb)] = sum_{ij,kl} rho[(i,k),(j,l)] pa[j][i] pb[l][k]
              cplx t = 0.0;
              for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                  for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) t += rho[2 * i + k][2 * j + l] * pa[j][i] * pb[l][k];
              const double w = pair_weight(a0, c0) * pair_weight(b0, c1);
              const int a = 2 * a0 + a1, b = 2 * b0 + b1, c = 2 * c0 + c1;
              p[16 * a + 4 * b + c] += w * t.real();
            }
  return p;
}

std::uint64_t joint_index(const std::array<unsigned, 12>& digits, unsigned d) {
  std::uint64_t idx = 0;
  for (unsigned x : digits) idx = idx * d + x;
  return idx;
}

std::array<unsigned, 12> joint_digits(std::uint64_t index, unsigned d) {
  std::array<unsigned, 12> out{};
  for (int k = 11; k >= 0; --k) {
    out[k] = static_cast<unsigned>(index % d);
    index /= d;
  }
  return out;
}

Swaps inflation_swaps(int generator) {
  enum { a1, b1, c1, a2, b2, c2, a3, b3, c3, a4, b4, c4 };
  switch (generator) {
    case 0: return {{a1, a2}, {a3, a4}, {b1, b3}, {b2, b4}};
    case 1: return {{a1, a3}, {a2, a4}, {c1, c2}, {c3, c4}};
    default: return {{b1, b2}, {b3, b4}, {c1, c3}, {c2, c4}};
  }
}

namespace {

std::array<unsigned, 12> apply_swaps(const Swaps& s, std::array<unsigned, 12> x) {
  for (auto [i, j] : s) std::swap(x[i], x[j]);
  return x;
}

std::array<unsigned, 12> apply_element(int m, std::array<unsigned, 12> x) {
  for (int g = 0; g < 3; ++g)
    if (m >> g & 1) x = apply_swaps(inflation_swaps(g), x);
  return x;
}

}  // namespace

std::uint64_t brute_force_orbit_count(unsigned d) {
  const std::uint64_t n = static_cast<std::uint64_t>(std::pow(d, 12));
  std::set<std::uint64_t> reps;
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    const auto x = joint_digits(idx, d);
    std::uint64_t best = idx;
    for (int m = 1; m < 8; ++m) best = std::min(best, joint_index(apply_element(m, x), d));
    reps.insert(best);
  }
  return reps.size();
}

std::uint64_t burnside_orbit_count(unsigned d) {
  std::uint64_t total = 0;
  for (int m = 0; m < 8; ++m) {
    std::array<unsigned, 12> label{};
    for (unsigned k = 0; k < 12; ++k) label[k] = k;
    const auto image = apply_element(m, label);
    std::array<bool, 12> seen{};
    unsigned cycles = 0;
    for (unsigned k = 0; k < 12; ++k) {
      if (seen[k]) continue;
      ++cycles;
      for (unsigned t = k; !seen[t]; t = image[t]) seen[t] = true;
    }
    total += static_cast<std::uint64_t>(std::pow(d, cycles));
  }
  return total / 8;
}

double quadratic_form(const std::vector<double>& y, const std::vector<double>& p, unsigned d) {
  auto idx3 = [d](unsigned a, unsigned b, unsigned c) { return (a * d + b) * d + c; };
  double total = 0.0;
  for (unsigned a1 = 0; a1 < d; ++a1)
    for (unsigned b1 = 0; b1 < d; ++b1)
      for (unsigned c1 = 0; c1 < d; ++c1)
        for (unsigned a2 = 0; a2 < d; ++a2)
          for (unsigned b2 = 0; b2 < d; ++b2)
            for (unsigned c2 = 0; c2 < d; ++c2) {
              const std::size_t row = static_cast<std::size_t>(idx3(a1, b1, c1)) * d * d * d + idx3(a2, b2, c2);
              total += y[row] * p[idx3(a1, b1, c1)] * p[idx3(a2, b2, c2)];
            }
  return total;
}

}  // namespace oracle
