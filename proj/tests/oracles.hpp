#pragma once

// Reference computations written independently of the library code paths they check.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

// p(a,b,c) of the Fritz model by direct summation over the classical source values and an
// explicit 4x4 trace for the singlet part; a = 2*a0 + a1 etc.
std::vector<double> fritz_distribution(double visibility, double anticorrelation);

// Mixed-radix joint index (12 digits, first variable most significant) for outcome cardinality d.
std::uint64_t joint_index(const std::array<unsigned, 12>& digits, unsigned d);
std::array<unsigned, 12> joint_digits(std::uint64_t index, unsigned d);

// Variable swaps of the three inflation generators (source copies AB, AC, BC) on slots
// a1 b1 c1 a2 b2 c2 a3 b3 c3 a4 b4 c4 = 0..11.
using Swaps = std::vector<std::pair<int, int>>;
Swaps inflation_swaps(int generator);

// Number of orbits of the 12-variable order-2 inflation symmetry group, by canonicalizing every
// joint index with hand-written variable swaps.
std::uint64_t brute_force_orbit_count(unsigned d);
// Same count from the cycle structure of each group element (orbit-counting lemma).
std::uint64_t burnside_orbit_count(unsigned d);

// sum over (a1,b1,c1,a2,b2,c2) of y(a1 b1 c1 a2 b2 c2) p(a1,b1,c1) p(a2,b2,c2) with p and y
// addressed by explicit digit tuples.
double quadratic_form(const std::vector<double>& y, const std::vector<double>& p, unsigned d);

}  // namespace oracle
