#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace trinet {

enum class Party : std::uint8_t { A = 0, B = 1, C = 2 };
enum class Source : std::uint8_t { AB = 0, AC = 1, BC = 2 };

inline constexpr std::array<Party, 3> kParties{Party::A, Party::B, Party::C};
inline constexpr std::array<Source, 3> kSources{Source::AB, Source::AC, Source::BC};

constexpr std::size_t index(Party p) noexcept { return static_cast<std::size_t>(p); }
constexpr std::size_t index(Source s) noexcept { return static_cast<std::size_t>(s); }

constexpr std::string_view to_string(Party p) noexcept {
  constexpr std::array<std::string_view, 3> names{"A", "B", "C"};
  return names[index(p)];
}

constexpr std::string_view to_string(Source s) noexcept {
  constexpr std::array<std::string_view, 3> names{"AB", "AC", "BC"};
  return names[index(s)];
}

// The two parties a source feeds, in the order of its name.
constexpr std::array<Party, 2> endpoints(Source s) noexcept {
  switch (s) {
    case Source::AB: return {Party::A, Party::B};
    case Source::AC: return {Party::A, Party::C};
    case Source::BC: return {Party::B, Party::C};
  }
  return {Party::A, Party::B};
}

constexpr Source source_between(Party x, Party y) noexcept {
  const auto lo = index(x) < index(y) ? x : y;
  const auto hi = index(x) < index(y) ? y : x;
  if (lo == Party::A) return hi == Party::B ? Source::AB : Source::AC;
  return Source::BC;
}

// The two sources a party receives from, in the order AB, AC, BC.
constexpr std::array<Source, 2> sources_of(Party p) noexcept {
  switch (p) {
    case Party::A: return {Source::AB, Source::AC};
    case Party::B: return {Source::AB, Source::BC};
    case Party::C: return {Source::AC, Source::BC};
  }
  return {Source::AB, Source::AC};
}

}  // namespace trinet
