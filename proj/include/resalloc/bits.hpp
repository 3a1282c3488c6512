#pragma once

#include <bit>
#include <cstdint>

namespace resalloc {

// Finite sets of process or site ids, as 64-bit masks. Universes are
// validated to hold at most 64 members when a scenario is loaded.
using Mask = std::uint64_t;

namespace bits {

inline constexpr Mask unit(int i) { return Mask{1} << i; }
inline constexpr bool has(Mask m, int i) { return (m >> i) & 1u; }
inline void add(Mask& m, int i) { m |= unit(i); }
inline void remove(Mask& m, int i) { m &= ~unit(i); }
inline int count(Mask m) { return std::popcount(m); }

template <typename F>
void for_each(Mask m, F f) {
  while (m != 0) {
    f(std::countr_zero(m));
    m &= m - 1;
  }
}

}  // namespace bits
}  // namespace resalloc
