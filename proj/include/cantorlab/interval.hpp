#pragma once

#include <algorithm>
#include <ostream>

namespace cantorlab {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr double length() const noexcept { return hi - lo; }
  constexpr double mid() const noexcept { return 0.5 * (lo + hi); }
  constexpr bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  constexpr bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }
  constexpr bool intersects(const Interval& o) const noexcept { return lo <= o.hi && o.lo <= hi; }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

constexpr Interval hull(const Interval& a, const Interval& b) noexcept {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << '[' << iv.lo << ", " << iv.hi << ']';
}

}  // namespace cantorlab
