#pragma once

#include <array>
#include <optional>

#include "cantorlab/rational.hpp"

namespace cantorlab {

/// Linear-fractional map x -> (a x + b) / (c x + d).
///
/// Both affine maps with rational coefficients and integer Moebius maps are
/// carried as integer 2x2 matrices, composed exactly in 128-bit arithmetic and
/// only converted to floating point when evaluated. When a composition would
/// overflow, or the map was built from real coefficients, the exact matrix is
/// dropped and the long double shadow is used instead.
class ProjectiveMap {
 public:
  static ProjectiveMap identity();
  static ProjectiveMap integer(i128 a, i128 b, i128 c, i128 d);
  static ProjectiveMap real(long double a, long double b, long double c, long double d);
  /// y -> slope * y + offset, exact when both are rational.
  static ProjectiveMap affine(const Rational& slope, const Rational& offset);
  static ProjectiveMap affine(long double slope, long double offset);

  /// (*this) o inner.
  ProjectiveMap compose(const ProjectiveMap& inner) const;
  ProjectiveMap inverse() const;

  bool exact() const noexcept { return exact_.has_value(); }
  bool is_affine() const noexcept;
  /// Sign of the derivative on the domain (constant where c x + d != 0).
  int orientation() const noexcept;

  double apply(double x) const noexcept;
  /// Exact evaluation at a rational point, rounded once at the end.
  double apply(const Rational& x) const;
  std::optional<Rational> apply_exact(const Rational& x) const;
  /// |derivative| at x.
  long double derivative_abs(long double x) const noexcept;
  /// Returns false when c x + d vanishes somewhere in [lo, hi].
  bool regular_on(long double lo, long double hi) const noexcept;

  const std::array<long double, 4>& coefficients() const noexcept { return approx_; }
  const std::optional<std::array<i128, 4>>& exact_coefficients() const noexcept { return exact_; }

 private:
  std::optional<std::array<i128, 4>> exact_;
  std::array<long double, 4> approx_{1, 0, 0, 1};
};

}  // namespace cantorlab
