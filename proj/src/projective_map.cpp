#include "cantorlab/projective_map.hpp"

#include <cmath>

#include "cantorlab/error.hpp"

namespace cantorlab {

namespace {

std::array<i128, 4> normalized(std::array<i128, 4> m) {
  i128 g = gcd128(gcd128(m[0], m[1]), gcd128(m[2], m[3]));
  if (g > 1) {
    for (auto& v : m) v /= g;
  }
  // Fix the projective sign so the denominator row is nonnegative.
  if (m[2] < 0 || (m[2] == 0 && m[3] < 0)) {
    for (auto& v : m) v = -v;
  }
  return m;
}

std::array<long double, 4> to_long_double(const std::array<i128, 4>& m) {
  return {static_cast<long double>(m[0]), static_cast<long double>(m[1]),
          static_cast<long double>(m[2]), static_cast<long double>(m[3])};
}

}  // namespace

ProjectiveMap ProjectiveMap::identity() { return integer(1, 0, 0, 1); }

ProjectiveMap ProjectiveMap::integer(i128 a, i128 b, i128 c, i128 d) {
  ProjectiveMap m;
  m.exact_ = normalized({a, b, c, d});
  m.approx_ = to_long_double(*m.exact_);
  return m;
}

ProjectiveMap ProjectiveMap::real(long double a, long double b, long double c, long double d) {
  ProjectiveMap m;
  m.approx_ = {a, b, c, d};
  return m;
}

ProjectiveMap ProjectiveMap::affine(const Rational& slope, const Rational& offset) {
  // (p/q) y + r/s  ==  (p s y + r q) / (q s)
  try {
    return integer(checked_mul(slope.num(), offset.den()), checked_mul(offset.num(), slope.den()), 0,
                   checked_mul(slope.den(), offset.den()));
  } catch (const Error&) {
    return affine(static_cast<long double>(slope.to_double()),
                  static_cast<long double>(offset.to_double()));
  }
}

ProjectiveMap ProjectiveMap::affine(long double slope, long double offset) {
  return real(slope, offset, 0, 1);
}

ProjectiveMap ProjectiveMap::compose(const ProjectiveMap& inner) const {
  ProjectiveMap out;
  const auto& A = approx_;
  const auto& B = inner.approx_;
  out.approx_ = {A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3], A[2] * B[0] + A[3] * B[2],
                 A[2] * B[1] + A[3] * B[3]};
  // Keep the shadow matrix well scaled; the map is projective.
  long double scale = std::fabs(out.approx_[3]) + std::fabs(out.approx_[2]);
  if (scale > 0 && (scale > 1e300L || scale < 1e-300L)) {
    for (auto& v : out.approx_) v /= scale;
  }
  if (exact_ && inner.exact_) {
    const auto& a = *exact_;
    const auto& b = *inner.exact_;
    try {
      out.exact_ = normalized({checked_add(checked_mul(a[0], b[0]), checked_mul(a[1], b[2])),
                               checked_add(checked_mul(a[0], b[1]), checked_mul(a[1], b[3])),
                               checked_add(checked_mul(a[2], b[0]), checked_mul(a[3], b[2])),
                               checked_add(checked_mul(a[2], b[1]), checked_mul(a[3], b[3]))});
      out.approx_ = to_long_double(*out.exact_);
    } catch (const Error&) {
      out.exact_.reset();
    }
  }
  return out;
}

ProjectiveMap ProjectiveMap::inverse() const {
  if (exact_) {
    const auto& m = *exact_;
    return integer(m[3], -m[1], -m[2], m[0]);
  }
  return real(approx_[3], -approx_[1], -approx_[2], approx_[0]);
}

bool ProjectiveMap::is_affine() const noexcept {
  if (exact_) return (*exact_)[2] == 0;
  return approx_[2] == 0;
}

int ProjectiveMap::orientation() const noexcept {
  long double det = approx_[0] * approx_[3] - approx_[1] * approx_[2];
  if (exact_) {
    const auto& m = *exact_;
    // The exact determinant can overflow only for maps far beyond any cover budget.
    i128 d;
    i128 l, r;
    if (!__builtin_mul_overflow(m[0], m[3], &l) && !__builtin_mul_overflow(m[1], m[2], &r) &&
        !__builtin_sub_overflow(l, r, &d)) {
      return d > 0 ? 1 : (d < 0 ? -1 : 0);
    }
  }
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

double ProjectiveMap::apply(double x) const noexcept {
  long double lx = x;
  return static_cast<double>((approx_[0] * lx + approx_[1]) / (approx_[2] * lx + approx_[3]));
}

std::optional<Rational> ProjectiveMap::apply_exact(const Rational& x) const {
  if (!exact_) return std::nullopt;
  const auto& m = *exact_;
  try {
    i128 num = checked_add(checked_mul(m[0], x.num()), checked_mul(m[1], x.den()));
    i128 den = checked_add(checked_mul(m[2], x.num()), checked_mul(m[3], x.den()));
    if (den == 0) return std::nullopt;
    return Rational(num, den);
  } catch (const Error&) {
    return std::nullopt;
  }
}

double ProjectiveMap::apply(const Rational& x) const {
  if (auto r = apply_exact(x)) return r->to_double();
  return apply(x.to_double());
}

long double ProjectiveMap::derivative_abs(long double x) const noexcept {
  long double det = approx_[0] * approx_[3] - approx_[1] * approx_[2];
  long double den = approx_[2] * x + approx_[3];
  return std::fabs(det) / (den * den);
}

bool ProjectiveMap::regular_on(long double lo, long double hi) const noexcept {
  long double a = approx_[2] * lo + approx_[3];
  long double b = approx_[2] * hi + approx_[3];
  return (a > 0 && b > 0) || (a < 0 && b < 0);
}

}  // namespace cantorlab
