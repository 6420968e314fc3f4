#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <string>

namespace cantorlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// a + b sqrt(D) with rational a, b and squarefree D >= 1 (D = 1 means b = 0).
/// Values with different D only mix when one of them is rational.
class QuadraticSurd {
 public:
  QuadraticSurd() = default;
  QuadraticSurd(BigRational a);  // NOLINT: rationals embed implicitly
  QuadraticSurd(long long a) : QuadraticSurd(BigRational(a)) {}  // NOLINT
  QuadraticSurd(BigRational a, BigRational b, BigInt radicand);

  /// sqrt(n) for a positive integer n.
  static QuadraticSurd sqrt(const BigInt& n);

  const BigRational& rational_part() const noexcept { return a_; }
  const BigRational& surd_part() const noexcept { return b_; }
  const BigInt& radicand() const noexcept { return d_; }
  bool is_rational() const noexcept { return b_ == 0; }

  QuadraticSurd conjugate() const;
  /// (a + b sqrt D)(a - b sqrt D) = a^2 - b^2 D.
  BigRational norm() const;
  int sign() const;
  BigInt floor() const;
  /// Accurate to a few ulps even when a and b sqrt(D) nearly cancel.
  double to_double() const;
  long double to_long_double() const;
  std::string str() const;

  QuadraticSurd operator-() const;
  QuadraticSurd& operator+=(const QuadraticSurd& o);
  QuadraticSurd& operator-=(const QuadraticSurd& o);
  QuadraticSurd& operator*=(const QuadraticSurd& o);
  QuadraticSurd& operator/=(const QuadraticSurd& o);
  friend QuadraticSurd operator+(QuadraticSurd x, const QuadraticSurd& y) { return x += y; }
  friend QuadraticSurd operator-(QuadraticSurd x, const QuadraticSurd& y) { return x -= y; }
  friend QuadraticSurd operator*(QuadraticSurd x, const QuadraticSurd& y) { return x *= y; }
  friend QuadraticSurd operator/(QuadraticSurd x, const QuadraticSurd& y) { return x /= y; }
  /// Exact when the radicands agree or one side is rational; otherwise the
  /// values are known to differ and are ordered in long double.
  friend int compare(const QuadraticSurd& x, const QuadraticSurd& y);
  friend bool operator==(const QuadraticSurd& x, const QuadraticSurd& y) { return compare(x, y) == 0; }
  friend std::strong_ordering operator<=>(const QuadraticSurd& x, const QuadraticSurd& y) {
    const int s = compare(x, y);
    return s < 0 ? std::strong_ordering::less : s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

 private:
  void normalize();
  void unify(const QuadraticSurd& o);

  BigRational a_ = 0, b_ = 0;
  BigInt d_ = 1;
};

/// Squarefree part s and square root r of the square part: n = r^2 s.
std::pair<BigInt, BigInt> squarefree_split(const BigInt& n);

}  // namespace cantorlab
