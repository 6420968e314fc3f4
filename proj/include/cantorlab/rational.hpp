#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cantorlab {

using i128 = __int128;

/// Checked 128-bit arithmetic; throws Error(Overflow) instead of wrapping.
i128 checked_add(i128 a, i128 b);
i128 checked_mul(i128 a, i128 b);
i128 gcd128(i128 a, i128 b) noexcept;
std::string to_string128(i128 v);

/// Reduced fraction num/den with den > 0.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(i128 num, i128 den = 1);

  i128 num() const noexcept { return num_; }
  i128 den() const noexcept { return den_; }
  double to_double() const noexcept;
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  /// Parses "p", "p/q" or a finite decimal such as "0.45" or "-1.5e-2".
  static Rational parse(std::string_view text);

  /// Recovers a short fraction whose correctly rounded double equals x
  /// (e.g. 0.45 -> 9/20). Returns nullopt when no denominator <= max_den fits.
  static std::optional<Rational> from_double(double x, std::int64_t max_den = 1'000'000'000);

 private:
  i128 num_ = 0;
  i128 den_ = 1;
};

}  // namespace cantorlab
