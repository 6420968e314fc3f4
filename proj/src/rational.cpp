#include "cantorlab/rational.hpp"

#include <cmath>
#include <limits>

#include "cantorlab/error.hpp"

namespace cantorlab {

i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorKind::Overflow, "128-bit addition");
  return r;
}

i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorKind::Overflow, "128-bit multiplication");
  return r;
}

i128 gcd128(i128 a, i128 b) noexcept {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string to_string128(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  std::string out;
  // Work on the negative side so INT128_MIN does not overflow.
  if (!neg) v = -v;
  while (v != 0) {
    out.insert(out.begin(), static_cast<char>('0' - static_cast<int>(v % 10)));
    v /= 10;
  }
  if (neg) out.insert(out.begin(), '-');
  return out;
}

Rational::Rational(i128 num, i128 den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

double Rational::to_double() const noexcept {
  return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

std::string Rational::str() const {
  if (den_ == 1) return to_string128(num_);
  return to_string128(num_) + "/" + to_string128(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  i128 g = gcd128(a.den_, b.den_);
  i128 bd = b.den_ / g;
  return Rational(checked_add(checked_mul(a.num_, bd), checked_mul(b.num_, a.den_ / g)),
                  checked_mul(a.den_, bd));
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  i128 g1 = gcd128(a.num_, b.den_);
  i128 g2 = gcd128(b.num_, a.den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return Rational(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw Error(ErrorKind::InvalidArgument, "division by zero rational");
  return a * Rational(b.den_, b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  i128 lhs = checked_mul(a.num_, b.den_);
  i128 rhs = checked_mul(b.num_, a.den_);
  return lhs <=> rhs;
}

namespace {

i128 parse_integer(std::string_view s) {
  if (s.empty()) throw Error(ErrorKind::InvalidArgument, "empty integer");
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    ++i;
  }
  if (i == s.size()) throw Error(ErrorKind::InvalidArgument, "malformed integer");
  i128 v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') {
      throw Error(ErrorKind::InvalidArgument, "malformed number '" + std::string(s) + "'");
    }
    v = checked_add(checked_mul(v, 10), s[i] - '0');
  }
  return neg ? -v : v;
}

i128 pow10(int e) {
  i128 v = 1;
  for (int i = 0; i < e; ++i) v = checked_mul(v, 10);
  return v;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_integer(text.substr(0, slash)), parse_integer(text.substr(slash + 1)));
  }
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    exponent = static_cast<int>(parse_integer(text.substr(e + 1)));
    text = text.substr(0, e);
  }
  std::string digits(text);
  if (auto dot = digits.find('.'); dot != std::string::npos) {
    exponent -= static_cast<int>(digits.size() - dot - 1);
    digits.erase(dot, 1);
  }
  i128 mantissa = parse_integer(digits);
  if (exponent >= 0) return Rational(checked_mul(mantissa, pow10(exponent)), 1);
  return Rational(mantissa, pow10(-exponent));
}

std::optional<Rational> Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  // Walk the continued-fraction convergents of x until one rounds back to x.
  long double rem = x;
  i128 p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    long double a = std::floor(rem);
    if (std::fabs(a) > 1e18L) return std::nullopt;
    i128 ai = static_cast<i128>(a);
    i128 p2 = ai * p1 + p0;
    i128 q2 = ai * q1 + q0;
    if (q2 > max_den) return std::nullopt;
    Rational cand(p2, q2);
    if (cand.to_double() == x) return cand;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    long double frac = rem - a;
    if (frac == 0) return std::nullopt;
    rem = 1.0L / frac;
  }
  return std::nullopt;
}

}  // namespace cantorlab
