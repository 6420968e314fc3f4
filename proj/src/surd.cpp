#include "cantorlab/surd.hpp"

#include <cmath>

#include "cantorlab/error.hpp"

namespace cantorlab {

std::pair<BigInt, BigInt> squarefree_split(const BigInt& n) {
  if (n <= 0) throw Error(ErrorKind::InvalidArgument, "radicand must be positive");
  BigInt rest = n, root = 1;
  // Trial division; leftover factors above the bound are left in the radicand.
  for (BigInt p = 2; p * p <= rest && p < 2'000'000; p += (p == 2 ? 1 : 2)) {
    const BigInt p2 = p * p;
    while (rest % p2 == 0) {
      rest /= p2;
      root *= p;
    }
  }
  const BigInt s = boost::multiprecision::sqrt(rest);
  if (s * s == rest) {
    root *= s;
    rest = 1;
  }
  return {rest, root};
}

QuadraticSurd::QuadraticSurd(BigRational a) : a_(std::move(a)) {}

QuadraticSurd::QuadraticSurd(BigRational a, BigRational b, BigInt radicand)
    : a_(std::move(a)), b_(std::move(b)), d_(std::move(radicand)) {
  normalize();
}

QuadraticSurd QuadraticSurd::sqrt(const BigInt& n) { return QuadraticSurd(0, 1, n); }

void QuadraticSurd::normalize() {
  if (d_ <= 0) throw Error(ErrorKind::InvalidArgument, "radicand must be positive");
  if (b_ == 0) {
    d_ = 1;
    return;
  }
  auto [s, r] = squarefree_split(d_);
  d_ = s;
  b_ *= BigRational(r);
  if (d_ == 1) {
    a_ += b_;
    b_ = 0;
  }
}

void QuadraticSurd::unify(const QuadraticSurd& o) {
  if (o.b_ != 0 && b_ != 0 && o.d_ != d_) {
    throw Error(ErrorKind::InvalidArgument, "surds with radicands " + d_.str() + " and " + o.d_.str() + " do not mix");
  }
  if (b_ == 0) d_ = o.d_;
}

QuadraticSurd QuadraticSurd::conjugate() const {
  QuadraticSurd c = *this;
  c.b_ = -c.b_;
  return c;
}

BigRational QuadraticSurd::norm() const { return a_ * a_ - b_ * b_ * BigRational(d_); }

int QuadraticSurd::sign() const {
  const int sa = a_.sign(), sb = b_.sign();
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  const BigRational n = norm();
  return n > 0 ? sa : sb;
}

BigInt QuadraticSurd::floor() const {
  BigInt f(std::floor(to_double()));
  // Correct the floating guess exactly.
  while ((*this - QuadraticSurd(BigRational(f))).sign() < 0) --f;
  while ((*this - QuadraticSurd(BigRational(f + 1))).sign() >= 0) ++f;
  return f;
}

long double QuadraticSurd::to_long_double() const {
  const long double a = a_.convert_to<long double>();
  if (b_ == 0) return a;
  const long double root = std::sqrt(d_.convert_to<long double>());
  const long double bs = b_.convert_to<long double>() * root;
  if (a_.sign() * b_.sign() >= 0) return a + bs;
  // a + b sqrt D = norm / (a - b sqrt D), where the denominator does not cancel.
  return norm().convert_to<long double>() / (a - bs);
}

double QuadraticSurd::to_double() const { return static_cast<double>(to_long_double()); }

std::string QuadraticSurd::str() const {
  if (b_ == 0) return a_.str();
  std::string out;
  if (a_ != 0) out = a_.str() + (b_ > 0 ? " + " : " - ");
  else if (b_ < 0) out = "-";
  const BigRational mag = b_ > 0 ? b_ : BigRational(-b_);
  const BigInt num = boost::multiprecision::numerator(mag), den = boost::multiprecision::denominator(mag);
  if (num != 1) out += num.str() + "*";
  out += "sqrt(" + d_.str() + ")";
  if (den != 1) out += "/" + den.str();
  return out;
}

int compare(const QuadraticSurd& x, const QuadraticSurd& y) {
  if (x.b_ != 0 && y.b_ != 0 && x.d_ != y.d_) {
    const long double a = x.to_long_double(), b = y.to_long_double();
    if (a != b) return a < b ? -1 : 1;
    // Distinct squarefree radicands never give equal values; keep the order total.
    return x.d_ < y.d_ ? -1 : 1;
  }
  return (x - y).sign();
}

QuadraticSurd QuadraticSurd::operator-() const {
  QuadraticSurd c = *this;
  c.a_ = -c.a_;
  c.b_ = -c.b_;
  return c;
}

QuadraticSurd& QuadraticSurd::operator+=(const QuadraticSurd& o) {
  unify(o);
  a_ += o.a_;
  b_ += o.b_;
  if (b_ == 0) d_ = 1;
  return *this;
}

QuadraticSurd& QuadraticSurd::operator-=(const QuadraticSurd& o) { return *this += -o; }

QuadraticSurd& QuadraticSurd::operator*=(const QuadraticSurd& o) {
  unify(o);
  const BigRational d(d_);
  BigRational a = a_ * o.a_ + b_ * o.b_ * d;
  BigRational b = a_ * o.b_ + b_ * o.a_;
  a_ = std::move(a);
  b_ = std::move(b);
  if (b_ == 0) d_ = 1;
  return *this;
}

QuadraticSurd& QuadraticSurd::operator/=(const QuadraticSurd& o) {
  const BigRational n = o.norm();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "division by zero surd");
  *this *= o.conjugate();
  a_ /= n;
  b_ /= n;
  return *this;
}

}  // namespace cantorlab
