#include "cantorlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "cantorlab/dimension.hpp"
#include "cantorlab/error.hpp"
#include "cantorlab/parallel.hpp"

namespace cantorlab {

namespace {

RegularCantorSet two_piece(double ratio, const std::string& name) {
  return build_affine({{0.0, ratio}, {1.0 - ratio, 1.0}}, full_transitions(2), {}, name);
}

double two_piece_dimension(double ratio) { return std::log(2.0) / -std::log(ratio); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

/// Integers k with lo <= alpha k + beta < hi, as a closed range (empty when first > last).
std::pair<std::int64_t, std::int64_t> solve_range(std::int64_t alpha, std::int64_t beta, std::int64_t lo,
                                                  std::int64_t hi) {
  constexpr std::int64_t kWide = std::int64_t{1} << 60;
  if (alpha == 0) return (lo <= beta && beta < hi) ? std::pair{-kWide, kWide} : std::pair{std::int64_t{1}, std::int64_t{0}};
  if (alpha > 0) return {ceil_div(lo - beta, alpha), ceil_div(hi - beta, alpha) - 1};
  return {floor_div(beta - hi, -alpha) + 1, floor_div(beta - lo, -alpha)};
}

IntMatrix multiply(const IntMatrix& x, const IntMatrix& y) {
  auto mul = [](std::int64_t p, std::int64_t q) {
    std::int64_t r;
    if (__builtin_mul_overflow(p, q, &r)) throw Error(ErrorKind::Overflow, "matrix power overflows 64 bits");
    return r;
  };
  return {mul(x[0], y[0]) + mul(x[1], y[2]), mul(x[0], y[1]) + mul(x[1], y[3]), mul(x[2], y[0]) + mul(x[3], y[2]),
          mul(x[2], y[1]) + mul(x[3], y[3])};
}

/// Fixed points of x -> P x mod 1 on the torus, enumerated as x = M^-1 k with
/// M = P - I and k integral; each point is checked before it is counted.
std::int64_t enumerate_fixed_points(const IntMatrix& power, std::int64_t budget) {
  const std::int64_t a = power[0] - 1, b = power[1], c = power[2], d = power[3] - 1;
  const std::int64_t det = a * d - b * c;
  if (det == 0) throw Error(ErrorKind::InvalidArgument, "matrix power has eigenvalue 1");
  const std::int64_t n = std::abs(det), s = det > 0 ? 1 : -1;
  if (n > budget) throw Error(ErrorKind::BudgetExceeded, "periodic-point enumeration exceeds the point budget");
  // k = M x with x in [0,1)^2, so k1 lies between the extreme values of a x1 + b x2.
  const std::int64_t k1_lo = std::min<std::int64_t>(0, a) + std::min<std::int64_t>(0, b);
  const std::int64_t k1_hi = std::max<std::int64_t>(0, a) + std::max<std::int64_t>(0, b);
  std::int64_t count = 0;
  for (std::int64_t k1 = k1_lo; k1 <= k1_hi; ++k1) {
    // x1 n = s (d k1 - b k2) and x2 n = s (a k2 - c k1) must lie in [0, n).
    auto r1 = solve_range(-s * b, s * d * k1, 0, n);
    auto r2 = solve_range(s * a, -s * c * k1, 0, n);
    const std::int64_t first = std::max(r1.first, r2.first), last = std::min(r1.second, r2.second);
    for (std::int64_t k2 = first; k2 <= last; ++k2) {
      const std::int64_t u = s * (d * k1 - b * k2), v = s * (a * k2 - c * k1);
      const bool inside = 0 <= u && u < n && 0 <= v && v < n;
      const bool fixed = (power[0] * u + power[1] * v - u) % n == 0 && (power[2] * u + power[3] * v - v) % n == 0;
      if (!inside || !fixed) throw Error(ErrorKind::InvalidArgument, "lattice enumeration produced a non-fixed point");
      ++count;
    }
    if (count > budget) throw Error(ErrorKind::BudgetExceeded, "periodic-point enumeration exceeds the point budget");
  }
  return count;
}

}  // namespace

void AffineHorseshoe::validate() const {
  if (!(contraction > 0 && contraction < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "horseshoe contraction must lie in (0, 1/2)");
  }
  if (!(expansion > 2 && std::isfinite(expansion))) {
    throw Error(ErrorKind::InvalidArgument, "horseshoe expansion must exceed 2");
  }
}

const char* to_string(HorseshoeRegime regime) noexcept {
  switch (regime) {
    case HorseshoeRegime::BelowOne: return "below-one";
    case HorseshoeRegime::Critical: return "critical";
    case HorseshoeRegime::AboveOne: return "above-one";
  }
  return "";
}

HorseshoeFactors horseshoe_cantor_sets(const AffineHorseshoe& horseshoe) {
  horseshoe.validate();
  auto stable = two_piece(horseshoe.contraction, "horseshoe-stable");
  auto unstable = two_piece(1.0 / horseshoe.expansion, "horseshoe-unstable");
  const double ds = hausdorff_dimension_moran(stable, 4, 1e-12).value;
  const double du = hausdorff_dimension_moran(unstable, 4, 1e-12).value;
  const double total = ds + du;
  const auto regime = std::abs(total - 1) <= kCriticalTolerance ? HorseshoeRegime::Critical
                      : total < 1                               ? HorseshoeRegime::BelowOne
                                                                : HorseshoeRegime::AboveOne;
  return {std::move(stable), std::move(unstable), ds, du, total, regime};
}

double critical_contraction(double expansion, double tol) {
  AffineHorseshoe{0.25, expansion}.validate();
  const double target = 1.0 - two_piece_dimension(1.0 / expansion);
  double lo = 0.0, hi = 0.5;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (two_piece_dimension(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

nlohmann::json to_json(const HorseshoeFactors& f) {
  return {{"stable_dimension", f.stable_dimension},
          {"unstable_dimension", f.unstable_dimension},
          {"dimension", f.dimension},
          {"regime", to_string(f.regime)}};
}

bool CatMapReport::counts_match() const {
  return std::all_of(counts.begin(), counts.end(), [](const PeriodicCount& c) { return c.enumerated == c.formula; });
}

CatMapReport cat_map_check(int n_periods, const IntMatrix& matrix, std::int64_t point_budget) {
  if (n_periods < 1) throw Error(ErrorKind::InvalidArgument, "need at least one period");
  const std::int64_t det = matrix[0] * matrix[3] - matrix[1] * matrix[2];
  if (det != 1 && det != -1) throw Error(ErrorKind::InvalidArgument, "toral automorphism needs determinant +-1");
  const std::int64_t trace = matrix[0] + matrix[3];
  const BigInt disc = BigInt(trace) * trace - 4 * BigInt(det);
  if (disc <= 0) throw Error(ErrorKind::InvalidArgument, "matrix has no real eigenvalues");
  const QuadraticSurd root = QuadraticSurd::sqrt(disc);
  const QuadraticSurd half_trace(BigRational(trace, 2));
  QuadraticSurd plus = half_trace + root / QuadraticSurd(2), minus = half_trace - root / QuadraticSurd(2);
  auto abs_surd = [](const QuadraticSurd& x) { return x.sign() < 0 ? -x : x; };
  if (abs_surd(plus) < abs_surd(minus)) std::swap(plus, minus);

  CatMapReport report{matrix, plus, minus, false, false, {}};
  report.hyperbolic = abs_surd(plus) > QuadraticSurd(1) && abs_surd(minus) < QuadraticSurd(1);
  report.unit_product = plus * minus == QuadraticSurd(1);

  IntMatrix power = matrix;
  QuadraticSurd up = plus, down = minus;
  for (int n = 1; n <= n_periods; ++n) {
    if (n > 1) {
      power = multiply(power, matrix);
      up *= plus;
      down *= minus;
    }
    const QuadraticSurd formula = up + down - QuadraticSurd(1) - up * down;
    if (!formula.is_rational()) throw Error(ErrorKind::InvalidArgument, "trace formula is not an integer");
    const BigRational value = abs(formula.rational_part());
    report.counts.push_back({n, enumerate_fixed_points(power, point_budget),
                             static_cast<std::int64_t>(boost::multiprecision::numerator(value))});
  }
  return report;
}

nlohmann::json to_json(const CatMapReport& r) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& c : r.counts) counts.push_back({{"period", c.period}, {"enumerated", c.enumerated}, {"formula", c.formula}});
  return {{"matrix", r.matrix},
          {"unstable_eigenvalue", r.unstable_eigenvalue.str()},
          {"stable_eigenvalue", r.stable_eigenvalue.str()},
          {"unstable_eigenvalue_value", r.unstable_eigenvalue.to_double()},
          {"stable_eigenvalue_value", r.stable_eigenvalue.to_double()},
          {"hyperbolic", r.hyperbolic},
          {"unit_product", r.unit_product},
          {"counts", counts},
          {"counts_match", r.counts_match()}};
}

std::array<double, 2> standard_map_step(double lambda, std::array<double, 2> p) {
  const double x = 2 * p[0] - p[1] + lambda * std::sin(2 * std::numbers::pi * p[0]);
  auto wrap = [](double v) {
    v -= std::floor(v);
    return v >= 1.0 ? 0.0 : v;
  };
  return {wrap(x), p[0]};
}

LyapunovResult standard_family_lyapunov(double lambda, const LyapunovConfig& config) {
  if (config.orbits < 1 || config.iterates < 1 || config.burn_in < 0) {
    throw Error(ErrorKind::InvalidArgument, "orbits and iterates must be positive");
  }
  LyapunovResult result;
  result.lambda = lambda;
  result.exponents.resize(static_cast<std::size_t>(config.orbits));
  result.sums.resize(result.exponents.size());
  parallel_for(result.exponents.size(), config.jobs, [&](std::size_t id) {
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(id)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::array<double, 2> p{uniform(rng), uniform(rng)};
    for (int i = 0; i < config.burn_in; ++i) p = standard_map_step(lambda, p);
    // Columns of the orthonormal frame Q; the cocycle is J = [[2 + 2 pi lambda cos(2 pi x), -1], [1, 0]].
    double q00 = 1, q10 = 0, q01 = 0, q11 = 1;
    double log1 = 0, log2 = 0;
    for (int i = 0; i < config.iterates; ++i) {
      const double j00 = 2 + 2 * std::numbers::pi * lambda * std::cos(2 * std::numbers::pi * p[0]);
      const double a0 = j00 * q00 - q10, a1 = q00;
      const double b0 = j00 * q01 - q11, b1 = q01;
      const double r00 = std::hypot(a0, a1);
      q00 = a0 / r00;
      q10 = a1 / r00;
      const double r01 = q00 * b0 + q10 * b1;
      const double c0 = b0 - r01 * q00, c1 = b1 - r01 * q10;
      const double r11 = std::hypot(c0, c1);
      q01 = c0 / r11;
      q11 = c1 / r11;
      log1 += std::log(r00);
      log2 += std::log(r11);
      p = standard_map_step(lambda, p);
    }
    result.exponents[id] = log1 / config.iterates;
    result.sums[id] = (log1 + log2) / config.iterates;
  });
  double total = 0;
  std::size_t positive = 0;
  for (std::size_t i = 0; i < result.exponents.size(); ++i) {
    total += result.exponents[i];
    if (result.exponents[i] > config.positive_threshold) ++positive;
    result.max_abs_sum = std::max(result.max_abs_sum, std::abs(result.sums[i]));
  }
  result.mean_exponent = total / static_cast<double>(result.exponents.size());
  result.fraction_positive = static_cast<double>(positive) / static_cast<double>(result.exponents.size());
  return result;
}

void write_lyapunov_csv(std::ostream& os, const LyapunovResult& result) {
  os << "orbit_id,exponent\n";
  char buf[40];
  for (std::size_t i = 0; i < result.exponents.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", result.exponents[i]);
    os << i << ',' << buf << '\n';
  }
}

nlohmann::json to_json(const LyapunovResult& r) {
  return {{"lambda", r.lambda},
          {"orbits", r.exponents.size()},
          {"mean_exponent", r.mean_exponent},
          {"fraction_positive", r.fraction_positive},
          {"max_abs_exponent_sum", r.max_abs_sum}};
}

}  // namespace cantorlab
