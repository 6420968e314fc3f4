#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "cantorlab/cantor_set.hpp"
#include "cantorlab/surd.hpp"
#include "json.hpp"

namespace cantorlab {

/// Idealized affine horseshoe: two horizontal strips of height 1/expansion are
/// stretched vertically by `expansion` and squeezed horizontally by `contraction`
/// onto two vertical strips.
struct AffineHorseshoe {
  double contraction = 1.0 / 3.0;
  double expansion = 3.0;

  /// Throws InvalidArgument unless contraction in (0, 1/2) and expansion > 2.
  void validate() const;
};

enum class HorseshoeRegime { BelowOne, Critical, AboveOne };

const char* to_string(HorseshoeRegime regime) noexcept;

struct HorseshoeFactors {
  RegularCantorSet stable;
  RegularCantorSet unstable;
  double stable_dimension = 0;
  double unstable_dimension = 0;
  double dimension = 0;  ///< sum of the factor dimensions
  HorseshoeRegime regime = HorseshoeRegime::BelowOne;
};

/// Dimensions within this distance of 1 are reported as Critical.
inline constexpr double kCriticalTolerance = 1e-9;

HorseshoeFactors horseshoe_cantor_sets(const AffineHorseshoe& horseshoe);

/// Contraction for which the horseshoe with the given expansion has dimension
/// exactly 1, by bisection on the factor dimensions.
double critical_contraction(double expansion, double tol = 1e-13);

nlohmann::json to_json(const HorseshoeFactors& factors);

using IntMatrix = std::array<std::int64_t, 4>;  ///< row-major [[a, b], [c, d]]

struct PeriodicCount {
  int period;
  std::int64_t enumerated;  ///< points x in [0,1)^2 with A^n x = x mod 1, listed one by one
  std::int64_t formula;     ///< |lambda_u^n + lambda_s^n - 1 - det^n|, i.e. |lambda_u^n + lambda_s^n - 2| when det = 1
};

struct CatMapReport {
  IntMatrix matrix;
  QuadraticSurd unstable_eigenvalue;
  QuadraticSurd stable_eigenvalue;
  bool hyperbolic = false;        ///< |lambda_u| > 1 > |lambda_s|
  bool unit_product = false;      ///< lambda_u lambda_s == 1 exactly
  std::vector<PeriodicCount> counts;

  bool counts_match() const;
};

/// Hyperbolicity data and periodic-point counts of the toral automorphism
/// (defaults to the cat map [[2, 1], [1, 1]]). Throws BudgetExceeded when a
/// count would exceed the point budget.
CatMapReport cat_map_check(int n_periods, const IntMatrix& matrix = {2, 1, 1, 1},
                           std::int64_t point_budget = 50'000'000);

nlohmann::json to_json(const CatMapReport& report);

struct LyapunovConfig {
  int orbits = 200;
  int iterates = 10'000;
  int burn_in = 100;
  std::uint64_t seed = 1;
  double positive_threshold = 0.05;  ///< exponents above this count as positive
  unsigned jobs = 1;
};

struct LyapunovResult {
  double lambda = 0;
  std::vector<double> exponents;  ///< top exponent per orbit
  std::vector<double> sums;       ///< sum of both exponents per orbit
  double mean_exponent = 0;
  double fraction_positive = 0;
  double max_abs_sum = 0;
};

/// Lyapunov exponents of f(x, y) = (2x - y + lambda sin(2 pi x), x) mod 1 from
/// QR-normalized products of the derivative cocycle.
LyapunovResult standard_family_lyapunov(double lambda, const LyapunovConfig& config = {});

/// Point (x, y) after one step of the standard family, reduced to [0,1)^2.
std::array<double, 2> standard_map_step(double lambda, std::array<double, 2> point);

/// CSV rows `orbit_id,exponent`.
void write_lyapunov_csv(std::ostream& os, const LyapunovResult& result);
nlohmann::json to_json(const LyapunovResult& result);

}  // namespace cantorlab
