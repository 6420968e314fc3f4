#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "cantorlab/cantor_set.hpp"
#include "json.hpp"

namespace cantorlab {

/// Intervals closer than this are merged; merging only enlarges a union, so
/// outer approximations stay outer.
inline constexpr double kMergeTolerance = 1e-13;

/// Sorted, pairwise disjoint intervals with lo_{i+1} > hi_i.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  /// Sorts and merges arbitrary intervals.
  static IntervalUnion merge(std::vector<Interval> intervals, int depth = 0, double tolerance = kMergeTolerance);

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  int depth() const noexcept { return depth_; }
  double total_length() const noexcept;
  Interval hull() const;
  bool contains(double x) const;
  /// x -> a x + b, keeping the union sorted.
  IntervalUnion affine_image(double a, double b) const;
  IntervalUnion united(const IntervalUnion& other) const;

 private:
  std::vector<Interval> intervals_;
  int depth_ = 0;
};

enum class SetOp { Sum, Difference };

struct SumConfig {
  CoverConfig cover;
  /// Node pairs visited by the recursion.
  std::size_t pair_budget = 50'000'000;
  /// Emit a pair of subtrees as one interval when the gap lemma shows their
  /// depth-n covers sum to an interval. Off gives the plain pairwise union.
  bool prune = true;
};

/// Depths (n1, n2) with the deeper side at n and the other side refined only
/// until its largest interval, scaled by |lambda|, is no longer than the
/// largest interval on the deeper side.
std::pair<int, int> balanced_depths(const RegularCantorSet& k1, const RegularCantorSet& k2, int depth,
                                    double lambda = 1.0);

/// Union of I + lambda J (Sum) or I - lambda J (Difference) over Cover(k1, n1)
/// and Cover(k2, n2).
IntervalUnion cover_sum(const RegularCantorSet& k1, const RegularCantorSet& k2, int depth1, int depth2, SetOp op,
                        double lambda = 1.0, const SumConfig& config = {});
IntervalUnion cover_sum(const RegularCantorSet& k1, const RegularCantorSet& k2, int depth, SetOp op,
                        double lambda = 1.0, const SumConfig& config = {});

/// True when [target.lo + margin, target.hi - margin] lies in one component.
bool contains_interval(const IntervalUnion& u, const Interval& target, double margin = 0.0);

/// Total length: an upper bound for the Lebesgue measure of the limit set.
double measure_estimate(const IntervalUnion& u);

/// Resolutions 2^-6 .. 2^-14.
std::vector<double> default_resolutions();

struct ScanRecord {
  double lambda;
  int depth1, depth2;
  std::vector<double> covered_length;  ///< one entry per resolution
  double slope;  ///< of log covered_length against log resolution
};

struct ProjectionScan {
  std::vector<double> lambdas;
  std::vector<double> resolutions;
  std::vector<ScanRecord> records;
  int depth = 0;

  /// Fraction of lambdas whose covered length at the finest resolution exceeds theta.
  double fraction_above(double theta) const;
};

struct ScanConfig {
  SumConfig sum;
  unsigned jobs = 1;
};

/// For each lambda, the depth-balanced cover of k1 - lambda k2 counted on
/// r-grids: covered_length(r) = (cells hit) * r.
ProjectionScan marstrand_scan(const RegularCantorSet& k1, const RegularCantorSet& k2, std::span<const double> lambdas,
                              int depth, std::span<const double> resolutions, const ScanConfig& config = {});

/// n values log-uniform in [lo, hi], endpoints included.
std::vector<double> log_uniform_grid(double lo, double hi, std::size_t n);

/// CSV rows `lambda,resolution,covered_length`.
void write_scan_csv(std::ostream& os, const ProjectionScan& scan);
nlohmann::json scan_summary(const ProjectionScan& scan, double theta);

}  // namespace cantorlab
