#include "cantorlab/setops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cantorlab/dimension.hpp"
#include "cantorlab/error.hpp"
#include "cantorlab/parallel.hpp"

namespace cantorlab {

IntervalUnion IntervalUnion::merge(std::vector<Interval> intervals, int depth, double tolerance) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntervalUnion u;
  u.depth_ = depth;
  for (const auto& iv : intervals) {
    if (!u.intervals_.empty() && iv.lo <= u.intervals_.back().hi + tolerance) {
      u.intervals_.back().hi = std::max(u.intervals_.back().hi, iv.hi);
    } else {
      u.intervals_.push_back(iv);
    }
  }
  return u;
}

double IntervalUnion::total_length() const noexcept {
  double sum = 0;
  for (const auto& iv : intervals_) sum += iv.length();
  return sum;
}

Interval IntervalUnion::hull() const {
  if (intervals_.empty()) throw Error(ErrorKind::InvalidArgument, "hull of an empty union");
  return {intervals_.front().lo, intervals_.back().hi};
}

bool IntervalUnion::contains(double x) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  return it != intervals_.begin() && std::prev(it)->hi >= x;
}

IntervalUnion IntervalUnion::affine_image(double a, double b) const {
  std::vector<Interval> out;
  out.reserve(intervals_.size());
  for (const auto& iv : intervals_) {
    double p = a * iv.lo + b, q = a * iv.hi + b;
    out.push_back({std::min(p, q), std::max(p, q)});
  }
  return merge(std::move(out), depth_, 0.0);
}

IntervalUnion IntervalUnion::united(const IntervalUnion& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return merge(std::move(all), std::max(depth_, other.depth_));
}

std::pair<int, int> balanced_depths(const RegularCantorSet& k1, const RegularCantorSet& k2, int depth,
                                    double lambda) {
  if (depth < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
  const double scale = std::abs(lambda);
  if (scale == 0) return {depth, 0};
  const double r1 = max_interval_length(k1, depth);
  const double r2 = scale * max_interval_length(k2, depth);
  if (r1 >= r2) {
    int m = 0;
    while (m < depth && scale * max_interval_length(k2, m) > r1) ++m;
    return {depth, m};
  }
  int m = 0;
  while (m < depth && max_interval_length(k1, m) > r2) ++m;
  return {m, depth};
}

namespace {

// Endpoint rounding makes equal bridges and gaps differ in the last digits,
// which would disable the lemma for thickness-one sets such as the ternary set.
constexpr double kGapLemmaSlack = 1e-9;

// Depth-n leaves below one construction node, seen as a compact set.
struct NodeShape {
  double lo, hi;
  double thickness;
  double max_gap;
};

class SumTree {
 public:
  SumTree(const RegularCantorSet& set, int depth, const CoverConfig& config) : tree_(set, depth, config) {
    const auto& leaves = tree_.leaves();
    shapes_.resize(tree_.depth() + 2);
    shapes_[0].push_back(shape(leaves));
    for (int k = 0; k <= tree_.depth(); ++k) {
      auto& row = shapes_[k + 1];
      row.reserve(tree_.level_size(k));
      for (std::size_t i = 0; i < tree_.level_size(k); ++i) {
        auto [b, e] = tree_.leaf_range(k, i);
        row.push_back(shape(std::span(leaves).subspan(b, e - b)));
      }
    }
  }

  // Level -1 is a virtual root over all pieces.
  const NodeShape& at(int level, std::size_t i) const { return shapes_[level + 1][i]; }
  bool is_leaf(int level) const { return level == tree_.depth(); }
  std::pair<std::size_t, std::size_t> children(int level, std::size_t i) const {
    if (level < 0) return {0, tree_.level_size(0)};
    std::size_t first = tree_.first_child(level, i);
    return {first, first + tree_.child_count(level, i)};
  }

 private:
  static NodeShape shape(std::span<const Interval> leaves) {
    auto t = newhouse_thickness(leaves);
    return {leaves.front().lo, leaves.back().hi, t.value, t.max_gap};
  }

  ConstructionTree tree_;
  std::vector<std::vector<NodeShape>> shapes_;
};

}  // namespace

IntervalUnion cover_sum(const RegularCantorSet& k1, const RegularCantorSet& k2, int depth1, int depth2, SetOp op,
                        double lambda, const SumConfig& config) {
  if (depth1 < 0 || depth2 < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
  if (!std::isfinite(lambda)) throw Error(ErrorKind::InvalidArgument, "lambda must be finite");
  if (lambda == 0) return IntervalUnion::merge(refine(k1, depth1, config.cover).intervals(), depth1);

  const double mu = op == SetOp::Sum ? lambda : -lambda;
  const double scale = std::abs(mu);
  SumTree a(k1, depth1, config.cover);
  SumTree b(k2, depth2, config.cover);

  std::vector<Interval> emitted;
  IntervalUnion result;
  constexpr std::size_t kCompactAt = std::size_t{1} << 22;
  auto emit = [&](const NodeShape& x, const NodeShape& y) {
    double lo = x.lo + (mu > 0 ? mu * y.lo : mu * y.hi);
    double hi = x.hi + (mu > 0 ? mu * y.hi : mu * y.lo);
    emitted.push_back({lo, hi});
    if (emitted.size() >= kCompactAt) {
      result = result.united(IntervalUnion::merge(std::move(emitted)));
      emitted.clear();
    }
  };

  struct Pair {
    int level1;
    std::uint32_t i;
    int level2;
    std::uint32_t j;
  };
  std::vector<Pair> stack{{-1, 0, -1, 0}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    Pair p = stack.back();
    stack.pop_back();
    if (++visited > config.pair_budget) {
      throw Error(ErrorKind::BudgetExceeded, "cover sum exceeds the pair budget of " + std::to_string(config.pair_budget));
    }
    const NodeShape& x = a.at(p.level1, p.i);
    const NodeShape& y = b.at(p.level2, p.j);
    const bool leaf1 = a.is_leaf(p.level1), leaf2 = b.is_leaf(p.level2);
    if (leaf1 && leaf2) {
      emit(x, y);
      continue;
    }
    if (config.prune) {
      const double len_x = x.hi - x.lo, len_y = scale * (y.hi - y.lo);
      if (x.thickness * y.thickness >= 1.0 - kGapLemmaSlack && len_x >= scale * y.max_gap * (1.0 - kGapLemmaSlack) &&
          len_y >= x.max_gap * (1.0 - kGapLemmaSlack)) {
        emit(x, y);
        continue;
      }
    }
    const bool split_first = leaf2 || (!leaf1 && x.hi - x.lo >= scale * (y.hi - y.lo));
    if (split_first) {
      auto [c0, c1] = a.children(p.level1, p.i);
      for (std::size_t c = c0; c < c1; ++c) stack.push_back({p.level1 + 1, static_cast<std::uint32_t>(c), p.level2, p.j});
    } else {
      auto [c0, c1] = b.children(p.level2, p.j);
      for (std::size_t c = c0; c < c1; ++c) stack.push_back({p.level1, p.i, p.level2 + 1, static_cast<std::uint32_t>(c)});
    }
  }
  result = result.united(IntervalUnion::merge(std::move(emitted)));
  return IntervalUnion::merge(result.intervals(), std::max(depth1, depth2));
}

IntervalUnion cover_sum(const RegularCantorSet& k1, const RegularCantorSet& k2, int depth, SetOp op, double lambda,
                        const SumConfig& config) {
  return cover_sum(k1, k2, depth, depth, op, lambda, config);
}

bool contains_interval(const IntervalUnion& u, const Interval& target, double margin) {
  if (margin < 0) throw Error(ErrorKind::InvalidArgument, "margin must be nonnegative");
  const double lo = target.lo + margin, hi = target.hi - margin;
  if (lo > hi) throw Error(ErrorKind::EmptyTarget, "margin leaves an empty target");
  for (const auto& iv : u.intervals()) {
    if (iv.lo <= lo && hi <= iv.hi) return true;
  }
  return false;
}

double measure_estimate(const IntervalUnion& u) { return u.total_length(); }

std::vector<double> default_resolutions() {
  std::vector<double> out;
  for (int k = 6; k <= 14; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

double ProjectionScan::fraction_above(double theta) const {
  if (records.empty()) return 0.0;
  const std::size_t finest = static_cast<std::size_t>(
      std::min_element(resolutions.begin(), resolutions.end()) - resolutions.begin());
  std::size_t above = 0;
  for (const auto& r : records) above += r.covered_length[finest] > theta;
  return static_cast<double>(above) / static_cast<double>(records.size());
}

namespace {

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

ProjectionScan marstrand_scan(const RegularCantorSet& k1, const RegularCantorSet& k2, std::span<const double> lambdas,
                              int depth, std::span<const double> resolutions, const ScanConfig& config) {
  if (resolutions.empty()) throw Error(ErrorKind::InvalidArgument, "no resolutions");
  for (double r : resolutions) {
    if (!(r > 0)) throw Error(ErrorKind::InvalidArgument, "resolutions must be positive");
  }
  for (double l : lambdas) {
    if (l == 0 || !std::isfinite(l)) throw Error(ErrorKind::InvalidArgument, "scan lambdas must be finite and nonzero");
  }
  ProjectionScan scan;
  scan.lambdas.assign(lambdas.begin(), lambdas.end());
  scan.resolutions.assign(resolutions.begin(), resolutions.end());
  scan.depth = depth;
  scan.records.resize(lambdas.size());
  parallel_for(lambdas.size(), config.jobs, [&](std::size_t i) {
    ScanRecord& rec = scan.records[i];
    rec.lambda = lambdas[i];
    std::tie(rec.depth1, rec.depth2) = balanced_depths(k1, k2, depth, lambdas[i]);
    auto u = cover_sum(k1, k2, rec.depth1, rec.depth2, SetOp::Difference, lambdas[i], config.sum);
    for (double r : resolutions) rec.covered_length.push_back(static_cast<double>(grid_cells_hit(u.intervals(), r)) * r);
    rec.slope = log_log_slope(resolutions, rec.covered_length);
  });
  return scan;
}

std::vector<double> log_uniform_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0 && hi >= lo) || n == 0) throw Error(ErrorKind::InvalidArgument, "bad log-uniform grid");
  std::vector<double> out;
  if (n == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * static_cast<double>(i) / (n - 1)));
  out.back() = hi;
  return out;
}

void write_scan_csv(std::ostream& os, const ProjectionScan& scan) {
  os << "lambda,resolution,covered_length\n";
  char buf[96];
  for (const auto& rec : scan.records) {
    for (std::size_t k = 0; k < scan.resolutions.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", rec.lambda, scan.resolutions[k], rec.covered_length[k]);
      os << buf;
    }
  }
}

nlohmann::json scan_summary(const ProjectionScan& scan, double theta) {
  nlohmann::json slopes = nlohmann::json::array();
  for (const auto& r : scan.records) slopes.push_back(r.slope);
  return {{"fraction_above_theta", scan.fraction_above(theta)},
          {"theta", theta},
          {"n", scan.depth},
          {"lambda_count", scan.lambdas.size()},
          {"slopes", slopes}};
}

}  // namespace cantorlab
