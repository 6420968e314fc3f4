#include "cantorlab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cantorlab/error.hpp"

namespace cantorlab {

std::string to_string(DimensionMethod method) {
  return method == DimensionMethod::BoxRegression ? "box-regression" : "moran-root";
}

nlohmann::json to_json(const DimensionEstimate& e) {
  return {{"value", e.value}, {"method", to_string(e.method)}, {"residual", e.residual}, {"depth_used", e.depth_used}};
}

DimensionEstimate fit_box_counts(std::span<const BoxCount> counts) {
  if (counts.empty()) throw Error(ErrorKind::InvalidArgument, "box dimension needs at least one depth");
  DimensionEstimate est;
  est.method = DimensionMethod::BoxRegression;
  est.depth_used = counts.back().depth;
  if (counts.size() == 1) {
    est.value = std::log(counts[0].count) / -std::log(counts[0].radius);
    return est;
  }
  const double n = static_cast<double>(counts.size());
  double sx = 0, sy = 0;
  for (const auto& c : counts) {
    sx += -std::log(c.radius);
    sy += std::log(c.count);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& c : counts) {
    double dx = -std::log(c.radius) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(c.count) - my);
  }
  if (sxx == 0) throw Error(ErrorKind::DegenerateCover, "all radii coincide");
  est.value = sxy / sxx;
  double rss = 0;
  for (const auto& c : counts) {
    double fit = my + est.value * (-std::log(c.radius) - mx);
    rss += (std::log(c.count) - fit) * (std::log(c.count) - fit);
  }
  est.residual = std::sqrt(rss / n);
  return est;
}

std::size_t stopping_cover_size(const RegularCantorSet& set, double radius, const CoverConfig& config) {
  std::size_t count = 0, visited = 0;
  // Endpoint rounding grows like machine epsilon times the hull, not the interval.
  const double slack = radius * 1e-9 + 8 * std::numeric_limits<double>::epsilon() * set.hull().length();
  std::vector<ConstructionChild> stack = construction_roots(set);
  while (!stack.empty()) {
    ConstructionChild node = std::move(stack.back());
    stack.pop_back();
    if (++visited > config.budget) throw Error(ErrorKind::BudgetExceeded, "box count exceeds the cover budget");
    if (node.interval.length() <= radius + slack) {
      ++count;
      continue;
    }
    if (node.interval.length() < config.min_length) throw Error(ErrorKind::PrecisionLoss, "box count below length floor");
    for (auto& child : construction_children(set, node)) stack.push_back(std::move(child));
  }
  return count;
}

DimensionEstimate box_dimension(const RegularCantorSet& set, int depth_min, int depth_max,
                                const CoverConfig& config, std::vector<BoxCount>* counts) {
  if (depth_min < 0 || depth_max < depth_min) throw Error(ErrorKind::InvalidArgument, "empty depth range");
  std::vector<BoxCount> samples;
  for (int n = depth_min; n <= depth_max; ++n) {
    const double r = max_interval_length(set, n);
    samples.push_back({n, static_cast<double>(stopping_cover_size(set, r, config)), r});
  }
  if (counts) *counts = samples;
  return fit_box_counts(samples);
}

std::size_t grid_cells_hit(std::span<const Interval> components, double resolution) {
  if (!(resolution > 0)) throw Error(ErrorKind::InvalidArgument, "resolution must be positive");
  std::size_t cells = 0;
  bool have_last = false;
  long long last = 0;
  for (const auto& iv : components) {
    long long a = static_cast<long long>(std::floor(iv.lo / resolution));
    long long b = static_cast<long long>(std::floor(iv.hi / resolution));
    if (have_last && a <= last) a = last + 1;
    if (b >= a) cells += static_cast<std::size_t>(b - a + 1);
    if (!have_last || b > last) last = b;
    have_last = true;
  }
  return cells;
}

DimensionEstimate grid_box_dimension(std::span<const Interval> components, std::span<const double> resolutions) {
  std::vector<BoxCount> samples;
  int k = 0;
  for (double r : resolutions) {
    samples.push_back({k++, static_cast<double>(grid_cells_hit(components, r)), r});
  }
  auto est = fit_box_counts(samples);
  est.depth_used = 0;
  return est;
}

double moran_excess(std::span<const double> normalized_lengths, double d) {
  long double sum = 0;
  for (double l : normalized_lengths) sum += std::pow(static_cast<long double>(l), static_cast<long double>(d));
  return static_cast<double>(sum - 1.0L);
}

DimensionEstimate hausdorff_dimension_moran(const RegularCantorSet& set, int depth, double tol,
                                            const CoverConfig& config) {
  if (!(tol > 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  Cover cover = refine(set, depth, config);
  const double scale = set.hull().length();
  std::vector<long double> logs;
  logs.reserve(cover.size());
  for (const auto& iv : cover.intervals()) {
    if (!(iv.length() > 0)) throw Error(ErrorKind::DegenerateCover, "cover interval of zero length");
    logs.push_back(std::log(static_cast<long double>(iv.length()) / scale));
  }
  auto excess = [&](long double d) {
    long double sum = 0;
    for (long double l : logs) sum += std::exp(d * l);
    return sum - 1.0L;
  };
  long double lo = 0.0L, hi = 1.0L + 1e-9L;
  DimensionEstimate est;
  est.method = DimensionMethod::MoranRoot;
  est.depth_used = depth;
  if (excess(hi) >= 0) {
    // The cover fills its hull: nothing to bisect.
    est.value = 1.0;
    return est;
  }
  while (hi - lo > tol) {
    long double mid = 0.5L * (lo + hi);
    (excess(mid) > 0 ? lo : hi) = mid;
  }
  est.value = static_cast<double>(0.5L * (lo + hi));
  est.residual = static_cast<double>(hi - lo);
  return est;
}

GapThickness newhouse_thickness(std::span<const Interval> components) {
  GapThickness out{std::numeric_limits<double>::infinity(), 0, 0.0};
  const std::size_t m = components.size();
  if (m < 2) return out;
  const std::size_t gaps = m - 1;
  std::vector<double> len(gaps);
  for (std::size_t i = 0; i < gaps; ++i) {
    len[i] = components[i + 1].lo - components[i].hi;
    out.max_gap = std::max(out.max_gap, len[i]);
  }
  // Equal gaps computed through different rounding paths still count as ties.
  auto at_least = [&](std::size_t j, std::size_t i) { return len[j] >= len[i] * (1.0 - 1e-12); };

  std::vector<double> left(gaps), right(gaps);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < gaps; ++i) {
    while (!stack.empty() && !at_least(stack.back(), i)) stack.pop_back();
    double edge = stack.empty() ? components.front().lo : components[stack.back() + 1].lo;
    left[i] = components[i].hi - edge;
    stack.push_back(i);
  }
  stack.clear();
  for (std::size_t i = gaps; i-- > 0;) {
    while (!stack.empty() && !at_least(stack.back(), i)) stack.pop_back();
    double edge = stack.empty() ? components.back().hi : components[stack.back()].hi;
    right[i] = edge - components[i + 1].lo;
    stack.push_back(i);
  }
  for (std::size_t i = 0; i < gaps; ++i) {
    if (!(len[i] > 0)) continue;  // touching components are one bridge
    double tau = std::min(left[i], right[i]) / len[i];
    if (tau < out.value) {
      out.value = tau;
      out.limiting_gap = i;
    }
  }
  return out;
}

ThicknessEstimate thickness(const RegularCantorSet& set, int depth, const CoverConfig& config) {
  Cover cover = refine(set, depth, config);
  if (cover.size() < 2) throw Error(ErrorKind::NoGaps, "no gap exposed at depth " + std::to_string(depth));
  auto t = newhouse_thickness(cover.intervals());
  ThicknessEstimate est;
  est.value = t.value;
  est.depth_used = depth;
  est.gap = {cover[t.limiting_gap].hi, cover[t.limiting_gap + 1].lo};
  auto a = cover.address(t.limiting_gap), b = cover.address(t.limiting_gap + 1);
  std::size_t common = 0;
  while (common < a.size() && a[common] == b[common]) ++common;
  est.limiting_gap = common == 0 ? std::string("root") : format_address(a.first(common));
  return est;
}

bool nonuniform_condition(double ds, double du) {
  if (!(ds > 0 && ds < 1 && du > 0 && du < 1)) {
    throw Error(ErrorKind::InvalidArgument, "dimensions must lie in (0, 1)");
  }
  const double s = ds + du;
  const double m = std::max(ds, du);
  return s * s + m * m < s + m;
}

void write_box_counts_csv(std::ostream& os, std::span<const BoxCount> counts) {
  os << "depth,N,r\n";
  char buf[64];
  for (const auto& c : counts) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", c.depth, c.count, c.radius);
    os << buf;
  }
}

}  // namespace cantorlab
