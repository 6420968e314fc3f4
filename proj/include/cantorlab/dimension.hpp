#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cantorlab/cantor_set.hpp"
#include "json.hpp"

namespace cantorlab {

enum class DimensionMethod { BoxRegression, MoranRoot };

std::string to_string(DimensionMethod method);

struct DimensionEstimate {
  double value = 0.0;
  DimensionMethod method = DimensionMethod::MoranRoot;
  int depth_used = 0;
  double residual = 0.0;  ///< regression RMS, or final bisection bracket width
};

nlohmann::json to_json(const DimensionEstimate& estimate);

struct BoxCount {
  int depth;
  double count;
  double radius;
};

/// Number of construction intervals of length <= radius whose parent is longer.
std::size_t stopping_cover_size(const RegularCantorSet& set, double radius, const CoverConfig& config = {});

/// Least-squares slope of log N against -log r; r is the largest interval of
/// Cover(n) at each depth and N the size of the stopping cover at r, which is
/// Cover(n) itself when all branches share one ratio.
DimensionEstimate box_dimension(const RegularCantorSet& set, int depth_min, int depth_max,
                                const CoverConfig& config = {}, std::vector<BoxCount>* counts = nullptr);

/// Slope fit shared by the box estimators. Needs at least one sample.
DimensionEstimate fit_box_counts(std::span<const BoxCount> counts);

/// Number of grid cells [k r, (k+1) r) met by a sorted disjoint union.
std::size_t grid_cells_hit(std::span<const Interval> components, double resolution);

/// Box dimension of a union of intervals from grid counts at the given resolutions.
DimensionEstimate grid_box_dimension(std::span<const Interval> components, std::span<const double> resolutions);

/// d -> sum |I|^d - 1 over lengths already normalized by the hull.
double moran_excess(std::span<const double> normalized_lengths, double d);

/// Root of sum_{I in Cover(n)} (|I| / |hull|)^d = 1 by bisection on [0, 1 + 1e-9].
DimensionEstimate hausdorff_dimension_moran(const RegularCantorSet& set, int depth, double tol = 1e-9,
                                            const CoverConfig& config = {});

struct ThicknessEstimate {
  double value = 0.0;
  int depth_used = 0;
  std::string limiting_gap;  ///< address of the construction interval in which the gap opens
  Interval gap;
};

/// Newhouse thickness of a compact set given by its sorted components:
/// inf over gaps U of min(|L|, |R|) / |U|, with bridges L, R running to the
/// nearest gap at least as long as U (or the hull end). Infinite when there
/// are no gaps.
struct GapThickness {
  double value;
  std::size_t limiting_gap;  ///< index of the gap after component limiting_gap
  double max_gap;
};
GapThickness newhouse_thickness(std::span<const Interval> components);

ThicknessEstimate thickness(const RegularCantorSet& set, int depth, const CoverConfig& config = {});

/// (ds + du)^2 + max(ds, du)^2 < ds + du + max(ds, du), for 0 < ds, du < 1.
bool nonuniform_condition(double ds, double du);

/// CSV rows `depth,N,r`.
void write_box_counts_csv(std::ostream& os, std::span<const BoxCount> counts);

}  // namespace cantorlab
