#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cantorlab/cantor_set.hpp"
#include "json.hpp"

namespace cantorlab {

/// Closed intervals closer than this count as overlapping, matching the
/// merge tolerance of cover sums.
inline constexpr double kOverlapTolerance = 1e-13;

struct IntersectResult {
  enum class Status { DisjointAtDepth, OverlapAtDepth };
  Status status;
  int depth;
  bool disjoint() const noexcept { return status == Status::DisjointAtDepth; }
};

/// Compares Cover(k1, m) with Cover(k2, m) + t for m = 0..depth, stopping at
/// the first depth where the unions are disjoint.
IntersectResult intersect_test(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, int depth,
                               const CoverConfig& config = {});

enum class GapLemmaResult { CertifiedIntersection, NoCertificate };

struct GapLemmaConfig {
  int thickness_depth = 8;
  /// Depth limit for deciding whether one hull sits in a gap of the other set.
  int link_depth = 40;
};

/// Certifies k1 and k2 + t intersect when tau1 tau2 > 1 and the two sets are
/// linked: hulls overlap and neither hull lies in a gap of the other set.
GapLemmaResult gap_lemma_test(const RegularCantorSet& k1, const RegularCantorSet& k2, double t,
                              const GapLemmaConfig& config = {});

/// Decides whether an interval misses the set entirely by descending
/// construction intervals: nullopt when undecided within the depth limit.
std::optional<bool> interval_meets_set(const RegularCantorSet& set, const Interval& window, int max_depth);

struct ScanPoint {
  enum class Status { Excluded, Overlap, Certified };
  double t;
  Status status;
  int depth;  ///< exclusion depth, or the depth tested for overlaps
};

std::string to_string(ScanPoint::Status status);

struct DifferenceScan {
  std::vector<ScanPoint> points;
  /// Fraction of grid points that are not excluded.
  double overlap_fraction() const;
};

DifferenceScan difference_scan(const RegularCantorSet& k1, const RegularCantorSet& k2, std::span<const double> grid,
                               int depth, const CoverConfig& config = {}, bool certify = true);

/// CSV rows `t,status,depth`.
void write_difference_scan_csv(std::ostream& os, const DifferenceScan& scan);

// Relative positions ---------------------------------------------------------

/// Renormalization step: refine both pieces, only the first, or only the second.
struct Move {
  enum class Kind : std::uint8_t { Both, First, Second };
  Kind kind;
  std::uint8_t first;   ///< target piece of k1 (Both, First)
  std::uint8_t second;  ///< target piece of k2 (Both, Second)
};

/// Grid over (s, u) for every pair of piece types and orientation. A position
/// (i1, i2, e, s, u) stands for the chart x -> e exp(s) x + u sending the part
/// of k2 in piece i2 into the frame of piece i1 of k1.
struct PositionRegion {
  double s_lo = -1, s_hi = 1, u_lo = -1, u_hi = 1;
  int ns = 0, nu = 0;
  int margin = 1;
  std::size_t types1 = 0, types2 = 0;
  int orientations = 1;  ///< 1: only e = +1; 2: both signs
  std::vector<std::uint8_t> member;
  std::vector<Move> witness;  ///< meaningful for member cells only

  double hs() const { return (s_hi - s_lo) / ns; }
  double hu() const { return (u_hi - u_lo) / nu; }
  std::size_t layer_count() const { return types1 * types2 * static_cast<std::size_t>(orientations); }
  std::size_t layer(std::size_t i1, std::size_t i2, int sign) const {
    return (i1 * types2 + i2) * static_cast<std::size_t>(orientations) + (sign > 0 ? 0 : 1);
  }
  std::size_t cell(std::size_t layer, int si, int ui) const {
    return (layer * static_cast<std::size_t>(ns) + static_cast<std::size_t>(si)) * static_cast<std::size_t>(nu) +
           static_cast<std::size_t>(ui);
  }
  std::size_t member_count() const;
  /// Whether (s, u) in layer (i1, i2, sign) lies in a member cell.
  bool covers(std::size_t i1, std::size_t i2, int sign, double s, double u) const;
};

struct RecurrenceConfig {
  double s_lo = -1, s_hi = 1;
  /// Translation range; defaults to the hull difference widened by a tenth.
  std::optional<double> u_lo, u_hi;
  int ns = 200, nu = 200;
  int margin = 1;
  std::size_t cell_budget = 20'000'000;
  unsigned jobs = 1;
};

struct RecurrenceResult {
  enum class Status { Certificate, NotFound };
  Status status;
  std::optional<PositionRegion> region;
  int sweeps = 0;
  /// Renormalization sensitivity L: a bound on how far one move can shift
  /// (s, u) per unit change of a branch slope or offset.
  double sensitivity = 0;
  /// margin * min(hs, hu) / L.
  double perturbation_radius = 0;
};

RecurrenceResult recurrent_compact_search(const RegularCantorSet& k1, const RegularCantorSet& k2,
                                          const RecurrenceConfig& config = {});

/// Whether a certificate covers the translation k2 + t.
bool certifies_translation(const PositionRegion& region, double t);

/// Certificate document: the two sets, grid geometry, run-length encoded
/// member masks and one witness move per member cell.
nlohmann::json certificate_to_json(const RegularCantorSet& k1, const RegularCantorSet& k2,
                                   const RecurrenceResult& result);

struct CertificateCheck {
  bool valid = false;
  std::size_t cells_checked = 0;
  std::string message;
};

/// Re-verifies a certificate document from scratch: every member cell must
/// force overlapping hulls and its witness image, widened by the margin, must
/// land on member cells.
CertificateCheck verify_certificate(const nlohmann::json& doc);

// Probes ---------------------------------------------------------------------

struct DStableConfig {
  int perturbations = 50;
  double radius = 1e-3;
  int depth = 12;
  std::uint64_t seed = 1;
  int max_resample = 100;
  CoverConfig cover;
};

struct DStableResult {
  double fraction = 0;
  std::vector<double> estimates;  ///< one dimension estimate per perturbation
};

/// Perturbs the piece endpoints of both affine sets uniformly by at most
/// `radius` and estimates the dimension of k1' cap (k2' + t) from the growth of
/// overlapping pairs of depth-m intervals, m in [depth/2, depth].
DStableResult d_stable_probe(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, double d,
                             const DStableConfig& config = {});

/// Dimension estimate for k1 cap (k2 + t) from overlapping depth-m pairs.
double intersection_dimension(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, int depth,
                              const CoverConfig& config = {});

/// Endpoints moved uniformly by at most `radius`, resampled until the result
/// validates.
RegularCantorSet perturb_affine(const RegularCantorSet& set, double radius, std::uint64_t seed, int max_resample = 100);

struct DensityProfile {
  double t0;
  int side;
  std::vector<double> deltas;
  std::vector<double> ratios;
};

/// Ratios m(S_n cap [t0, t0 + delta]) / delta (side +1) or over [t0 - delta, t0]
/// (side -1), with S_n the depth-n cover of k1 - k2.
DensityProfile tangency_density_experiment(const RegularCantorSet& k1, const RegularCantorSet& k2, double t0,
                                           std::span<const double> deltas, int depth, int side = 1);

/// CSV rows `delta,ratio`.
void write_density_csv(std::ostream& os, const DensityProfile& profile);

}  // namespace cantorlab
