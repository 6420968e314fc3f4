#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantorlab/interval.hpp"
#include "cantorlab/projective_map.hpp"
#include "cantorlab/rational.hpp"

namespace cantorlab {

/// Relative tolerance for image-vs-hull validation of floating constructions.
inline constexpr double kMarkovTolerance = 1e-9;

using ExactInterval = std::array<Rational, 2>;

/// Transition relation: targets[j] lists the pieces contained in psi(I_j).
using Transitions = std::vector<std::vector<std::size_t>>;

Transitions full_transitions(std::size_t pieces);

class MarkovPartition {
 public:
  MarkovPartition(std::vector<Interval> pieces, Transitions targets);
  MarkovPartition(std::vector<ExactInterval> pieces, Transitions targets);

  std::size_t size() const noexcept { return pieces_.size(); }
  const std::vector<Interval>& pieces() const noexcept { return pieces_; }
  const Interval& piece(std::size_t j) const { return pieces_.at(j); }
  const std::optional<std::vector<ExactInterval>>& exact_pieces() const noexcept { return exact_; }
  const Transitions& transitions() const noexcept { return targets_; }
  const std::vector<std::size_t>& targets(std::size_t j) const { return targets_.at(j); }
  /// Convex hull of the pieces reachable from j; the required image psi(I_j).
  Interval target_hull(std::size_t j) const;
  std::optional<ExactInterval> exact_target_hull(std::size_t j) const;
  /// Convex hull of all pieces.
  Interval hull() const;
  bool is_full() const;

 private:
  void validate() const;

  std::vector<Interval> pieces_;
  std::optional<std::vector<ExactInterval>> exact_;
  Transitions targets_;
};

enum class BranchKind { Affine, Moebius };

/// psi restricted to one piece. Only the inverse branch is used for
/// refinement; the forward map is kept for validation and bookkeeping.
struct BranchMap {
  Interval domain;
  BranchKind kind = BranchKind::Affine;
  ProjectiveMap forward;
  ProjectiveMap inverse;
  double min_derivative = 0.0;  ///< inf |psi'| on domain
  double max_derivative = 0.0;  ///< sup |psi'| on domain
  int orientation = 1;

  /// Slope of psi for affine branches.
  double slope() const;
  /// Offset of psi for affine branches (psi(x) = slope x + offset).
  double offset() const;
};

class RegularCantorSet {
 public:
  /// Validates the partition against explicit forward branch maps.
  static RegularCantorSet create(MarkovPartition partition, std::vector<ProjectiveMap> forward,
                                 std::string name = {});

  const MarkovPartition& partition() const noexcept { return partition_; }
  const std::vector<BranchMap>& branches() const noexcept { return branches_; }
  const BranchMap& branch(std::size_t j) const { return branches_.at(j); }
  std::size_t piece_count() const noexcept { return partition_.size(); }
  Interval hull() const { return partition_.hull(); }
  bool is_affine() const noexcept;
  bool has_orientation_reversing() const noexcept;
  const std::string& name() const noexcept { return name_; }

  /// The set a K + b, with branches conjugated accordingly.
  RegularCantorSet affine_image(const Rational& a, const Rational& b) const;
  RegularCantorSet affine_image(double a, double b) const;

 private:
  RegularCantorSet(MarkovPartition partition, std::vector<BranchMap> branches, std::string name);
  RegularCantorSet conjugated(const ProjectiveMap& a, std::vector<Interval> pieces,
                              std::optional<std::vector<ExactInterval>> exact) const;

  MarkovPartition partition_;
  std::vector<BranchMap> branches_;
  std::string name_;
};

/// Each branch is the affine map from I_j onto the hull of its targets;
/// orientation-preserving unless `reversed[j]` is set.
RegularCantorSet build_affine(std::vector<Interval> pieces, Transitions transitions,
                              std::vector<bool> reversed = {}, std::string name = {});
RegularCantorSet build_affine_exact(std::vector<ExactInterval> pieces, Transitions transitions,
                              std::vector<bool> reversed = {}, std::string name = {});

/// Numbers in [0,1] whose continued-fraction digits all lie in {1..N}.
/// Piece j holds the first digit j + 1; branches invert x -> 1/x - (j + 1).
RegularCantorSet gauss_cantor(int max_digit);

/// Extremes of C(N): [0; (N,1)...] and [0; (1,N)...].
double gauss_cantor_min(int max_digit);
double gauss_cantor_max(int max_digit);

struct CoverConfig {
  std::size_t budget = 2'000'000;
  double min_length = 1e-14;
};

/// Depth-n construction intervals, sorted by lo, each with its address.
class Cover {
 public:
  Cover(int depth, std::vector<Interval> intervals, std::vector<std::uint8_t> symbols);

  int depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  std::span<const std::uint8_t> address(std::size_t i) const;
  double max_length() const noexcept;
  double min_length() const noexcept;
  double total_length() const noexcept;

 private:
  int depth_;
  std::vector<Interval> intervals_;
  std::vector<std::uint8_t> symbols_;
};

/// Number of admissible words of length depth + 1 (saturates at double range).
double admissible_word_count(const RegularCantorSet& set, int depth);

Cover refine(const RegularCantorSet& set, int depth, const CoverConfig& config = {});

/// Largest construction interval at the given depth, computed without
/// enumerating the cover when all branches are affine.
double max_interval_length(const RegularCantorSet& set, int depth, const CoverConfig& config = {});

struct Membership {
  enum class Status { ExcludedAtDepth, InCoverAtDepth };
  Status status;
  int depth;

  bool excluded() const noexcept { return status == Status::ExcludedAtDepth; }
};

Membership contains(const RegularCantorSet& set, double x, int depth);

/// Child of a construction interval, produced by composing inverse branches.
struct ConstructionChild {
  Interval interval;
  ProjectiveMap chart;  ///< composition of inverse branches up to (excluding) the last symbol
  std::uint8_t symbol;
};

/// Depth-0 nodes (the pieces themselves), sorted by lo.
std::vector<ConstructionChild> construction_roots(const RegularCantorSet& set);
/// Children of a node, sorted by lo.
std::vector<ConstructionChild> construction_children(const RegularCantorSet& set,
                                                     const ConstructionChild& node);

/// All construction intervals up to a depth, level by level. Each level is
/// sorted by lo and the children of a node are contiguous in the next level.
class ConstructionTree {
 public:
  ConstructionTree(const RegularCantorSet& set, int depth, const CoverConfig& config = {});

  int depth() const noexcept { return static_cast<int>(levels_.size()) - 1; }
  std::size_t level_size(int k) const { return levels_.at(k).intervals.size(); }
  const std::vector<Interval>& intervals(int k) const { return levels_.at(k).intervals; }
  const std::vector<Interval>& leaves() const { return levels_.back().intervals; }
  std::uint32_t first_child(int k, std::size_t i) const { return levels_.at(k).first_child[i]; }
  std::uint32_t child_count(int k, std::size_t i) const { return levels_.at(k).child_count[i]; }
  std::uint32_t parent(int k, std::size_t i) const { return levels_.at(k).parent[i]; }
  std::uint8_t symbol(int k, std::size_t i) const { return levels_.at(k).symbol[i]; }
  /// Half-open range of leaf indices below node i of level k.
  std::pair<std::uint32_t, std::uint32_t> leaf_range(int k, std::size_t i) const;
  std::vector<std::uint8_t> address(int k, std::size_t i) const;

 private:
  struct Level {
    std::vector<Interval> intervals;
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> first_child;
    std::vector<std::uint32_t> child_count;
    std::vector<std::uint32_t> leaf_begin;
    std::vector<std::uint32_t> leaf_end;
    std::vector<std::uint8_t> symbol;
  };
  std::vector<Level> levels_;
};

std::string format_address(std::span<const std::uint8_t> address);

}  // namespace cantorlab
