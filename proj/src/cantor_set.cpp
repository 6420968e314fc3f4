#include "cantorlab/cantor_set.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "cantorlab/error.hpp"

namespace cantorlab {

namespace {

constexpr std::size_t kMaxPieces = 256;

std::vector<Interval> to_doubles(const std::vector<ExactInterval>& pieces) {
  std::vector<Interval> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) out.push_back({p[0].to_double(), p[1].to_double()});
  return out;
}

bool is_mixing(const Transitions& targets) {
  const std::size_t r = targets.size();
  std::vector<std::bitset<kMaxPieces>> step(r), power(r);
  for (std::size_t j = 0; j < r; ++j) {
    for (auto s : targets[j]) step[j].set(s);
  }
  power = step;
  const std::size_t max_exponent = std::max<std::size_t>(1, r * r);
  for (std::size_t e = 1; e <= max_exponent; ++e) {
    bool positive = true;
    for (std::size_t j = 0; j < r && positive; ++j) positive = power[j].count() == r;
    if (positive) return true;
    std::vector<std::bitset<kMaxPieces>> next(r);
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t s = 0; s < r; ++s) {
        if (power[j].test(s)) next[j] |= step[s];
      }
    }
    power = std::move(next);
  }
  return false;
}

Interval image(const ProjectiveMap& map, const MarkovPartition& partition, std::size_t piece) {
  double a, b;
  if (const auto& exact = partition.exact_pieces()) {
    a = map.apply((*exact)[piece][0]);
    b = map.apply((*exact)[piece][1]);
  } else {
    a = map.apply(partition.piece(piece).lo);
    b = map.apply(partition.piece(piece).hi);
  }
  return a <= b ? Interval{a, b} : Interval{b, a};
}

}  // namespace

Transitions full_transitions(std::size_t pieces) {
  std::vector<std::size_t> all(pieces);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return Transitions(pieces, all);
}

MarkovPartition::MarkovPartition(std::vector<Interval> pieces, Transitions targets)
    : pieces_(std::move(pieces)), targets_(std::move(targets)) {
  validate();
}

MarkovPartition::MarkovPartition(std::vector<ExactInterval> pieces, Transitions targets)
    : pieces_(to_doubles(pieces)), exact_(std::move(pieces)), targets_(std::move(targets)) {
  if (exact_) {
    for (const auto& p : *exact_) {
      if (!(p[0] < p[1])) throw Error(ErrorKind::InvalidArgument, "piece with lo >= hi");
    }
  }
  validate();
}

void MarkovPartition::validate() const {
  const std::size_t r = pieces_.size();
  if (r == 0) throw Error(ErrorKind::InvalidArgument, "empty partition");
  if (r > kMaxPieces) throw Error(ErrorKind::InvalidArgument, "more than 256 pieces");
  if (targets_.size() != r) {
    throw Error(ErrorKind::InvalidArgument, "transition relation size does not match pieces");
  }
  for (const auto& p : pieces_) {
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi)) {
      throw Error(ErrorKind::InvalidArgument, "piece must satisfy lo < hi");
    }
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pieces_[a].lo < pieces_[b].lo; });
  for (std::size_t i = 1; i < r; ++i) {
    const auto& left = pieces_[order[i - 1]];
    const auto& right = pieces_[order[i]];
    bool separated = left.hi < right.lo;
    if (exact_) separated = (*exact_)[order[i - 1]][1] < (*exact_)[order[i]][0];
    if (!separated) {
      std::ostringstream os;
      os << "pieces " << order[i - 1] << " " << left << " and " << order[i] << " " << right
         << " are not separated by a gap";
      throw Error(ErrorKind::OverlappingPieces, os.str());
    }
  }
  for (std::size_t j = 0; j < r; ++j) {
    if (targets_[j].empty()) throw Error(ErrorKind::NonMixingTransitions, "piece without targets");
    for (auto s : targets_[j]) {
      if (s >= r) throw Error(ErrorKind::InvalidArgument, "transition target out of range");
    }
  }
  if (!is_mixing(targets_)) {
    throw Error(ErrorKind::NonMixingTransitions, "no power of the transition matrix is positive");
  }
}

Interval MarkovPartition::target_hull(std::size_t j) const {
  const auto& t = targets_.at(j);
  Interval h = pieces_[t.front()];
  for (auto s : t) h = cantorlab::hull(h, pieces_[s]);
  return h;
}

std::optional<ExactInterval> MarkovPartition::exact_target_hull(std::size_t j) const {
  if (!exact_) return std::nullopt;
  const auto& t = targets_.at(j);
  ExactInterval h = (*exact_)[t.front()];
  for (auto s : t) {
    h[0] = std::min(h[0], (*exact_)[s][0]);
    h[1] = std::max(h[1], (*exact_)[s][1]);
  }
  return h;
}

Interval MarkovPartition::hull() const {
  Interval h = pieces_.front();
  for (const auto& p : pieces_) h = cantorlab::hull(h, p);
  return h;
}

bool MarkovPartition::is_full() const {
  for (const auto& t : targets_) {
    if (t.size() != pieces_.size()) return false;
  }
  return true;
}

double BranchMap::slope() const {
  const auto& c = forward.coefficients();
  return static_cast<double>(c[0] / c[3]);
}

double BranchMap::offset() const {
  const auto& c = forward.coefficients();
  return static_cast<double>(c[1] / c[3]);
}

RegularCantorSet::RegularCantorSet(MarkovPartition partition, std::vector<BranchMap> branches,
                                   std::string name)
    : partition_(std::move(partition)), branches_(std::move(branches)), name_(std::move(name)) {}

RegularCantorSet RegularCantorSet::create(MarkovPartition partition,
                                          std::vector<ProjectiveMap> forward, std::string name) {
  const std::size_t r = partition.size();
  if (forward.size() != r) throw Error(ErrorKind::InvalidArgument, "one branch per piece required");
  std::vector<BranchMap> branches;
  branches.reserve(r);
  for (std::size_t j = 0; j < r; ++j) {
    const Interval dom = partition.piece(j);
    const ProjectiveMap& psi = forward[j];
    if (!psi.regular_on(dom.lo, dom.hi)) {
      throw Error(ErrorKind::InvalidArgument, "branch " + std::to_string(j) + " has a pole on its piece");
    }
    BranchMap b;
    b.domain = dom;
    b.kind = psi.is_affine() ? BranchKind::Affine : BranchKind::Moebius;
    b.forward = psi;
    b.inverse = psi.inverse();
    b.orientation = psi.orientation();
    long double d0 = psi.derivative_abs(dom.lo);
    long double d1 = psi.derivative_abs(dom.hi);
    b.min_derivative = static_cast<double>(std::min(d0, d1));
    b.max_derivative = static_cast<double>(std::max(d0, d1));
    if (!(b.min_derivative > 1.0)) {
      std::ostringstream os;
      os << "branch " << j << " has |psi'| >= " << b.min_derivative << ", not expanding";
      throw Error(ErrorKind::ContractionViolation, os.str());
    }

    // psi(I_j) must be the hull of the target pieces.
    const Interval target = partition.target_hull(j);
    bool exact_checked = false;
    if (const auto& exact = partition.exact_pieces()) {
      auto a = psi.apply_exact((*exact)[j][0]);
      auto c = psi.apply_exact((*exact)[j][1]);
      auto h = partition.exact_target_hull(j);
      if (a && c && h) {
        auto lo = std::min(*a, *c), hi = std::max(*a, *c);
        if (lo != (*h)[0] || hi != (*h)[1]) {
          throw Error(ErrorKind::MarkovViolation,
                      "branch " + std::to_string(j) + " image " + lo.str() + ".." + hi.str() +
                          " is not the hull of its targets");
        }
        exact_checked = true;
      }
    }
    if (!exact_checked) {
      Interval img = image(psi, partition, j);
      double tol = kMarkovTolerance * std::max(1.0, target.length());
      if (std::fabs(img.lo - target.lo) > tol || std::fabs(img.hi - target.hi) > tol) {
        std::ostringstream os;
        os << "branch " << j << " image " << img << " differs from target hull " << target;
        throw Error(ErrorKind::MarkovViolation, os.str());
      }
    }
    branches.push_back(std::move(b));
  }
  return RegularCantorSet(std::move(partition), std::move(branches), std::move(name));
}

bool RegularCantorSet::is_affine() const noexcept {
  return std::all_of(branches_.begin(), branches_.end(),
                     [](const BranchMap& b) { return b.kind == BranchKind::Affine; });
}

bool RegularCantorSet::has_orientation_reversing() const noexcept {
  return std::any_of(branches_.begin(), branches_.end(),
                     [](const BranchMap& b) { return b.orientation < 0; });
}

RegularCantorSet RegularCantorSet::conjugated(const ProjectiveMap& a, std::vector<Interval> pieces,
                                              std::optional<std::vector<ExactInterval>> exact) const {
  ProjectiveMap a_inv = a.inverse();
  std::vector<ProjectiveMap> forward;
  forward.reserve(branches_.size());
  for (const auto& b : branches_) forward.push_back(a.compose(b.forward).compose(a_inv));
  auto partition = exact ? MarkovPartition(std::move(*exact), partition_.transitions())
                         : MarkovPartition(std::move(pieces), partition_.transitions());
  return create(std::move(partition), std::move(forward), name_);
}

RegularCantorSet RegularCantorSet::affine_image(const Rational& a, const Rational& b) const {
  if (a.num() == 0) throw Error(ErrorKind::InvalidArgument, "affine image with zero scale");
  ProjectiveMap map = ProjectiveMap::affine(a, b);
  if (const auto& exact = partition_.exact_pieces()) {
    std::vector<ExactInterval> pieces;
    for (const auto& p : *exact) {
      Rational x = a * p[0] + b, y = a * p[1] + b;
      pieces.push_back({std::min(x, y), std::max(x, y)});
    }
    return conjugated(map, {}, std::move(pieces));
  }
  return affine_image(a.to_double(), b.to_double());
}

RegularCantorSet RegularCantorSet::affine_image(double a, double b) const {
  if (a == 0.0) throw Error(ErrorKind::InvalidArgument, "affine image with zero scale");
  ProjectiveMap map = ProjectiveMap::affine(static_cast<long double>(a), static_cast<long double>(b));
  std::vector<Interval> pieces;
  for (const auto& p : partition_.pieces()) {
    double x = a * p.lo + b, y = a * p.hi + b;
    pieces.push_back({std::min(x, y), std::max(x, y)});
  }
  return conjugated(map, std::move(pieces), std::nullopt);
}

namespace {

template <class Piece>
std::vector<ProjectiveMap> affine_branches(const std::vector<Piece>& pieces, const MarkovPartition& partition,
                                           const std::vector<bool>& reversed);

template <>
std::vector<ProjectiveMap> affine_branches(const std::vector<ExactInterval>& pieces,
                                           const MarkovPartition& partition,
                                           const std::vector<bool>& reversed) {
  std::vector<ProjectiveMap> out;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    auto h = *partition.exact_target_hull(j);
    const bool rev = j < reversed.size() && reversed[j];
    Rational slope = (h[1] - h[0]) / (pieces[j][1] - pieces[j][0]);
    if (rev) slope = -slope;
    Rational offset = (rev ? h[1] : h[0]) - slope * pieces[j][0];
    out.push_back(ProjectiveMap::affine(slope, offset));
  }
  return out;
}

template <>
std::vector<ProjectiveMap> affine_branches(const std::vector<Interval>& pieces,
                                           const MarkovPartition& partition,
                                           const std::vector<bool>& reversed) {
  std::vector<ProjectiveMap> out;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    Interval h = partition.target_hull(j);
    const bool rev = j < reversed.size() && reversed[j];
    long double slope = (static_cast<long double>(h.hi) - h.lo) /
                        (static_cast<long double>(pieces[j].hi) - pieces[j].lo);
    if (rev) slope = -slope;
    long double offset = (rev ? h.hi : h.lo) - slope * pieces[j].lo;
    out.push_back(ProjectiveMap::affine(slope, offset));
  }
  return out;
}

}  // namespace

RegularCantorSet build_affine(std::vector<Interval> pieces, Transitions transitions,
                              std::vector<bool> reversed, std::string name) {
  // Rational inputs in disguise (0.45, 2/5 rounded) are promoted to exact arithmetic.
  std::vector<ExactInterval> exact;
  for (const auto& p : pieces) {
    auto lo = Rational::from_double(p.lo), hi = Rational::from_double(p.hi);
    if (!lo || !hi) break;
    exact.push_back({*lo, *hi});
  }
  if (exact.size() == pieces.size()) {
    return build_affine_exact(std::move(exact), std::move(transitions), std::move(reversed), std::move(name));
  }
  MarkovPartition partition(pieces, std::move(transitions));
  auto forward = affine_branches(pieces, partition, reversed);
  return RegularCantorSet::create(std::move(partition), std::move(forward), std::move(name));
}

RegularCantorSet build_affine_exact(std::vector<ExactInterval> pieces, Transitions transitions,
                              std::vector<bool> reversed, std::string name) {
  MarkovPartition partition(pieces, std::move(transitions));
  auto forward = affine_branches(pieces, partition, reversed);
  return RegularCantorSet::create(std::move(partition), std::move(forward), std::move(name));
}

double gauss_cantor_min(int max_digit) {
  // Root of N x^2 + N x - 1 = 0, written without cancellation.
  long double n = max_digit;
  return static_cast<double>(2.0L / (n + std::sqrt(n * n + 4.0L * n)));
}

double gauss_cantor_max(int max_digit) {
  long double n = max_digit;
  long double m = 2.0L / (n + std::sqrt(n * n + 4.0L * n));
  return static_cast<double>(1.0L / (1.0L + m));
}

RegularCantorSet gauss_cantor(int max_digit) {
  if (max_digit < 2) {
    throw Error(ErrorKind::InvalidArgument, "gauss_cantor needs N >= 2 (one digit gives a single point)");
  }
  if (max_digit > static_cast<int>(kMaxPieces)) throw Error(ErrorKind::InvalidArgument, "N too large");
  const long double n = max_digit;
  const long double lo = 2.0L / (n + std::sqrt(n * n + 4.0L * n));
  const long double hi = 1.0L / (1.0L + lo);
  std::vector<Interval> pieces;
  std::vector<ProjectiveMap> forward;
  for (int a = 1; a <= max_digit; ++a) {
    pieces.push_back({static_cast<double>(1.0L / (a + hi)), static_cast<double>(1.0L / (a + lo))});
    forward.push_back(ProjectiveMap::integer(-a, 1, 1, 0));  // x -> 1/x - a
  }
  MarkovPartition partition(std::move(pieces), full_transitions(static_cast<std::size_t>(max_digit)));
  return RegularCantorSet::create(std::move(partition), std::move(forward),
                                  "gauss:" + std::to_string(max_digit));
}

Cover::Cover(int depth, std::vector<Interval> intervals, std::vector<std::uint8_t> symbols)
    : depth_(depth), intervals_(std::move(intervals)), symbols_(std::move(symbols)) {}

std::span<const std::uint8_t> Cover::address(std::size_t i) const {
  const std::size_t len = static_cast<std::size_t>(depth_) + 1;
  return std::span<const std::uint8_t>(symbols_).subspan(i * len, len);
}

double Cover::max_length() const noexcept {
  double m = 0.0;
  for (const auto& iv : intervals_) m = std::max(m, iv.length());
  return m;
}

double Cover::min_length() const noexcept {
  double m = intervals_.empty() ? 0.0 : intervals_.front().length();
  for (const auto& iv : intervals_) m = std::min(m, iv.length());
  return m;
}

double Cover::total_length() const noexcept {
  double s = 0.0;
  for (const auto& iv : intervals_) s += iv.length();
  return s;
}

double admissible_word_count(const RegularCantorSet& set, int depth) {
  const std::size_t r = set.piece_count();
  std::vector<double> ways(r, 1.0);
  for (int k = 0; k < depth; ++k) {
    std::vector<double> next(r, 0.0);
    for (std::size_t j = 0; j < r; ++j) {
      for (auto s : set.partition().targets(j)) next[j] += ways[s];
    }
    ways = std::move(next);
  }
  return std::accumulate(ways.begin(), ways.end(), 0.0);
}

std::vector<ConstructionChild> construction_roots(const RegularCantorSet& set) {
  std::vector<ConstructionChild> out;
  for (std::size_t j = 0; j < set.piece_count(); ++j) {
    out.push_back({set.partition().piece(j), ProjectiveMap::identity(), static_cast<std::uint8_t>(j)});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.interval.lo < b.interval.lo; });
  return out;
}

std::vector<ConstructionChild> construction_children(const RegularCantorSet& set,
                                                     const ConstructionChild& node) {
  ProjectiveMap chart = node.chart.compose(set.branch(node.symbol).inverse);
  std::vector<ConstructionChild> out;
  const auto& targets = set.partition().targets(node.symbol);
  out.reserve(targets.size());
  for (auto s : targets) {
    out.push_back({image(chart, set.partition(), s), chart, static_cast<std::uint8_t>(s)});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.interval.lo < b.interval.lo; });
  return out;
}

namespace {

void check_budget(const RegularCantorSet& set, int depth, const CoverConfig& config) {
  if (depth < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
  double count = admissible_word_count(set, depth);
  if (count > static_cast<double>(config.budget)) {
    std::ostringstream os;
    os << "depth " << depth << " needs " << count << " intervals, budget is " << config.budget;
    throw Error(ErrorKind::BudgetExceeded, os.str());
  }
}

void check_length(const Interval& iv, const CoverConfig& config) {
  if (iv.length() < config.min_length) {
    std::ostringstream os;
    os << "construction interval " << iv << " is shorter than " << config.min_length;
    throw Error(ErrorKind::PrecisionLoss, os.str());
  }
}

}  // namespace

Cover refine(const RegularCantorSet& set, int depth, const CoverConfig& config) {
  check_budget(set, depth, config);
  const std::size_t len = static_cast<std::size_t>(depth) + 1;
  const auto count = static_cast<std::size_t>(admissible_word_count(set, depth));
  std::vector<Interval> intervals;
  std::vector<std::uint8_t> symbols;
  intervals.reserve(count);
  symbols.reserve(count * len);
  std::vector<std::uint8_t> word(len);

  std::function<void(const ConstructionChild&, int)> visit = [&](const ConstructionChild& node, int level) {
    word[static_cast<std::size_t>(level)] = node.symbol;
    if (level == depth) {
      check_length(node.interval, config);
      intervals.push_back(node.interval);
      symbols.insert(symbols.end(), word.begin(), word.end());
      return;
    }
    for (const auto& child : construction_children(set, node)) visit(child, level + 1);
  };
  for (const auto& root : construction_roots(set)) visit(root, 0);
  return Cover(depth, std::move(intervals), std::move(symbols));
}

double max_interval_length(const RegularCantorSet& set, int depth, const CoverConfig& config) {
  if (!set.is_affine()) return refine(set, depth, config).max_length();
  const std::size_t r = set.piece_count();
  std::vector<long double> best(r);
  for (std::size_t j = 0; j < r; ++j) best[j] = set.partition().piece(j).length();
  for (int k = 0; k < depth; ++k) {
    std::vector<long double> next(r, 0.0L);
    for (std::size_t j = 0; j < r; ++j) {
      long double m = 0.0L;
      for (auto s : set.partition().targets(j)) m = std::max(m, best[s]);
      next[j] = m / std::fabs(static_cast<long double>(set.branch(j).slope()));
    }
    best = std::move(next);
  }
  return static_cast<double>(*std::max_element(best.begin(), best.end()));
}

Membership contains(const RegularCantorSet& set, double x, int depth) {
  if (depth < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
  auto find = [x](const std::vector<ConstructionChild>& nodes) -> const ConstructionChild* {
    for (const auto& n : nodes) {
      if (n.interval.contains(x)) return &n;
    }
    return nullptr;
  };
  auto level = construction_roots(set);
  const ConstructionChild* node = find(level);
  if (!node) return {Membership::Status::ExcludedAtDepth, 0};
  for (int k = 1; k <= depth; ++k) {
    auto children = construction_children(set, *node);
    const ConstructionChild* next = find(children);
    if (!next) return {Membership::Status::ExcludedAtDepth, k};
    ConstructionChild keep = *next;
    level = {keep};
    node = &level.front();
  }
  return {Membership::Status::InCoverAtDepth, depth};
}

ConstructionTree::ConstructionTree(const RegularCantorSet& set, int depth, const CoverConfig& config) {
  check_budget(set, depth, config);
  levels_.resize(static_cast<std::size_t>(depth) + 1);
  std::uint32_t leaves = 0;

  auto append = [&](int k, const ConstructionChild& node, std::uint32_t parent) {
    auto& lv = levels_[static_cast<std::size_t>(k)];
    lv.intervals.push_back(node.interval);
    lv.parent.push_back(parent);
    lv.first_child.push_back(0);
    lv.child_count.push_back(0);
    lv.leaf_begin.push_back(0);
    lv.leaf_end.push_back(0);
    lv.symbol.push_back(node.symbol);
    return static_cast<std::uint32_t>(lv.intervals.size() - 1);
  };

  std::function<void(const ConstructionChild&, int, std::uint32_t)> visit =
      [&](const ConstructionChild& node, int k, std::uint32_t index) {
        auto& lv = levels_[static_cast<std::size_t>(k)];
        lv.leaf_begin[index] = leaves;
        if (k == depth) {
          check_length(node.interval, config);
          ++leaves;
          lv.leaf_end[index] = leaves;
          return;
        }
        auto children = construction_children(set, node);
        std::uint32_t first = 0;
        for (std::size_t c = 0; c < children.size(); ++c) {
          auto idx = append(k + 1, children[c], index);
          if (c == 0) first = idx;
        }
        levels_[static_cast<std::size_t>(k)].first_child[index] = first;
        levels_[static_cast<std::size_t>(k)].child_count[index] = static_cast<std::uint32_t>(children.size());
        for (std::size_t c = 0; c < children.size(); ++c) {
          visit(children[c], k + 1, first + static_cast<std::uint32_t>(c));
        }
        levels_[static_cast<std::size_t>(k)].leaf_end[index] = leaves;
      };

  auto roots = construction_roots(set);
  for (const auto& root : roots) append(0, root, 0);
  for (std::size_t i = 0; i < roots.size(); ++i) visit(roots[i], 0, static_cast<std::uint32_t>(i));
}

std::pair<std::uint32_t, std::uint32_t> ConstructionTree::leaf_range(int k, std::size_t i) const {
  const auto& lv = levels_.at(static_cast<std::size_t>(k));
  return {lv.leaf_begin[i], lv.leaf_end[i]};
}

std::vector<std::uint8_t> ConstructionTree::address(int k, std::size_t i) const {
  std::vector<std::uint8_t> word(static_cast<std::size_t>(k) + 1);
  for (int level = k; level >= 0; --level) {
    const auto& lv = levels_[static_cast<std::size_t>(level)];
    word[static_cast<std::size_t>(level)] = lv.symbol[i];
    i = lv.parent[i];
  }
  return word;
}

std::string format_address(std::span<const std::uint8_t> address) {
  std::string out;
  for (std::size_t i = 0; i < address.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(address[i]);
  }
  return out;
}

}  // namespace cantorlab
