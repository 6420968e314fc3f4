#include "cantorlab/intersect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "cantorlab/cantor_io.hpp"
#include "cantorlab/dimension.hpp"
#include "cantorlab/error.hpp"
#include "cantorlab/parallel.hpp"
#include "cantorlab/setops.hpp"

namespace cantorlab {

namespace {

bool overlaps(const Interval& a, const Interval& b, double shift) {
  return a.lo <= b.hi + shift + kOverlapTolerance && b.lo + shift <= a.hi + kOverlapTolerance;
}

}  // namespace

IntersectResult intersect_test(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, int depth,
                               const CoverConfig& config) {
  if (depth < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
  struct Entry {
    ConstructionChild a, b;
    int level;
  };
  std::vector<Entry> stack;
  for (const auto& a : construction_roots(k1)) {
    for (const auto& b : construction_roots(k2)) {
      if (overlaps(a.interval, b.interval, t)) stack.push_back({a, b, 0});
    }
  }
  int deepest = -1;
  std::size_t visited = 0;
  while (!stack.empty()) {
    Entry e = std::move(stack.back());
    stack.pop_back();
    deepest = std::max(deepest, e.level);
    if (e.level == depth) return {IntersectResult::Status::OverlapAtDepth, depth};
    if (++visited > config.budget) throw Error(ErrorKind::BudgetExceeded, "intersection search exceeds the budget");
    auto ca = construction_children(k1, e.a);
    auto cb = construction_children(k2, e.b);
    for (auto& a : ca) {
      for (auto& b : cb) {
        if (overlaps(a.interval, b.interval, t)) stack.push_back({a, b, e.level + 1});
      }
    }
  }
  return {IntersectResult::Status::DisjointAtDepth, deepest + 1};
}

std::optional<bool> interval_meets_set(const RegularCantorSet& set, const Interval& window, int max_depth) {
  std::vector<std::pair<ConstructionChild, int>> stack;
  for (auto& r : construction_roots(set)) stack.push_back({std::move(r), 0});
  bool undecided = false;
  while (!stack.empty()) {
    auto [node, level] = std::move(stack.back());
    stack.pop_back();
    const Interval& iv = node.interval;
    if (!iv.intersects(window)) continue;
    // Endpoints of construction intervals belong to the set.
    if (window.contains(iv.lo) || window.contains(iv.hi)) return true;
    if (level == max_depth) {
      undecided = true;
      continue;
    }
    for (auto& c : construction_children(set, node)) stack.push_back({std::move(c), level + 1});
  }
  if (undecided) return std::nullopt;
  return false;
}

namespace {

GapLemmaResult gap_lemma_with(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, double tau1,
                              double tau2, int link_depth) {
  if (!(tau1 * tau2 > 1.0 + 1e-9)) return GapLemmaResult::NoCertificate;
  const Interval h1 = k1.hull();
  const Interval h2{k2.hull().lo + t, k2.hull().hi + t};
  if (!h1.intersects(h2)) return GapLemmaResult::NoCertificate;
  auto meets12 = interval_meets_set(k1, h2, link_depth);
  if (!meets12 || !*meets12) return GapLemmaResult::NoCertificate;
  auto meets21 = interval_meets_set(k2, {h1.lo - t, h1.hi - t}, link_depth);
  if (!meets21 || !*meets21) return GapLemmaResult::NoCertificate;
  return GapLemmaResult::CertifiedIntersection;
}

}  // namespace

GapLemmaResult gap_lemma_test(const RegularCantorSet& k1, const RegularCantorSet& k2, double t,
                              const GapLemmaConfig& config) {
  const double tau1 = thickness(k1, config.thickness_depth).value;
  const double tau2 = thickness(k2, config.thickness_depth).value;
  return gap_lemma_with(k1, k2, t, tau1, tau2, config.link_depth);
}

std::string to_string(ScanPoint::Status status) {
  switch (status) {
    case ScanPoint::Status::Excluded: return "excluded";
    case ScanPoint::Status::Overlap: return "overlap";
    case ScanPoint::Status::Certified: return "certified";
  }
  return "?";
}

double DifferenceScan::overlap_fraction() const {
  if (points.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& p : points) n += p.status != ScanPoint::Status::Excluded;
  return static_cast<double>(n) / static_cast<double>(points.size());
}

DifferenceScan difference_scan(const RegularCantorSet& k1, const RegularCantorSet& k2, std::span<const double> grid,
                               int depth, const CoverConfig& config, bool certify) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::InvalidArgument, "grid must be sorted");
  GapLemmaConfig lemma;
  double tau1 = 0, tau2 = 0;
  if (certify) {
    tau1 = thickness(k1, lemma.thickness_depth).value;
    tau2 = thickness(k2, lemma.thickness_depth).value;
  }
  DifferenceScan scan;
  for (double t : grid) {
    auto r = intersect_test(k1, k2, t, depth, config);
    ScanPoint p{t, ScanPoint::Status::Overlap, r.depth};
    if (r.disjoint()) {
      p.status = ScanPoint::Status::Excluded;
    } else if (certify &&
               gap_lemma_with(k1, k2, t, tau1, tau2, lemma.link_depth) == GapLemmaResult::CertifiedIntersection) {
      p.status = ScanPoint::Status::Certified;
    }
    scan.points.push_back(p);
  }
  return scan;
}

void write_difference_scan_csv(std::ostream& os, const DifferenceScan& scan) {
  os << "t,status,depth\n";
  char buf[64];
  for (const auto& p : scan.points) {
    std::snprintf(buf, sizeof buf, "%.17g,", p.t);
    os << buf << to_string(p.status) << ',' << p.depth << '\n';
  }
}

// Relative positions ---------------------------------------------------------

std::size_t PositionRegion::member_count() const {
  return static_cast<std::size_t>(std::count(member.begin(), member.end(), std::uint8_t{1}));
}

bool PositionRegion::covers(std::size_t i1, std::size_t i2, int sign, double s, double u) const {
  if (sign < 0 && orientations == 1) return false;
  if (s < s_lo || s >= s_hi || u < u_lo || u >= u_hi) return false;
  int si = std::min(ns - 1, static_cast<int>(std::floor((s - s_lo) / hs())));
  int ui = std::min(nu - 1, static_cast<int>(std::floor((u - u_lo) / hu())));
  return member[cell(layer(i1, i2, sign), si, ui)] != 0;
}

namespace {

struct AffineBranches {
  std::vector<double> slope, offset;
  std::vector<Interval> pieces;
  Transitions targets;
};

AffineBranches affine_branches(const RegularCantorSet& k) {
  if (!k.is_affine()) throw Error(ErrorKind::NonAffineInput, "relative positions need affine branches");
  AffineBranches out;
  for (std::size_t j = 0; j < k.piece_count(); ++j) {
    out.slope.push_back(k.branch(j).slope());
    out.offset.push_back(k.branch(j).offset());
    out.pieces.push_back(k.partition().piece(j));
  }
  out.targets = k.partition().transitions();
  return out;
}

// Cell-index bounds of [lo, hi] on a grid of n cells of width h from origin;
// values a hair past a grid line do not pull in the next cell.
std::pair<long, long> cell_span(double lo, double hi, double origin, double h) {
  constexpr double kSlack = 1e-9;
  long a = static_cast<long>(std::floor((lo - origin) / h + kSlack));
  long b = static_cast<long>(std::ceil((hi - origin) / h - kSlack)) - 1;
  return {a, std::max(a, b)};
}

class PositionGrid {
 public:
  PositionGrid(const RegularCantorSet& k1, const RegularCantorSet& k2, const RecurrenceConfig& config)
      : b1_(affine_branches(k1)), b2_(affine_branches(k2)) {
    region_.s_lo = config.s_lo;
    region_.s_hi = config.s_hi;
    const Interval h1 = k1.hull(), h2 = k2.hull();
    const double lo = h1.lo - h2.hi, hi = h1.hi - h2.lo, pad = 0.1 * (hi - lo);
    region_.u_lo = config.u_lo.value_or(lo - pad);
    region_.u_hi = config.u_hi.value_or(hi + pad);
    region_.ns = config.ns;
    region_.nu = config.nu;
    region_.margin = config.margin;
    region_.types1 = k1.piece_count();
    region_.types2 = k2.piece_count();
    region_.orientations = k1.has_orientation_reversing() || k2.has_orientation_reversing() ? 2 : 1;
    if (!(region_.s_hi > region_.s_lo) || !(region_.u_hi > region_.u_lo) || config.ns < 1 || config.nu < 1 ||
        config.margin < 0) {
      throw Error(ErrorKind::InvalidArgument, "bad position grid");
    }
    const double cells = static_cast<double>(region_.layer_count()) * config.ns * config.nu;
    if (cells > static_cast<double>(config.cell_budget)) {
      throw Error(ErrorKind::BudgetExceeded, "position grid exceeds the cell budget");
    }
    const std::size_t n = region_.layer_count() * config.ns * config.nu;
    region_.member.assign(n, 0);
    region_.witness.assign(n, Move{Move::Kind::Both, 0, 0});
  }

  PositionRegion& region() { return region_; }
  const PositionRegion& region() const { return region_; }
  const AffineBranches& first() const { return b1_; }
  const AffineBranches& second() const { return b2_; }

  struct LayerKey {
    std::size_t i1, i2;
    int sign;
  };
  std::vector<LayerKey> layers() const {
    std::vector<LayerKey> out;
    for (std::size_t i1 = 0; i1 < region_.types1; ++i1) {
      for (std::size_t i2 = 0; i2 < region_.types2; ++i2) {
        for (int o = 0; o < region_.orientations; ++o) out.push_back({i1, i2, o == 0 ? 1 : -1});
      }
    }
    return out;
  }

  // Hulls overlap at all four corners, hence on the whole cell.
  bool overlap_cell(const LayerKey& key, int si, int ui) const {
    const Interval& piece1 = b1_.pieces[key.i1];
    const Interval& piece2 = b2_.pieces[key.i2];
    for (int cs = 0; cs < 2; ++cs) {
      for (int cu = 0; cu < 2; ++cu) {
        const double s = region_.s_lo + (si + cs) * region_.hs();
        const double u = region_.u_lo + (ui + cu) * region_.hu();
        const double scale = key.sign * std::exp(s);
        const double p = scale * piece2.lo + u, q = scale * piece2.hi + u;
        if (std::max(p, q) < piece1.lo || std::min(p, q) > piece1.hi) return false;
      }
    }
    return true;
  }

  struct Image {
    LayerKey key;
    double s_lo, s_hi, u_lo, u_hi;
  };

  Image image(const LayerKey& key, int si, int ui, const Move& m) const {
    double s_min = INFINITY, s_max = -INFINITY, u_min = INFINITY, u_max = -INFINITY;
    const double a1 = b1_.slope[key.i1], o1 = b1_.offset[key.i1];
    const double a2 = b2_.slope[key.i2], o2 = b2_.offset[key.i2];
    Image img{};
    for (int cs = 0; cs < 2; ++cs) {
      for (int cu = 0; cu < 2; ++cu) {
        const double s = region_.s_lo + (si + cs) * region_.hs();
        const double u = region_.u_lo + (ui + cu) * region_.hu();
        const double scale = key.sign * std::exp(s);
        double s2 = s, u2 = u;
        switch (m.kind) {
          case Move::Kind::Both:
            s2 = s + std::log(std::abs(a1)) - std::log(std::abs(a2));
            u2 = a1 * (u - scale * o2 / a2) + o1;
            break;
          case Move::Kind::First:
            s2 = s + std::log(std::abs(a1));
            u2 = a1 * u + o1;
            break;
          case Move::Kind::Second:
            s2 = s - std::log(std::abs(a2));
            u2 = u - scale * o2 / a2;
            break;
        }
        s_min = std::min(s_min, s2);
        s_max = std::max(s_max, s2);
        u_min = std::min(u_min, u2);
        u_max = std::max(u_max, u2);
      }
    }
    int sign = key.sign;
    std::size_t n1 = key.i1, n2 = key.i2;
    if (m.kind != Move::Kind::Second) {
      sign *= a1 < 0 ? -1 : 1;
      n1 = m.first;
    }
    if (m.kind != Move::Kind::First) {
      sign *= a2 < 0 ? -1 : 1;
      n2 = m.second;
    }
    img.key = {n1, n2, sign};
    img.s_lo = s_min;
    img.s_hi = s_max;
    img.u_lo = u_min;
    img.u_hi = u_max;
    return img;
  }

  std::vector<Move> moves(const LayerKey& key) const {
    std::vector<Move> out;
    for (auto c : b1_.targets[key.i1]) {
      for (auto d : b2_.targets[key.i2]) {
        out.push_back({Move::Kind::Both, static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d)});
      }
    }
    for (auto c : b1_.targets[key.i1]) out.push_back({Move::Kind::First, static_cast<std::uint8_t>(c), 0});
    for (auto d : b2_.targets[key.i2]) out.push_back({Move::Kind::Second, 0, static_cast<std::uint8_t>(d)});
    return out;
  }

 private:
  AffineBranches b1_, b2_;
  PositionRegion region_;
};

// Inclusive 2-D prefix sums of one layer's member mask.
class LayerSums {
 public:
  void build(const PositionRegion& r, std::size_t layer) {
    ns_ = r.ns;
    nu_ = r.nu;
    sums_.assign(static_cast<std::size_t>(ns_ + 1) * (nu_ + 1), 0);
    for (int i = 0; i < ns_; ++i) {
      for (int j = 0; j < nu_; ++j) {
        at(i + 1, j + 1) = at(i, j + 1) + at(i + 1, j) - at(i, j) + r.member[r.cell(layer, i, j)];
      }
    }
  }
  // Whether every cell of [a0, a1] x [b0, b1] is a member; false off the grid.
  bool full(long a0, long a1, long b0, long b1) const {
    if (a0 < 0 || b0 < 0 || a1 >= ns_ || b1 >= nu_) return false;
    const long area = (a1 - a0 + 1) * (b1 - b0 + 1);
    const long n = at(a1 + 1, b1 + 1) - at(a0, b1 + 1) - at(a1 + 1, b0) + at(a0, b0);
    return n == area;
  }

 private:
  int& at(long i, long j) { return sums_[static_cast<std::size_t>(i) * (nu_ + 1) + j]; }
  int at(long i, long j) const { return sums_[static_cast<std::size_t>(i) * (nu_ + 1) + j]; }
  int ns_ = 0, nu_ = 0;
  std::vector<int> sums_;
};

double renormalization_sensitivity(const PositionGrid& grid) {
  const auto& r = grid.region();
  const auto& b1 = grid.first();
  const auto& b2 = grid.second();
  const double es = std::exp(std::max(std::abs(r.s_lo), std::abs(r.s_hi)));
  const double um = std::max(std::abs(r.u_lo), std::abs(r.u_hi));
  double worst = 0;
  for (std::size_t i = 0; i < b1.slope.size(); ++i) {
    for (std::size_t j = 0; j < b2.slope.size(); ++j) {
      const double a1 = std::abs(b1.slope[i]), a2 = std::abs(b2.slope[j]), o2 = std::abs(b2.offset[j]);
      const double ls = 1.0 / a1 + 1.0 / a2;
      const double lu = um + es * o2 / a2 + 1.0 + a1 * es / a2 + a1 * es * o2 / (a2 * a2);
      worst = std::max({worst, ls, lu});
    }
  }
  return worst;
}

}  // namespace

RecurrenceResult recurrent_compact_search(const RegularCantorSet& k1, const RegularCantorSet& k2,
                                          const RecurrenceConfig& config) {
  PositionGrid grid(k1, k2, config);
  PositionRegion& region = grid.region();
  const auto layers = grid.layers();

  for (const auto& key : layers) {
    const std::size_t l = region.layer(key.i1, key.i2, key.sign);
    for (int si = 0; si < region.ns; ++si) {
      for (int ui = 0; ui < region.nu; ++ui) region.member[region.cell(l, si, ui)] = grid.overlap_cell(key, si, ui);
    }
  }

  std::vector<std::vector<Move>> layer_moves;
  for (const auto& key : layers) layer_moves.push_back(grid.moves(key));

  RecurrenceResult result;
  std::vector<LayerSums> sums(layers.size());
  std::vector<std::uint8_t> keep(region.member.size());
  for (;;) {
    ++result.sweeps;
    parallel_for(layers.size(), config.jobs, [&](std::size_t l) { sums[l].build(region, l); });
    parallel_for(layers.size(), config.jobs, [&](std::size_t li) {
      const auto& key = layers[li];
      const std::size_t l = region.layer(key.i1, key.i2, key.sign);
      for (int si = 0; si < region.ns; ++si) {
        for (int ui = 0; ui < region.nu; ++ui) {
          const std::size_t c = region.cell(l, si, ui);
          keep[c] = 0;
          if (!region.member[c]) continue;
          for (const Move& m : layer_moves[li]) {
            auto img = grid.image(key, si, ui, m);
            auto [a0, a1] = cell_span(img.s_lo, img.s_hi, region.s_lo, region.hs());
            auto [b0, b1] = cell_span(img.u_lo, img.u_hi, region.u_lo, region.hu());
            const std::size_t target = region.layer(img.key.i1, img.key.i2, img.key.sign);
            if (sums[target].full(a0 - region.margin, a1 + region.margin, b0 - region.margin, b1 + region.margin)) {
              keep[c] = 1;
              region.witness[c] = m;
              break;
            }
          }
        }
      }
    });
    if (keep == region.member) break;
    region.member = keep;
  }

  result.sensitivity = renormalization_sensitivity(grid);
  result.perturbation_radius = region.margin * std::min(region.hs(), region.hu()) / result.sensitivity;
  if (region.member_count() == 0) {
    result.status = RecurrenceResult::Status::NotFound;
    return result;
  }
  result.status = RecurrenceResult::Status::Certificate;
  result.region = std::move(region);
  return result;
}

bool certifies_translation(const PositionRegion& region, double t) {
  for (std::size_t i1 = 0; i1 < region.types1; ++i1) {
    for (std::size_t i2 = 0; i2 < region.types2; ++i2) {
      if (region.covers(i1, i2, 1, 0.0, t)) return true;
    }
  }
  return false;
}

// Certificate files ------------------------------------------------------------

namespace {

nlohmann::json run_lengths(const std::vector<std::uint8_t>& mask, std::size_t begin, std::size_t end) {
  // Alternating runs, starting with non-members.
  nlohmann::json runs = nlohmann::json::array();
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (mask[i] != current) {
      runs.push_back(run);
      current = mask[i];
      run = 0;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

std::string move_kind_name(Move::Kind k) {
  switch (k) {
    case Move::Kind::Both: return "both";
    case Move::Kind::First: return "first";
    case Move::Kind::Second: return "second";
  }
  return "?";
}

}  // namespace

nlohmann::json certificate_to_json(const RegularCantorSet& k1, const RegularCantorSet& k2,
                                   const RecurrenceResult& result) {
  if (!result.region) throw Error(ErrorKind::InvalidArgument, "no certificate to write");
  const PositionRegion& r = *result.region;
  nlohmann::json layers = nlohmann::json::array();
  const std::size_t per_layer = static_cast<std::size_t>(r.ns) * r.nu;
  for (std::size_t i1 = 0; i1 < r.types1; ++i1) {
    for (std::size_t i2 = 0; i2 < r.types2; ++i2) {
      for (int o = 0; o < r.orientations; ++o) {
        const int sign = o == 0 ? 1 : -1;
        const std::size_t l = r.layer(i1, i2, sign);
        nlohmann::json witness = nlohmann::json::array();
        for (std::size_t c = l * per_layer; c < (l + 1) * per_layer; ++c) {
          if (!r.member[c]) continue;
          const Move& m = r.witness[c];
          witness.push_back({move_kind_name(m.kind), m.first, m.second});
        }
        layers.push_back({{"piece1", i1},
                          {"piece2", i2},
                          {"orientation", sign},
                          {"mask_rle", run_lengths(r.member, l * per_layer, (l + 1) * per_layer)},
                          {"witness", witness}});
      }
    }
  }
  return {{"schema", 1},
          {"kind", "recurrent-position-region"},
          {"sets", {set_to_json(k1), set_to_json(k2)}},
          {"grid", {{"s", {r.s_lo, r.s_hi}}, {"u", {r.u_lo, r.u_hi}}, {"ns", r.ns}, {"nu", r.nu}}},
          {"margin", r.margin},
          {"orientations", r.orientations},
          {"sensitivity", result.sensitivity},
          {"perturbation_radius", result.perturbation_radius},
          {"member_cells", r.member_count()},
          {"layers", layers}};
}

namespace {

// x -> m x + c
struct Affine {
  double m, c;
  double operator()(double x) const { return m * x + c; }
};

Affine compose(const Affine& f, const Affine& g) { return {f.m * g.m, f.m * g.c + f.c}; }

std::vector<std::uint8_t> decode_runs(const nlohmann::json& runs, std::size_t expected) {
  std::vector<std::uint8_t> mask;
  mask.reserve(expected);
  std::uint8_t value = 0;
  for (const auto& r : runs) {
    mask.insert(mask.end(), r.get<std::size_t>(), value);
    value ^= 1;
  }
  if (mask.size() != expected) throw Error(ErrorKind::ConfigInvalid, "mask length does not match the grid");
  return mask;
}

}  // namespace

CertificateCheck verify_certificate(const nlohmann::json& doc) {
  CertificateCheck out;
  auto fail = [&](std::string why) {
    out.valid = false;
    out.message = std::move(why);
    return out;
  };
  try {
    const RegularCantorSet k1 = set_from_json(doc.at("sets").at(0));
    const RegularCantorSet k2 = set_from_json(doc.at("sets").at(1));
    if (!k1.is_affine() || !k2.is_affine()) return fail("sets must be affine");
    const auto& g = doc.at("grid");
    const double s0 = g.at("s").at(0), s1 = g.at("s").at(1), u0 = g.at("u").at(0), u1 = g.at("u").at(1);
    const int ns = g.at("ns"), nu = g.at("nu");
    const int margin = doc.at("margin");
    if (ns < 1 || nu < 1 || margin < 0 || !(s1 > s0) || !(u1 > u0)) return fail("bad grid geometry");
    const double hs = (s1 - s0) / ns, hu = (u1 - u0) / nu;
    const std::size_t per_layer = static_cast<std::size_t>(ns) * nu;

    struct Layer {
      std::size_t p1, p2;
      int sign;
      std::vector<std::uint8_t> mask;
      std::vector<nlohmann::json> witness;
    };
    std::vector<Layer> layers;
    for (const auto& l : doc.at("layers")) {
      Layer layer{l.at("piece1"), l.at("piece2"), l.at("orientation"), decode_runs(l.at("mask_rle"), per_layer), {}};
      for (const auto& w : l.at("witness")) layer.witness.push_back(w);
      if (layer.p1 >= k1.piece_count() || layer.p2 >= k2.piece_count()) return fail("layer piece out of range");
      layers.push_back(std::move(layer));
    }
    auto find_layer = [&](std::size_t p1, std::size_t p2, int sign) -> const Layer* {
      for (const auto& l : layers) {
        if (l.p1 == p1 && l.p2 == p2 && l.sign == sign) return &l;
      }
      return nullptr;
    };
    auto forward = [](const RegularCantorSet& k, std::size_t j) {
      return Affine{k.branch(j).slope(), k.branch(j).offset()};
    };
    auto inverse = [](const RegularCantorSet& k, std::size_t j) {
      const double a = k.branch(j).slope(), b = k.branch(j).offset();
      return Affine{1.0 / a, -b / a};
    };
    auto index_range = [](double lo, double hi, double origin, double h) {
      long a = static_cast<long>(std::floor((lo - origin) / h + 1e-9));
      long b = static_cast<long>(std::ceil((hi - origin) / h - 1e-9)) - 1;
      return std::pair<long, long>{a, std::max(a, b)};
    };

    bool any_member = false;
    for (const auto& layer : layers) {
      std::size_t next_witness = 0;
      const Interval piece1 = k1.partition().piece(layer.p1), piece2 = k2.partition().piece(layer.p2);
      for (int si = 0; si < ns; ++si) {
        for (int ui = 0; ui < nu; ++ui) {
          if (!layer.mask[static_cast<std::size_t>(si) * nu + ui]) continue;
          any_member = true;
          ++out.cells_checked;
          if (next_witness >= layer.witness.size()) return fail("missing witness");
          const auto& w = layer.witness[next_witness++];
          const std::string kind = w.at(0);
          const std::size_t c = w.at(1), d = w.at(2);
          const bool refine1 = kind == "both" || kind == "first";
          const bool refine2 = kind == "both" || kind == "second";
          if (!refine1 && !refine2) return fail("unknown witness kind");
          const auto& t1 = k1.partition().transitions()[layer.p1];
          const auto& t2 = k2.partition().transitions()[layer.p2];
          if (refine1 && std::find(t1.begin(), t1.end(), c) == t1.end()) return fail("witness leaves the first shift");
          if (refine2 && std::find(t2.begin(), t2.end(), d) == t2.end()) return fail("witness leaves the second shift");

          double smin = INFINITY, smax = -INFINITY, umin = INFINITY, umax = -INFINITY;
          int sign = 0;
          for (int cs = 0; cs < 2; ++cs) {
            for (int cu = 0; cu < 2; ++cu) {
              const double s = s0 + (si + cs) * hs, u = u0 + (ui + cu) * hu;
              const Affine chart{layer.sign * std::exp(s), u};
              const double p = chart(piece2.lo), q = chart(piece2.hi);
              if (std::max(p, q) < piece1.lo || std::min(p, q) > piece1.hi) {
                return fail("member cell without overlapping hulls");
              }
              Affine next = chart;
              if (refine1) next = compose(forward(k1, layer.p1), next);
              if (refine2) next = compose(next, inverse(k2, layer.p2));
              sign = next.m > 0 ? 1 : -1;
              smin = std::min(smin, std::log(std::abs(next.m)));
              smax = std::max(smax, std::log(std::abs(next.m)));
              umin = std::min(umin, next.c);
              umax = std::max(umax, next.c);
            }
          }
          const Layer* target = find_layer(refine1 ? c : layer.p1, refine2 ? d : layer.p2, sign);
          if (!target) return fail("witness lands on a missing layer");
          auto [a0, a1] = index_range(smin, smax, s0, hs);
          auto [b0, b1] = index_range(umin, umax, u0, hu);
          for (long i = a0 - margin; i <= a1 + margin; ++i) {
            for (long j = b0 - margin; j <= b1 + margin; ++j) {
              if (i < 0 || j < 0 || i >= ns || j >= nu || !target->mask[static_cast<std::size_t>(i) * nu + j]) {
                return fail("witness image leaves the region");
              }
            }
          }
        }
      }
      if (next_witness != layer.witness.size()) return fail("extra witnesses");
    }
    if (!any_member) return fail("empty region");
    out.valid = true;
    out.message = "ok";
    return out;
  } catch (const nlohmann::json::exception& e) {
    return fail(std::string("malformed certificate: ") + e.what());
  } catch (const Error& e) {
    return fail(e.what());
  }
}

// Probes ---------------------------------------------------------------------

RegularCantorSet perturb_affine(const RegularCantorSet& set, double radius, std::uint64_t seed, int max_resample) {
  if (!set.is_affine()) throw Error(ErrorKind::NonAffineInput, "perturbations act on affine sets");
  if (radius < 0) throw Error(ErrorKind::InvalidArgument, "radius must be nonnegative");
  std::vector<bool> reversed;
  for (const auto& b : set.branches()) reversed.push_back(b.orientation < 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-radius, radius);
  for (int attempt = 0; attempt <= max_resample; ++attempt) {
    std::vector<Interval> pieces;
    for (std::size_t j = 0; j < set.piece_count(); ++j) {
      const Interval p = set.partition().piece(j);
      const double lo = p.lo + jitter(rng);
      const double hi = p.hi + jitter(rng);
      pieces.push_back({lo, hi});
    }
    try {
      return build_affine(std::move(pieces), set.partition().transitions(), reversed, set.name());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BudgetExceeded) throw;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "no valid perturbation after resampling; radius too large");
}

double intersection_dimension(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, int depth,
                              const CoverConfig& config) {
  if (depth < 2) throw Error(ErrorKind::InvalidArgument, "intersection dimension needs depth >= 2");
  std::vector<std::pair<ConstructionChild, ConstructionChild>> level;
  for (const auto& a : construction_roots(k1)) {
    for (const auto& b : construction_roots(k2)) {
      if (overlaps(a.interval, b.interval, t)) level.push_back({a, b});
    }
  }
  std::vector<BoxCount> counts;
  const int first = depth / 2;
  for (int m = 0; m <= depth; ++m) {
    if (m >= first) {
      if (level.empty()) return 0.0;
      const double r = std::max(max_interval_length(k1, m), max_interval_length(k2, m));
      counts.push_back({m, static_cast<double>(level.size()), r});
    }
    if (m == depth) break;
    std::vector<std::pair<ConstructionChild, ConstructionChild>> next;
    for (const auto& [a, b] : level) {
      auto ca = construction_children(k1, a);
      auto cb = construction_children(k2, b);
      for (auto& x : ca) {
        for (auto& y : cb) {
          if (overlaps(x.interval, y.interval, t)) next.push_back({x, y});
        }
      }
      if (next.size() > config.budget) throw Error(ErrorKind::BudgetExceeded, "overlapping pairs exceed the budget");
    }
    level = std::move(next);
  }
  return std::max(0.0, fit_box_counts(counts).value);
}

DStableResult d_stable_probe(const RegularCantorSet& k1, const RegularCantorSet& k2, double t, double d,
                             const DStableConfig& config) {
  if (!(d > 0 && d < 1)) throw Error(ErrorKind::InvalidArgument, "d must lie in (0, 1)");
  if (config.perturbations < 1) throw Error(ErrorKind::InvalidArgument, "need at least one perturbation");
  DStableResult out;
  out.estimates.resize(static_cast<std::size_t>(config.perturbations));
  for (int i = 0; i < config.perturbations; ++i) {
    // Independent reproducible streams per perturbation and per set.
    std::seed_seq s1{config.seed, static_cast<std::uint64_t>(i), std::uint64_t{1}};
    std::seed_seq s2{config.seed, static_cast<std::uint64_t>(i), std::uint64_t{2}};
    std::uint64_t seeds[2];
    std::uint32_t words[2];
    s1.generate(words, words + 2);
    seeds[0] = (std::uint64_t{words[0]} << 32) | words[1];
    s2.generate(words, words + 2);
    seeds[1] = (std::uint64_t{words[0]} << 32) | words[1];
    auto p1 = perturb_affine(k1, config.radius, seeds[0], config.max_resample);
    auto p2 = perturb_affine(k2, config.radius, seeds[1], config.max_resample);
    out.estimates[static_cast<std::size_t>(i)] = intersection_dimension(p1, p2, t, config.depth, config.cover);
  }
  const auto hits = std::count_if(out.estimates.begin(), out.estimates.end(), [&](double e) { return e >= d; });
  out.fraction = static_cast<double>(hits) / config.perturbations;
  return out;
}

DensityProfile tangency_density_experiment(const RegularCantorSet& k1, const RegularCantorSet& k2, double t0,
                                           std::span<const double> deltas, int depth, int side) {
  if (side != 1 && side != -1) throw Error(ErrorKind::InvalidArgument, "side must be +1 or -1");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0) || (i > 0 && !(deltas[i] < deltas[i - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "deltas must be positive and decreasing");
    }
  }
  const IntervalUnion u = cover_sum(k1, k2, depth, SetOp::Difference);
  const double tol = kMergeTolerance * std::max(1.0, std::abs(t0));
  const bool inside = std::any_of(u.intervals().begin(), u.intervals().end(),
                                  [&](const Interval& iv) { return iv.lo - tol <= t0 && t0 <= iv.hi + tol; });
  if (!inside) throw Error(ErrorKind::TZeroNotInDifference, "t0 is not in the depth-n difference cover");
  DensityProfile profile{t0, side, {deltas.begin(), deltas.end()}, {}};
  for (double delta : deltas) {
    const double lo = side > 0 ? t0 : t0 - delta;
    const double hi = side > 0 ? t0 + delta : t0;
    double covered = 0;
    for (const auto& iv : u.intervals()) covered += std::max(0.0, std::min(hi, iv.hi) - std::max(lo, iv.lo));
    profile.ratios.push_back(std::min(1.0, covered / delta));
  }
  return profile;
}

void write_density_csv(std::ostream& os, const DensityProfile& profile) {
  os << "delta,ratio\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.deltas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", profile.deltas[i], profile.ratios[i]);
    os << buf;
  }
}

}  // namespace cantorlab
