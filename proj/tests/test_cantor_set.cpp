#include <cmath>
#include <vector>

#include "cantorlab/cantor_set.hpp"
#include "cantorlab/error.hpp"
#include "doctest.h"

using namespace cantorlab;

namespace {

RegularCantorSet ternary() {
  return build_affine_exact(std::vector<ExactInterval>{{Rational(0), Rational(1, 3)}, {Rational(2, 3), Rational(1)}},
                      full_transitions(2), {}, "ternary");
}

RegularCantorSet middle_fifth() {
  return build_affine_exact(std::vector<ExactInterval>{{Rational(0), Rational(2, 5)}, {Rational(3, 5), Rational(1)}},
                      full_transitions(2));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::IOError;
}

// Leading continued-fraction digits of x in (0,1), in long double.
std::vector<int> leading_digits(long double x, int count) {
  std::vector<int> out;
  for (int i = 0; i < count && x > 0; ++i) {
    long double y = 1.0L / x;
    long double a = std::floor(y);
    out.push_back(static_cast<int>(a));
    x = y - a;
  }
  return out;
}

}  // namespace

TEST_CASE("ternary set has two branches of slope 3") {
  auto k = ternary();
  REQUIRE(k.piece_count() == 2);
  CHECK(k.is_affine());
  CHECK(k.branch(0).slope() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(k.branch(1).slope() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(k.branch(1).offset() == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(k.branch(0).forward.exact());
  CHECK_FALSE(k.has_orientation_reversing());
}

TEST_CASE("build_affine errors") {
  CHECK(kind_of([] { build_affine({{0.0, 1.0}}, full_transitions(1)); }) == ErrorKind::ContractionViolation);
  CHECK(kind_of([] { build_affine({{0.0, 0.5}, {0.4, 1.0}}, full_transitions(2)); }) ==
        ErrorKind::OverlappingPieces);
  CHECK(kind_of([] { build_affine({{0.0, 0.5}, {0.5, 1.0}}, full_transitions(2)); }) ==
        ErrorKind::OverlappingPieces);
  CHECK(kind_of([] { build_affine({{0.0, 0.3}, {0.6, 1.0}}, Transitions{{0}, {1}}); }) ==
        ErrorKind::NonMixingTransitions);
  CHECK(kind_of([] { build_affine({{0.0, 0.3}, {0.6, 1.0}}, Transitions{{1}, {0}}); }) ==
        ErrorKind::NonMixingTransitions);
}

TEST_CASE("explicit branches are checked against the Markov property") {
  MarkovPartition p(std::vector<Interval>{{0.0, 1.0 / 3}, {2.0 / 3, 1.0}}, full_transitions(2));
  // Second branch maps onto [0.5, 1.5], not onto the hull [0, 1].
  std::vector<ProjectiveMap> bad{ProjectiveMap::affine(3.0L, 0.0L), ProjectiveMap::affine(3.0L, -1.5L)};
  CHECK(kind_of([&] { RegularCantorSet::create(p, bad); }) == ErrorKind::MarkovViolation);
  std::vector<ProjectiveMap> good{ProjectiveMap::affine(3.0L, 0.0L), ProjectiveMap::affine(3.0L, -2.0L)};
  CHECK_NOTHROW(RegularCantorSet::create(p, good));
}

TEST_CASE("middle-fifth slopes are 5/2") {
  auto k = middle_fifth();
  CHECK(k.branch(0).slope() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(k.branch(1).slope() == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("orientation-reversing branches are accepted and flagged") {
  auto k = build_affine({{0.0, 0.25}, {0.75, 1.0}}, full_transitions(2), {false, true});
  CHECK(k.has_orientation_reversing());
  CHECK(k.branch(1).orientation == -1);
  auto c = refine(k, 3);
  CHECK(c.size() == 16u);
}

TEST_CASE("gauss_cantor extremes and membership") {
  auto c2 = gauss_cantor(2);
  CHECK(c2.piece_count() == 2);
  CHECK_FALSE(c2.is_affine());
  CHECK(c2.has_orientation_reversing());
  CHECK(c2.hull().lo == doctest::Approx((std::sqrt(3.0) - 1) / 2).epsilon(1e-15));
  CHECK(c2.hull().hi == doctest::Approx(std::sqrt(3.0) - 1).epsilon(1e-15));
  auto c4 = gauss_cantor(4);
  CHECK(c4.hull().lo == doctest::Approx((std::sqrt(2.0) - 1) / 2).epsilon(1e-15));
  CHECK(c4.hull().hi == doctest::Approx(2 * (std::sqrt(2.0) - 1)).epsilon(1e-15));
  // [0; 2, 2, ...] and [0; 1, 1, ...] are in C(2), though not its extremes.
  CHECK_FALSE(contains(c2, std::sqrt(2.0) - 1, 20).excluded());
  CHECK_FALSE(contains(c2, (std::sqrt(5.0) - 1) / 2, 20).excluded());
  // 1/(3 + x) has first digit 3.
  CHECK(contains(c2, 1.0 / (3.0 + 0.5), 5).excluded());
  CHECK(kind_of([] { gauss_cantor(1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("refine ternary") {
  auto k = ternary();
  auto c0 = refine(k, 0);
  REQUIRE(c0.size() == 2);
  CHECK(c0[0] == Interval{0.0, 1.0 / 3});
  CHECK(c0[1] == Interval{2.0 / 3, 1.0});
  auto c2 = refine(k, 2);
  REQUIRE(c2.size() == 8);
  for (const auto& iv : c2.intervals()) CHECK(iv.length() == doctest::Approx(1.0 / 27).epsilon(1e-14));
  CHECK(format_address(c2.address(7)) == "1.1.1");
}

TEST_CASE("affine endpoints match base-3 closed form") {
  auto k = ternary();
  const int n = 9;
  auto c = refine(k, n);
  REQUIRE(c.size() == (1u << (n + 1)));
  for (std::size_t i = 0; i < c.size(); ++i) {
    long double lo = 0, scale = 1;
    for (auto s : c.address(i)) {
      scale /= 3;
      lo += 2 * s * scale;
    }
    CHECK(std::fabs(c[i].lo - static_cast<double>(lo)) < 1e-12);
    CHECK(std::fabs(c[i].hi - static_cast<double>(lo + scale)) < 1e-12);
  }
}

TEST_CASE("gauss cover is nested and Markov consistent") {
  auto k = gauss_cantor(2);
  auto c0 = refine(k, 0), c1 = refine(k, 1);
  CHECK(c1.size() == 4);
  for (const auto& iv : c1.intervals()) {
    int parents = 0;
    for (const auto& p : c0.intervals()) parents += p.contains(iv) ? 1 : 0;
    CHECK(parents == 1);
  }
  auto c5 = refine(k, 5), c4 = refine(k, 4);
  for (std::size_t i = 0; i < c5.size(); ++i) {
    auto w = c5.address(i);
    const auto& psi = k.branch(w[0]).forward;
    double a = psi.apply(c5[i].lo), b = psi.apply(c5[i].hi);
    Interval img{std::min(a, b), std::max(a, b)};
    bool matched = false;
    for (std::size_t j = 0; j < c4.size(); ++j) {
      auto v = c4.address(j);
      if (std::equal(v.begin(), v.end(), w.begin() + 1)) {
        matched = std::fabs(img.lo - c4[j].lo) < 1e-9 && std::fabs(img.hi - c4[j].hi) < 1e-9;
      }
    }
    CHECK(matched);
  }
}

TEST_CASE("gauss cover midpoints have bounded digits") {
  for (int n : {2, 3, 4}) {
    auto k = gauss_cantor(n);
    auto c = refine(k, 4);
    for (std::size_t i = 0; i < c.size(); ++i) {
      auto digits = leading_digits(c[i].mid(), 5);
      auto w = c.address(i);
      for (std::size_t d = 0; d < 5; ++d) {
        CHECK(digits[d] <= n);
        CHECK(digits[d] == w[d] + 1);
      }
    }
  }
}

TEST_CASE("contains") {
  auto k = ternary();
  auto half = contains(k, 0.5, 1);
  CHECK(half.excluded());
  CHECK(half.depth == 0);
  auto quarter = contains(k, 0.25, 10);
  CHECK_FALSE(quarter.excluded());
  CHECK(quarter.depth == 10);
  CHECK_FALSE(contains(k, 0.0, 15).excluded());
  auto ninth = contains(k, 0.15, 5);  // 0.15 = 0.0110..._3, in the gap (1/9, 2/9)
  CHECK(ninth.excluded());
  CHECK(ninth.depth == 1);
}

TEST_CASE("budget and precision floors") {
  auto k = ternary();
  CHECK(kind_of([&] { refine(k, 25); }) == ErrorKind::BudgetExceeded);
  CHECK(kind_of([&] { refine(k, 8, CoverConfig{2'000'000, 1e-3}); }) == ErrorKind::PrecisionLoss);
  CHECK(admissible_word_count(k, 3) == 16.0);
  auto golden = build_affine({{0.0, 0.6}, {0.8, 1.0}}, Transitions{{0, 1}, {0}});
  CHECK(admissible_word_count(golden, 3) == 8.0);  // Fibonacci growth
  CHECK(refine(golden, 3).size() == 8u);
}

TEST_CASE("max_interval_length agrees with the cover") {
  auto k = build_affine({{0.0, 0.5}, {0.75, 1.0}}, full_transitions(2));
  for (int n = 0; n < 6; ++n) {
    CHECK(max_interval_length(k, n) == doctest::Approx(refine(k, n).max_length()).epsilon(1e-12));
  }
}

TEST_CASE("affine images conjugate branches") {
  auto k = ternary().affine_image(Rational(-2), Rational(5));
  CHECK(k.hull() == Interval{3.0, 5.0});
  CHECK(k.branch(0).forward.exact());
  auto c = refine(k, 3), base = refine(ternary(), 3);
  REQUIRE(c.size() == base.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& b = base[base.size() - 1 - i];
    CHECK(c[i].lo == doctest::Approx(-2 * b.hi + 5).epsilon(1e-14));
  }
}

TEST_CASE("construction tree levels match covers") {
  auto k = gauss_cantor(3);
  ConstructionTree tree(k, 4);
  for (int n = 0; n <= 4; ++n) {
    auto c = refine(k, n);
    REQUIRE(tree.level_size(n) == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(tree.intervals(n)[i] == c[i]);
      auto w = tree.address(n, i);
      auto v = c.address(i);
      CHECK(std::equal(w.begin(), w.end(), v.begin(), v.end()));
    }
  }
  for (std::size_t i = 0; i < tree.level_size(1); ++i) {
    auto [b, e] = tree.leaf_range(1, i);
    CHECK(tree.intervals(1)[i].lo == tree.leaves()[b].lo);
    CHECK(tree.intervals(1)[i].hi == doctest::Approx(tree.leaves()[e - 1].hi).epsilon(1e-14));
  }
}
