#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "cantorlab/spectra.hpp"
#include "test_support.hpp"

using namespace cantorlab;
using testing::kind_of;

namespace {

// Floating reference: evaluate the continued fraction of a long periodic word backwards.
double float_tail(const std::vector<std::int64_t>& period, std::size_t start, int reps = 60) {
  const std::size_t m = period.size();
  double x = 0;
  for (std::size_t k = m * reps; k-- > 0;) x = 1.0 / (period[(start + k) % m] + x);
  return 1.0 / x;
}

double float_k(const std::vector<std::int64_t>& period) {
  const std::size_t m = period.size();
  double best = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::int64_t> back;
    for (std::size_t j = 1; j <= m; ++j) back.push_back(period[(i + m - j) % m]);
    best = std::max(best, float_tail(period, i) + 1.0 / float_tail(back, 0));
  }
  return best;
}

}  // namespace

TEST_CASE("exact expansions of rationals and surds") {
  CHECK(cf_expand(BigRational(3, 7), 10).prefix() == std::vector<std::int64_t>{2, 3});
  auto silver = QuadraticSurd::sqrt(2) - QuadraticSurd(1);
  CHECK(cf_expand(silver, 12).prefix() == std::vector<std::int64_t>(12, 2));
  auto golden = (QuadraticSurd::sqrt(5) - QuadraticSurd(1)) / QuadraticSurd(2);
  CHECK(cf_expand(golden, 20).prefix() == std::vector<std::int64_t>(20, 1));
}

TEST_CASE("double expansion stops where the ulp interval splits") {
  const double golden = (std::sqrt(5.0) - 1) / 2;
  const std::size_t n = certified_digit_count(golden);
  CHECK(n > 25);
  CHECK(n < 45);
  CHECK(cf_expand(golden, n).prefix() == std::vector<std::int64_t>(n, 1));
  CHECK(kind_of([&] { cf_expand(golden, n + 1); }) == ErrorKind::PrecisionExhausted);
  // 3/8 = [0; 2, 1, 2] = [0; 2, 1, 1, 1]; the ulp interval straddles the last digit.
  CHECK(certified_digit_count(0.375) == 2);
}

TEST_CASE("convergents by continuants") {
  std::vector<std::int64_t> ones{1, 1, 1, 1, 1};
  auto c = cf_value(ones);
  CHECK(c.p == 5);
  CHECK(c.q == 8);
  std::vector<std::int64_t> twos{2, 2};
  auto d = cf_value(twos);
  CHECK(d.p == 2);
  CHECK(d.q == 5);
  std::vector<std::int64_t> long_word(400, 3);
  CHECK(kind_of([&] { cf_value(long_word, 64); }) == ErrorKind::Overflow);
  std::vector<std::int64_t> bad{1, 0};
  CHECK(kind_of([&] { cf_value(bad); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("periodic values are the fixed points") {
  std::vector<std::int64_t> one{1}, two{2}, mixed{2, 1};
  CHECK(periodic_value(one) == (QuadraticSurd(1) + QuadraticSurd::sqrt(5)) / QuadraticSurd(2));
  CHECK(periodic_value(two) == QuadraticSurd(1) + QuadraticSurd::sqrt(2));
  auto v = periodic_value(mixed);
  CHECK(v * v - QuadraticSurd(2) * v - QuadraticSurd(2) == QuadraticSurd(0));
  CHECK(sequence_value(CFSequence::periodic({2})) == QuadraticSurd::sqrt(2) - QuadraticSurd(1));
  CHECK(sequence_value(CFSequence::periodic({1}, {3})).to_double() == doctest::Approx(1.0 / (3 + 0.6180339887498949)));
}

TEST_CASE("exact k-values of short periods") {
  std::vector<std::int64_t> one{1}, two{2}, mixed{2, 1};
  CHECK(k_exact(one) == QuadraticSurd::sqrt(5));
  CHECK(k_exact(two) == QuadraticSurd(2) * QuadraticSurd::sqrt(2));
  CHECK(k_exact(mixed) == QuadraticSurd(2) * QuadraticSurd::sqrt(3));
}

TEST_CASE("k_exact agrees with a floating evaluation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> w(1 + rng() % 6);
    for (auto& d : w) d = 1 + static_cast<std::int64_t>(rng() % 5);
    CHECK(k_exact(w).to_double() == doctest::Approx(float_k(w)).epsilon(1e-12));
  }
}

TEST_CASE("Markov values below 3") {
  auto sample = lagrange_sample(6, 2);
  std::vector<QuadraticSurd> below;
  for (const auto& v : sample) {
    if (*v.exact < QuadraticSurd(3)) below.push_back(*v.exact);
  }
  // sqrt(9 m^2 - 4) / m for the Markov numbers 1, 2, 5, 13, 29.
  std::vector<QuadraticSurd> expected;
  for (long long m : {1, 2, 5, 13, 29}) expected.push_back(QuadraticSurd::sqrt(9 * m * m - 4) / QuadraticSurd(m));
  REQUIRE(below.size() == expected.size());
  for (std::size_t i = 0; i < below.size(); ++i) CHECK(below[i] == expected[i]);
}

TEST_CASE("lagrange_sample basics") {
  auto tiny = lagrange_sample(1, 2);
  REQUIRE(tiny.size() == 2);
  CHECK(*tiny[0].exact == QuadraticSurd::sqrt(5));
  CHECK(*tiny[1].exact == QuadraticSurd(2) * QuadraticSurd::sqrt(2));

  auto sample = lagrange_sample(5, 3, {.budget = 2'000'000, .jobs = 4});
  CHECK(*sample.front().exact == QuadraticSurd::sqrt(5));
  for (std::size_t i = 1; i < sample.size(); ++i) CHECK(*sample[i - 1].exact < *sample[i].exact);
  for (const auto& v : sample) {
    CHECK(v.value < 3 + 2.0);
    const bool gap = v.value > std::sqrt(5.0) + 1e-12 && v.value < std::sqrt(8.0) - 1e-12;
    CHECK_FALSE(gap);
    CHECK(minimal_rotation(v.witness) == v.witness);
  }
  CHECK(kind_of([] { lagrange_sample(30, 4); }) == ErrorKind::BudgetExceeded);
  CHECK(kind_of([] { lagrange_sample(0, 4); }) == ErrorKind::InvalidArgument);

  std::ostringstream os;
  write_spectrum_csv(os, tiny);
  CHECK(os.str().rfind("value,witness_digits,window\n2.2360679774997898,1,1\n", 0) == 0);
}

TEST_CASE("estimators agree on periodic inputs") {
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::int64_t> w(static_cast<std::size_t>(len), 1);
    for (;;) {
      auto r = k_alpha(CFSequence::periodic(w), 64);
      CHECK(std::abs(r.direct - r.tail) <= 1e-9);
      CHECK(r.value == doctest::Approx(r.exact->to_double()).epsilon(1e-12));
      CHECK(r.tail == doctest::Approx(r.value).epsilon(1e-9));
      int i = len - 1;
      while (i >= 0 && w[i] == 4) w[i--] = 1;
      if (i < 0) break;
      ++w[i];
    }
  }
}

TEST_CASE("k is shift invariant and at least sqrt 5") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::int64_t> w(1 + rng() % 5), pre(rng() % 4);
    for (auto& d : w) d = 1 + static_cast<std::int64_t>(rng() % 4);
    for (auto& d : pre) d = 1 + static_cast<std::int64_t>(rng() % 9);
    auto plain = k_alpha(CFSequence::periodic(w), 64);
    auto shifted = k_alpha(CFSequence::periodic(w, pre), 64);
    CHECK(*plain.exact == *shifted.exact);
    CHECK(plain.value >= std::sqrt(5.0) - 1e-12);
  }
}

TEST_CASE("streamed sequences") {
  auto e_like = CFSequence::streamed([](std::size_t i) -> std::int64_t { return i % 3 == 1 ? 2 * (i / 3 + 1) : 1; },
                                     "e");
  auto r = k_alpha(e_like, 60);
  CHECK_FALSE(r.exact);
  CHECK(std::abs(r.direct - r.tail) <= 1e-9);
  CHECK(r.value > 40.0);  // unbounded digits push the window maximum up
  auto bounded = CFSequence::streamed([](std::size_t i) -> std::int64_t { return 1 + (i * i) % 2; }, "alt");
  auto b = k_alpha(bounded, 80);
  CHECK(b.value == doctest::Approx(2 * std::sqrt(3.0)).epsilon(1e-9));
  CHECK(kind_of([] { k_alpha(CFSequence::finite({1, 2}), 8); }) == ErrorKind::InvalidArgument);
  CHECK(CFSequence::parse_period("2,1").period() == std::vector<std::int64_t>{2, 1});
  CHECK(kind_of([] { CFSequence::parse_period("2,x"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("half-line probe") {
  std::vector<double> targets{6.0, 7.25, 9.1};
  auto hits = hall_halfline_probe(targets, 6);
  REQUIRE(hits.size() == 3);
  for (const auto& h : hits) {
    CHECK(h.hit_distance < 0.05);
    for (auto d : h.witness.period()) {
      if (d != h.marker) CHECK(d <= 4);
    }
    CHECK(h.value == doctest::Approx(k_exact(h.witness.period()).to_double()));
  }
  std::vector<double> low{std::sqrt(5.0)};
  CHECK(kind_of([&] { hall_halfline_probe(low, 4); }) == ErrorKind::InvalidArgument);
}
