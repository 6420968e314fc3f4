#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cantorlab/builtins.hpp"
#include "cantorlab/dimension.hpp"
#include "cantorlab/dynamics.hpp"
#include "cantorlab/error.hpp"
#include "cantorlab/intersect.hpp"
#include "cantorlab/parallel.hpp"
#include "cantorlab/setops.hpp"
#include "cantorlab/spectra.hpp"
#include "properties.hpp"

using namespace cantorlab;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

RegularCantorSet equal_pieces(int pieces, double ratio) {
  std::vector<Interval> parts;
  const double step = (1.0 - ratio) / (pieces - 1);
  for (int i = 0; i < pieces; ++i) parts.push_back({i * step, i == pieces - 1 ? 1.0 : i * step + ratio});
  return build_affine(std::move(parts), full_transitions(static_cast<std::size_t>(pieces)));
}

Verdict ternary_dimension() {
  const auto start = std::chrono::steady_clock::now();
  const auto k = builtin_set("ternary");
  const double exact = std::log(2.0) / std::log(3.0);
  const double moran = hausdorff_dimension_moran(k, 12, 1e-9).value;
  const double box = box_dimension(k, 2, 10).value;
  const double elapsed = seconds_since(start);
  return {std::abs(moran - exact) <= 1e-9 && std::abs(box - exact) <= 0.01 && elapsed < 1.0,
          fmt("moran %.12f, box %.6f, target %.12f, %.3f s", moran, box, exact, elapsed)};
}

Verdict hall_identity() {
  const auto start = std::chrono::steady_clock::now();
  const auto c4 = gauss_cantor(4);
  const auto [n1, n2] = balanced_depths(c4, c4, 8);
  const auto u = cover_sum(c4, c4, n1, n2, SetOp::Sum);
  const Interval target{std::numbers::sqrt2 - 1, 4 * (std::numbers::sqrt2 - 1)};
  const bool contains = contains_interval(u, target, 1e-3);
  const double err = std::max(std::abs(u.hull().lo - target.lo), std::abs(u.hull().hi - target.hi));
  const double elapsed = seconds_since(start);
  return {contains && err <= 1e-3 && elapsed < 120,
          fmt("depth %d, contains %s, endpoint error %.2e, %.2f s", n1, contains ? "yes" : "no", err, elapsed)};
}

Verdict ternary_sum_identity() {
  const auto k = builtin_set("ternary");
  for (int n = 0; n <= 10; ++n) {
    const auto sum = cover_sum(k, k, n, SetOp::Sum);
    const auto diff = cover_sum(k, k, n, SetOp::Difference);
    const bool ok = sum.size() == 1 && std::abs(sum[0].lo) <= 1e-12 && std::abs(sum[0].hi - 2) <= 1e-12 &&
                    diff.size() == 1 && std::abs(diff[0].lo + 1) <= 1e-12 && std::abs(diff[0].hi - 1) <= 1e-12;
    if (!ok) return {false, fmt("depth %d: %zu / %zu components", n, sum.size(), diff.size())};
  }
  return {true, "K + K = [0, 2] and K - K = [-1, 1] at depths 0..10"};
}

Verdict thin_difference_measure() {
  const auto k = builtin_set("thin");
  std::vector<double> measures;
  for (int n = 0; n <= 8; ++n) measures.push_back(measure_estimate(cover_sum(k, k, n, SetOp::Difference)));
  bool decreasing = true;
  for (std::size_t i = 1; i < measures.size(); ++i) decreasing = decreasing && measures[i] < measures[i - 1];
  return {decreasing && measures.back() < 0.2,
          fmt("measure %.4f at depth 0 to %.3e at depth 8, strictly decreasing: %s", measures.front(), measures.back(),
              decreasing ? "yes" : "no")};
}

Verdict sum_dimension_law() {
  struct Pair {
    RegularCantorSet a, b;
    double expected;
  };
  const std::vector<Pair> pairs = {
      {equal_pieces(2, std::pow(2.0, -1 / 0.3)), equal_pieces(3, std::pow(3.0, -1 / 0.3)), 0.6},
      {equal_pieces(2, std::pow(2.0, -1 / 0.45)), equal_pieces(3, 1.0 / 9.0), 0.95},
      {builtin_set("ternary"), builtin_set("ternary"), 1.0},
  };
  bool pass = true;
  std::string detail;
  for (const auto& p : pairs) {
    const auto [n1, n2] = balanced_depths(p.a, p.b, 10);
    const auto u = cover_sum(p.a, p.b, n1, n2, SetOp::Sum);
    const double d = grid_box_dimension(u.intervals(), default_resolutions()).value;
    pass = pass && std::abs(d - p.expected) <= 0.05;
    detail += fmt("%s%.3f vs %.2f", detail.empty() ? "" : "; ", d, p.expected);
  }
  return {pass, detail};
}

Verdict marstrand() {
  const auto start = std::chrono::steady_clock::now();
  const auto lambdas = log_uniform_grid(1.0 / 8, 8, 200);
  std::vector<double> resolutions;
  for (int k = 6; k <= 12; ++k) resolutions.push_back(std::ldexp(1.0, -k));
  const auto ternary = builtin_set("ternary");
  ScanConfig config{{}, default_jobs()};
  const auto scan = marstrand_scan(ternary, ternary, lambdas, 10, resolutions, config);
  const double fraction = scan.fraction_above(0.1);

  const auto thin = builtin_set("thin");
  const auto thin_lambdas = log_uniform_grid(1.0 / 8, 8, 20);
  const auto thin_scan = marstrand_scan(thin, thin, thin_lambdas, 10, default_resolutions(), config);
  double min_slope = INFINITY;
  for (const auto& r : thin_scan.records) min_slope = std::min(min_slope, r.slope);
  const double elapsed = seconds_since(start);
  return {fraction >= 0.9 && min_slope >= 0.3 && elapsed < 600,
          fmt("ternary fraction above 0.1 at 2^-12: %.3f; thin min slope %.3f over %zu lambdas; %.1f s", fraction,
              min_slope, thin_lambdas.size(), elapsed)};
}

Verdict certificates() {
  const auto mf = builtin_set("middle-fifth"), thin = builtin_set("thin");
  const bool gap = gap_lemma_test(mf, mf, 0.0) == GapLemmaResult::CertifiedIntersection;
  const auto found = recurrent_compact_search(mf, mf);
  const bool nonempty = found.region && found.region->member_count() > 0;
  bool valid = false;
  double verify_seconds = 0;
  if (nonempty) {
    const auto doc = certificate_to_json(mf, mf, found);
    const auto start = std::chrono::steady_clock::now();
    valid = verify_certificate(doc).valid;
    verify_seconds = seconds_since(start);
  }
  const bool thin_missing = recurrent_compact_search(thin, thin).status == RecurrenceResult::Status::NotFound;
  return {gap && nonempty && valid && verify_seconds < 10 && thin_missing,
          fmt("gap lemma %s, %zu member cells, checker %s in %.2f s, thin pair %s", gap ? "certified" : "no",
              nonempty ? found.region->member_count() : std::size_t{0}, valid ? "valid" : "invalid", verify_seconds,
              thin_missing ? "not found" : "found")};
}

Verdict spectrum_exacts() {
  std::vector<std::int64_t> ones{1}, twos{2};
  const bool golden = k_exact(ones) == QuadraticSurd::sqrt(5);
  const bool silver = k_exact(twos) == QuadraticSurd(2) * QuadraticSurd::sqrt(2);
  const auto sample = lagrange_sample(6, 4, {.budget = 2'000'000, .jobs = default_jobs()});
  const bool minimum = *sample.front().exact == QuadraticSurd::sqrt(5);
  double worst = 0;
  std::size_t words = 0;
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::int64_t> w(static_cast<std::size_t>(len), 1);
    for (;;) {
      try {
        const auto r = k_alpha(CFSequence::periodic(w), 64);
        worst = std::max(worst, std::abs(r.direct - r.tail));
      } catch (const Error&) {
        worst = INFINITY;
      }
      ++words;
      int i = len - 1;
      while (i >= 0 && w[i] == 4) w[i--] = 1;
      if (i < 0) break;
      ++w[i];
    }
  }
  return {golden && silver && minimum && worst <= 1e-9,
          fmt("k(1bar) = sqrt5 %s, k(2bar) = 2sqrt2 %s, sample min sqrt5 %s, max estimator gap %.2e over %zu words",
              golden ? "yes" : "no", silver ? "yes" : "no", minimum ? "yes" : "no", worst, words)};
}

Verdict cat_map() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = cat_map_check(10);
  const auto root5 = QuadraticSurd::sqrt(5);
  const bool eigen = r.unstable_eigenvalue == (QuadraticSurd(3) + root5) / QuadraticSurd(2) &&
                     r.stable_eigenvalue == (QuadraticSurd(3) - root5) / QuadraticSurd(2) && r.unit_product &&
                     r.hyperbolic;
  const double elapsed = seconds_since(start);
  return {eigen && r.counts_match() && r.counts.size() == 10 && elapsed < 30,
          fmt("eigenvalues %s and %s, counts match for n <= 10: %s (%lld points at n = 10), %.2f s",
              r.unstable_eigenvalue.str().c_str(), r.stable_eigenvalue.str().c_str(), r.counts_match() ? "yes" : "no",
              static_cast<long long>(r.counts.back().enumerated), elapsed)};
}

Verdict standard_family() {
  const LyapunovConfig config{.orbits = 200, .iterates = 10'000, .seed = 1, .jobs = default_jobs()};
  const auto zero = standard_family_lyapunov(0.0, config);
  const auto six = standard_family_lyapunov(6.0, config);
  const double sum = std::max(zero.max_abs_sum, six.max_abs_sum);
  return {zero.mean_exponent < 0.05 && sum < 1e-6 && six.fraction_positive > 0.9,
          fmt("lambda 0 mean %.4f, max |sum| %.1e, lambda 6 fraction positive %.3f (mean %.3f)", zero.mean_exponent, sum,
              six.fraction_positive, six.mean_exponent)};
}

Verdict property_suites() {
  struct Suite {
    const char* name;
    properties::Report report;
  };
  const std::vector<Suite> suites = {
      {"nestedness", properties::cover_nestedness(1000, 101)},
      {"outer monotonicity", properties::outer_monotonicity(1000, 202)},
      {"moran monotonicity", properties::moran_monotonicity(1000, 303)},
      {"affine equivariance", properties::affine_equivariance(1000, 404)},
      {"certificate soundness", properties::certificate_soundness(1000, 505)},
  };
  bool pass = true;
  std::string detail;
  for (const auto& s : suites) {
    pass = pass && s.report.passed() && s.report.cases >= 1000;
    detail += fmt("%s%s %d/%d", detail.empty() ? "" : "; ", s.name, s.report.cases - s.report.failures, s.report.cases);
    if (!s.report.first_failure.empty()) detail += " (" + s.report.first_failure + ")";
  }
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"ternary dimension", ternary_dimension},
      {"Hall sum C(4) + C(4)", hall_identity},
      {"ternary sum and difference", ternary_sum_identity},
      {"measure-zero thin difference", thin_difference_measure},
      {"dimension of sums", sum_dimension_law},
      {"projection scan", marstrand},
      {"gap lemma and recurrent certificate", certificates},
      {"spectrum exact values", spectrum_exacts},
      {"cat map", cat_map},
      {"standard family exponents", standard_family},
      {"property suites", property_suites},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw ") + e.what()};
    }
    failed += !v.pass;
    std::printf("ACCEPTANCE %2zu %s: %s (%s)\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
