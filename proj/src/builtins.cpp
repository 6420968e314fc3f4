#include "cantorlab/builtins.hpp"

#include <charconv>

#include "cantorlab/error.hpp"

namespace cantorlab {

namespace {

RegularCantorSet two_piece(Rational a, Rational b, const std::string& name) {
  return build_affine_exact({{Rational(0), a}, {b, Rational(1)}}, full_transitions(2), {}, name);
}

}  // namespace

RegularCantorSet builtin_set(const std::string& name) {
  if (name == "ternary") return two_piece(Rational(1, 3), Rational(2, 3), name);
  if (name == "middle-fifth") return two_piece(Rational(2, 5), Rational(3, 5), name);
  if (name == "thin") return two_piece(Rational(1, 10), Rational(9, 10), name);
  if (name == "thick45") return two_piece(Rational(9, 20), Rational(11, 20), name);
  if (name == "half-quarter") return two_piece(Rational(1, 2), Rational(3, 4), name);
  // Factors of the default affine horseshoe (contraction 1/3, expansion 3).
  if (name == "horseshoe-stable" || name == "horseshoe-unstable") return two_piece(Rational(1, 3), Rational(2, 3), name);
  if (name.rfind("gauss:", 0) == 0) {
    int n = 0;
    const char* first = name.data() + 6;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc{} || ptr != last) throw Error(ErrorKind::InvalidArgument, "bad gauss set name: " + name);
    return gauss_cantor(n);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown built-in set: " + name);
}

std::vector<BuiltinEntry> list_builtin_sets() {
  return {
      {"ternary", "pieces [0,1/3], [2/3,1]; psi(x) = 3x - floor(3x)"},
      {"middle-fifth", "pieces [0,2/5], [3/5,1]; psi(x) = 5x/2 on the left, 5x/2 - 3/2 on the right"},
      {"thin", "two-piece thin set [0,1/10], [9/10,1]; psi slope 10"},
      {"thick45", "pieces [0,9/20], [11/20,1]; thickness 4.5"},
      {"half-quarter", "pieces [0,1/2], [3/4,1]; branch ratios 1/2 and 1/4"},
      {"gauss:N", "continued fractions with digits in 1..N; psi(x) = 1/x - floor(1/x)"},
      {"horseshoe-stable", "stable factor of the affine horseshoe with contraction 1/3"},
      {"horseshoe-unstable", "unstable factor of the affine horseshoe with expansion 3"},
  };
}

}  // namespace cantorlab
