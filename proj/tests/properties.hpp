#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "cantorlab/cantor_set.hpp"

namespace properties {

struct Report {
  int cases = 0;
  int failures = 0;
  int exercised = 0;  ///< cases where the property had something to check
  std::string first_failure;

  bool passed() const { return cases > 0 && failures == 0; }
};

/// Random full-shift affine set on [0, 1] with 2..max_pieces pieces and random orientations.
cantorlab::RegularCantorSet random_affine_set(std::mt19937_64& rng, int max_pieces = 4);

Report cover_nestedness(int cases, std::uint64_t seed);
Report outer_monotonicity(int cases, std::uint64_t seed);
Report moran_monotonicity(int cases, std::uint64_t seed);
Report affine_equivariance(int cases, std::uint64_t seed);
/// Gap-lemma certificates never meet a disjoint depth, and translations
/// covered by a recurrent-region certificate never separate.
Report certificate_soundness(int cases, std::uint64_t seed);

}  // namespace properties
