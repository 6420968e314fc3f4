#pragma once

#include <string>
#include <vector>

#include "cantorlab/cantor_set.hpp"

namespace cantorlab {

struct BuiltinEntry {
  std::string name;
  std::string description;
};

/// Named sets: ternary, middle-fifth, thin, thick45, half-quarter, gauss:N,
/// horseshoe-stable, horseshoe-unstable. Unknown names throw InvalidArgument.
RegularCantorSet builtin_set(const std::string& name);

std::vector<BuiltinEntry> list_builtin_sets();

}  // namespace cantorlab
