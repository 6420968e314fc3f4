#pragma once

#include <filesystem>
#include <ostream>

#include "cantorlab/cantor_set.hpp"
#include "json.hpp"

namespace cantorlab {

/// Reads a set definition:
///   {"pieces": [[lo, hi], ...],
///    "transitions": [[j, s], ...] | "full",
///    "branches": "affine-auto" | [{"kind": "affine", "slope": .., "offset": ..}
///                                | {"kind": "moebius", "a": .., "b": .., "c": .., "d": ..}
///                                | {"kind": "affine-auto", "reversed": true}, ...]}
/// Endpoints may be JSON numbers or strings such as "1/3"; rational inputs keep
/// exact endpoint arithmetic.
RegularCantorSet set_from_json(const nlohmann::json& doc);
nlohmann::json set_to_json(const RegularCantorSet& set);
RegularCantorSet load_set_file(const std::filesystem::path& path);

/// CSV rows `depth,address,lo,hi`.
void write_cover_csv(std::ostream& os, const Cover& cover);

}  // namespace cantorlab
