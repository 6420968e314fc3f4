#include "cantorlab/cantor_io.hpp"

#include <cstdio>
#include <fstream>

#include "cantorlab/error.hpp"

namespace cantorlab {

namespace {

using nlohmann::json;

std::optional<Rational> exact_number(const json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number()) return Rational::from_double(v.get<double>());
  throw Error(ErrorKind::ConfigInvalid, "expected a number, got " + v.dump());
}

double real_number(const json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>()).to_double();
  if (v.is_number()) return v.get<double>();
  throw Error(ErrorKind::ConfigInvalid, "expected a number, got " + v.dump());
}

i128 integer(const json& v, const char* field) {
  if (!v.contains(field) || !v[field].is_number_integer()) {
    throw Error(ErrorKind::ConfigInvalid, std::string("moebius branch needs integer '") + field + "'");
  }
  return v[field].get<std::int64_t>();
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

RegularCantorSet set_from_json(const json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("pieces") || !doc["pieces"].is_array()) {
      throw Error(ErrorKind::ConfigInvalid, "set definition needs a 'pieces' array");
    }
    std::vector<Interval> pieces;
    std::vector<ExactInterval> exact;
    bool all_exact = true;
    bool any_float = false;
    for (const auto& p : doc["pieces"]) {
      any_float = any_float || (p.is_array() && (p[0].is_number_float() || p[1].is_number_float()));
      if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::ConfigInvalid, "piece must be [lo, hi]");
      pieces.push_back({real_number(p[0]), real_number(p[1])});
      auto lo = exact_number(p[0]), hi = exact_number(p[1]);
      if (lo && hi) {
        exact.push_back({*lo, *hi});
      } else {
        all_exact = false;
      }
    }
    const std::size_t r = pieces.size();

    Transitions transitions(r);
    const json& t = doc.value("transitions", json("full"));
    if (t.is_string()) {
      if (t.get<std::string>() != "full") throw Error(ErrorKind::ConfigInvalid, "unknown transitions keyword");
      transitions = full_transitions(r);
    } else {
      for (const auto& edge : t) {
        if (!edge.is_array() || edge.size() != 2) throw Error(ErrorKind::ConfigInvalid, "transition must be [j, s]");
        auto j = edge[0].get<std::size_t>(), s = edge[1].get<std::size_t>();
        if (j >= r || s >= r) throw Error(ErrorKind::ConfigInvalid, "transition index out of range");
        transitions[j].push_back(s);
      }
      for (auto& targets : transitions) std::sort(targets.begin(), targets.end());
    }

    const std::string name = doc.value("name", std::string{});
    const json& branches = doc.value("branches", json("affine-auto"));
    if (branches.is_string()) {
      if (branches.get<std::string>() != "affine-auto") {
        throw Error(ErrorKind::ConfigInvalid, "unknown branches keyword '" + branches.get<std::string>() + "'");
      }
      if (all_exact) return build_affine_exact(std::move(exact), std::move(transitions), {}, name);
      return build_affine(std::move(pieces), std::move(transitions), {}, name);
    }
    if (!branches.is_array() || branches.size() != r) {
      throw Error(ErrorKind::ConfigInvalid, "need one branch description per piece");
    }
    const bool auto_only = std::all_of(branches.begin(), branches.end(), [](const json& b) {
      return b.value("kind", std::string{}) == "affine-auto";
    });
    if (auto_only) {
      std::vector<bool> reversed;
      for (const auto& b : branches) reversed.push_back(b.value("reversed", false));
      if (all_exact) return build_affine_exact(std::move(exact), std::move(transitions), reversed, name);
      return build_affine(std::move(pieces), std::move(transitions), reversed, name);
    }
    // Floating endpoints are only promoted to rationals for affine sets; a
    // Moebius branch would then have to hit a rational approximation exactly.
    const bool any_moebius = std::any_of(branches.begin(), branches.end(), [](const json& b) {
      return b.value("kind", std::string{}) == "moebius";
    });
    if (any_moebius && any_float) all_exact = false;
    auto partition = all_exact ? MarkovPartition(std::move(exact), std::move(transitions))
                               : MarkovPartition(std::move(pieces), std::move(transitions));
    std::vector<ProjectiveMap> forward;
    for (std::size_t j = 0; j < r; ++j) {
      const json& b = branches[j];
      const std::string kind = b.value("kind", std::string{});
      if (kind == "affine-auto") {
        const bool rev = b.value("reversed", false);
        if (auto h = partition.exact_target_hull(j); h && partition.exact_pieces()) {
          const auto& p = (*partition.exact_pieces())[j];
          Rational slope = ((*h)[1] - (*h)[0]) / (p[1] - p[0]);
          if (rev) slope = -slope;
          forward.push_back(ProjectiveMap::affine(slope, (rev ? (*h)[1] : (*h)[0]) - slope * p[0]));
        } else {
          const Interval hull = partition.target_hull(j), p = partition.piece(j);
          long double slope = static_cast<long double>(hull.length()) / p.length();
          if (rev) slope = -slope;
          forward.push_back(ProjectiveMap::affine(slope, (rev ? hull.hi : hull.lo) - slope * p.lo));
        }
      } else if (kind == "affine") {
        auto slope = exact_number(b.at("slope")), offset = exact_number(b.at("offset"));
        if (slope && offset) {
          forward.push_back(ProjectiveMap::affine(*slope, *offset));
        } else {
          forward.push_back(ProjectiveMap::affine(static_cast<long double>(real_number(b.at("slope"))),
                                                  static_cast<long double>(real_number(b.at("offset")))));
        }
      } else if (kind == "moebius") {
        i128 a = integer(b, "a"), bb = integer(b, "b"), c = integer(b, "c"), d = integer(b, "d");
        i128 det = a * d - bb * c;
        if (det != 1 && det != -1) throw Error(ErrorKind::ConfigInvalid, "moebius branch must have determinant +-1");
        forward.push_back(ProjectiveMap::integer(a, bb, c, d));
      } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown branch kind '" + kind + "'");
      }
    }
    return RegularCantorSet::create(std::move(partition), std::move(forward), name);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
}

json set_to_json(const RegularCantorSet& set) {
  json doc;
  if (!set.name().empty()) doc["name"] = set.name();
  json pieces = json::array();
  const auto& exact = set.partition().exact_pieces();
  for (std::size_t j = 0; j < set.piece_count(); ++j) {
    if (exact) {
      pieces.push_back({(*exact)[j][0].str(), (*exact)[j][1].str()});
    } else {
      pieces.push_back({set.partition().piece(j).lo, set.partition().piece(j).hi});
    }
  }
  doc["pieces"] = pieces;
  if (set.partition().is_full()) {
    doc["transitions"] = "full";
  } else {
    json edges = json::array();
    for (std::size_t j = 0; j < set.piece_count(); ++j) {
      for (auto s : set.partition().targets(j)) edges.push_back({j, s});
    }
    doc["transitions"] = edges;
  }
  json branches = json::array();
  for (const auto& b : set.branches()) {
    const auto& m = b.forward.exact_coefficients();
    if (b.kind == BranchKind::Affine) {
      if (m) {
        branches.push_back({{"kind", "affine"},
                            {"slope", Rational((*m)[0], (*m)[3]).str()},
                            {"offset", Rational((*m)[1], (*m)[3]).str()}});
      } else {
        branches.push_back({{"kind", "affine"}, {"slope", b.slope()}, {"offset", b.offset()}});
      }
    } else {
      if (!m) throw Error(ErrorKind::PrecisionLoss, "moebius branch has no exact matrix to serialize");
      branches.push_back({{"kind", "moebius"},
                          {"a", static_cast<std::int64_t>((*m)[0])},
                          {"b", static_cast<std::int64_t>((*m)[1])},
                          {"c", static_cast<std::int64_t>((*m)[2])},
                          {"d", static_cast<std::int64_t>((*m)[3])}});
    }
  }
  doc["branches"] = branches;
  return doc;
}

RegularCantorSet load_set_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IOError, "cannot open set file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, "'" + path.string() + "': " + e.what());
  }
  return set_from_json(doc);
}

void write_cover_csv(std::ostream& os, const Cover& cover) {
  os << "depth,address,lo,hi\n";
  for (std::size_t i = 0; i < cover.size(); ++i) {
    os << cover.depth() << ',' << format_address(cover.address(i)) << ',' << format_double(cover[i].lo) << ','
       << format_double(cover[i].hi) << '\n';
  }
}

}  // namespace cantorlab
