#include "cantorlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <new>
#include <numbers>

#include "CLI11.hpp"
#include "cantorlab/builtins.hpp"
#include "cantorlab/cantor_io.hpp"
#include "cantorlab/dimension.hpp"
#include "cantorlab/dynamics.hpp"
#include "cantorlab/intersect.hpp"
#include "cantorlab/parallel.hpp"
#include "cantorlab/rational.hpp"
#include "cantorlab/setops.hpp"
#include "cantorlab/spectra.hpp"

namespace cantorlab::cli {

using nlohmann::json;

namespace {

ParamSpec int_param(std::string key, json fallback, std::string help) {
  return {std::move(key), ParamType::Int, std::move(fallback), std::move(help)};
}
ParamSpec real_param(std::string key, json fallback, std::string help) {
  return {std::move(key), ParamType::Real, std::move(fallback), std::move(help)};
}
ParamSpec string_param(std::string key, json fallback, std::string help) {
  return {std::move(key), ParamType::String, std::move(fallback), std::move(help)};
}
ParamSpec bool_param(std::string key, bool fallback, std::string help) {
  return {std::move(key), ParamType::Bool, fallback, std::move(help)};
}
ParamSpec list_param(std::string key, json fallback, std::string help) {
  return {std::move(key), ParamType::RealList, std::move(fallback), std::move(help)};
}
ParamSpec set_param(std::string key, std::string fallback, std::string help) {
  return {std::move(key), ParamType::Set, std::move(fallback), std::move(help)};
}
ParamSpec csv_param() { return string_param("csv", nullptr, "CSV output path"); }

std::vector<CommandSpec> build_specs() {
  const auto budget = int_param("budget", nullptr, "interval/pair/cell budget for this run");
  std::vector<CommandSpec> specs = {
      {"dim",
       "dimension estimate of a Cantor set",
       {set_param("set", "ternary", "builtin name, set file, or inline definition"),
        string_param("method", "moran", "moran or box"), int_param("depth", 12, "cover depth for the Moran root"),
        real_param("tol", 1e-9, "bisection tolerance"), int_param("depth_min", 2, "first box-count depth"),
        int_param("depth_max", 10, "last box-count depth"), csv_param()}},
      {"thickness",
       "Newhouse thickness at a finite depth",
       {set_param("set", "ternary", "set"), int_param("depth", 10, "cover depth")}},
      {"sum",
       "cover of K1 + lambda K2",
       {set_param("set1", "ternary", "first set"), set_param("set2", "ternary", "second set"),
        int_param("depth", 10, "depth of the deeper cover"), real_param("lambda", 1.0, "scale of the second set"),
        real_param("target_lo", nullptr, "left end of an interval to test"),
        real_param("target_hi", nullptr, "right end of an interval to test"),
        real_param("margin", 0.0, "shrink the target by this much on each side"), csv_param()}},
      {"diff",
       "cover of K1 - lambda K2",
       {set_param("set1", "ternary", "first set"), set_param("set2", "ternary", "second set"),
        int_param("depth", 10, "depth of the deeper cover"), real_param("lambda", 1.0, "scale of the second set"),
        real_param("target_lo", nullptr, "left end of an interval to test"),
        real_param("target_hi", nullptr, "right end of an interval to test"),
        real_param("margin", 0.0, "shrink the target by this much on each side"), csv_param()}},
      {"hall",
       "C(4) + C(4) against [sqrt2 - 1, 4(sqrt2 - 1)]",
       {int_param("depth", 8, "cover depth"), real_param("margin", 1e-3, "target margin")}},
      {"marstrand",
       "covered length of K1 - lambda K2 over log-uniform lambdas",
       {set_param("set1", "ternary", "first set"), set_param("set2", "ternary", "second set"),
        int_param("lambdas", 200, "number of lambda samples"), real_param("lambda_lo", 0.125, "smallest lambda"),
        real_param("lambda_hi", 8.0, "largest lambda"), int_param("depth", 10, "depth of the deeper cover"),
        list_param("resolutions", nullptr, "grid resolutions (default 2^-6 .. 2^-14)"),
        real_param("theta", 0.05, "covered-length threshold"), csv_param()}},
      {"intersect",
       "does K1 meet K2 + t",
       {set_param("set1", "ternary", "first set"), set_param("set2", "ternary", "second set"),
        real_param("t", 0.0, "translation"), int_param("depth", 12, "cover depth"),
        int_param("points", 0, "scan this many t values in [t_lo, t_hi] instead"),
        real_param("t_lo", -1.0, "scan start"), real_param("t_hi", 1.0, "scan end"), csv_param()}},
      {"recur",
       "search for a recurrent compact set of relative positions",
       {set_param("set1", "middle-fifth", "first set"), set_param("set2", "middle-fifth", "second set"),
        int_param("ns", 200, "scale cells"), int_param("nu", 200, "translation cells"),
        real_param("s_lo", -1.0, "smallest log scale"), real_param("s_hi", 1.0, "largest log scale"),
        real_param("u_lo", nullptr, "smallest translation"), real_param("u_hi", nullptr, "largest translation"),
        int_param("margin", 1, "cells of slack around each image"),
        real_param("t", nullptr, "report whether this translation is certified"),
        string_param("certificate", nullptr, "write the certificate JSON here"),
        string_param("verify", nullptr, "check an existing certificate file instead of searching")}},
      {"dstable",
       "dimension of K1' cap (K2' + t) under random affine perturbations",
       {set_param("set1", "middle-fifth", "first set"), set_param("set2", "middle-fifth", "second set"),
        real_param("t", 0.3, "translation"), real_param("d", 0.2, "dimension threshold"),
        int_param("perturbations", 50, "perturbed pairs"), real_param("radius", 1e-3, "endpoint perturbation"),
        int_param("depth", 12, "cover depth"), int_param("seed", 1, "random seed")}},
      {"density",
       "relative measure of K1 - K2 near t0",
       {set_param("set1", "thin", "first set"), set_param("set2", "thin", "second set"),
        real_param("t0", 0.0, "base point in the difference set"), int_param("side", 1, "+1 right, -1 left"),
        int_param("depth", 10, "cover depth"),
        list_param("deltas", nullptr, "decreasing window sizes (default 2^-2 .. 2^-10)"), csv_param()}},
      {"spectrum",
       "k-values of continued fractions",
       {string_param("period", nullptr, "periodic sequence such as 2,1"),
        int_param("window", 64, "estimator window"), int_param("max_period", 6, "longest period sampled"),
        int_param("digit_bound", 2, "largest digit sampled"), csv_param()}},
      {"halfline",
       "periodic witnesses with k-values near targets >= 6",
       {list_param("targets", json::array({6.0, 7.25}), "targets"), int_param("depth", 6, "witness depth")}},
      {"horseshoe",
       "stable and unstable Cantor sets of the affine horseshoe",
       {real_param("contraction", 1.0 / 3.0, "contraction in (0, 1/2)"),
        real_param("expansion", 3.0, "expansion > 2"),
        bool_param("critical", false, "solve for the contraction giving dimension 1")}},
      {"catmap",
       "hyperbolicity and periodic points of a toral automorphism",
       {int_param("periods", 10, "largest period"), list_param("matrix", json::array({2, 1, 1, 1}), "a,b,c,d")}},
      {"stdmap",
       "Lyapunov exponents of the standard family",
       {real_param("lambda", 6.0, "family parameter"), int_param("orbits", 200, "initial conditions"),
        int_param("iterates", 10'000, "iterates per orbit"), int_param("seed", 1, "random seed"),
        real_param("threshold", 0.05, "positive-exponent threshold"), csv_param()}},
  };
  for (auto& s : specs) s.params.push_back(budget);
  return specs;
}

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::ConfigInvalid, message); }

json check_type(const ParamSpec& spec, const json& v) {
  if (v.is_null()) return v;
  switch (spec.type) {
    case ParamType::Int:
      if (v.is_number_integer()) return v;
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return v.get<std::int64_t>();
      break;
    case ParamType::Real:
      if (v.is_number()) return v.get<double>();
      if (v.is_string()) return parse_flag_value(spec, v.get<std::string>());
      break;
    case ParamType::String:
      if (v.is_string()) return v;
      break;
    case ParamType::Bool:
      if (v.is_boolean()) return v;
      break;
    case ParamType::RealList:
      if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) return v;
      if (v.is_string()) return parse_flag_value(spec, v.get<std::string>());
      break;
    case ParamType::Set:
      if (v.is_string() || v.is_object()) return v;
      break;
  }
  invalid("parameter '" + spec.key + "' has the wrong type: " + v.dump());
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    return Rational::parse(text).to_double();
  } catch (const Error&) {
    invalid("parameter '" + key + "' expects a number, got '" + text + "'");
  }
}

RegularCantorSet resolve_set(const json& v) {
  if (v.is_object()) return set_from_json(v);
  const auto name = v.get<std::string>();
  try {
    return builtin_set(name);
  } catch (const Error&) {
  }
  if (name.rfind("gauss:", 0) == 0) return builtin_set(name);
  return load_set_file(name);
}

CoverConfig cover_config(std::optional<std::size_t> budget) {
  CoverConfig c;
  if (budget) c.budget = *budget;
  return c;
}

SumConfig sum_config(std::optional<std::size_t> budget) {
  SumConfig c;
  c.cover = cover_config(budget);
  if (budget) c.pair_budget = *budget;
  return c;
}

std::optional<double> opt_real(const json& p, const char* key) {
  if (p.at(key).is_null()) return std::nullopt;
  return p.at(key).get<double>();
}

std::vector<double> reals(const json& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IOError, "cannot write '" + path + "'");
  return os;
}

struct Run {
  const json& p;
  std::optional<std::size_t> budget;
  unsigned jobs;
  json artifacts = json::array();

  template <class Writer>
  void csv(Writer&& write) {
    if (p.at("csv").is_null()) return;
    const auto path = p.at("csv").get<std::string>();
    auto os = open_output(path);
    write(os);
    artifacts.push_back(path);
  }
};

json run_dim(Run& run) {
  const auto& p = run.p;
  const auto set = resolve_set(p["set"]);
  const auto method = p["method"].get<std::string>();
  if (method == "moran") {
    return to_json(hausdorff_dimension_moran(set, p["depth"].get<int>(), p["tol"].get<double>(), cover_config(run.budget)));
  }
  if (method == "box") {
    std::vector<BoxCount> counts;
    auto e = box_dimension(set, p["depth_min"].get<int>(), p["depth_max"].get<int>(), cover_config(run.budget), &counts);
    run.csv([&](std::ostream& os) { write_box_counts_csv(os, counts); });
    return to_json(e);
  }
  invalid("method must be 'moran' or 'box', got '" + method + "'");
}

json run_thickness(Run& run) {
  const auto set = resolve_set(run.p["set"]);
  const auto t = thickness(set, run.p["depth"].get<int>(), cover_config(run.budget));
  return {{"value", t.value}, {"depth_used", t.depth_used}, {"limiting_gap", t.limiting_gap}, {"gap", interval_json(t.gap)}};
}

json union_summary(const IntervalUnion& u) {
  return {{"components", u.size()},
          {"hull", u.empty() ? json(nullptr) : interval_json(u.hull())},
          {"measure_estimate", measure_estimate(u)}};
}

json run_setop(Run& run, SetOp op) {
  const auto& p = run.p;
  const auto k1 = resolve_set(p["set1"]), k2 = resolve_set(p["set2"]);
  const double lambda = p["lambda"].get<double>();
  const auto [n1, n2] = balanced_depths(k1, k2, p["depth"].get<int>(), lambda);
  const auto u = cover_sum(k1, k2, n1, n2, op, lambda, sum_config(run.budget));
  json out = union_summary(u);
  out["depth1"] = n1;
  out["depth2"] = n2;
  const auto resolutions = default_resolutions();
  out["grid_dimension"] = grid_box_dimension(u.intervals(), resolutions).value;
  const auto lo = opt_real(p, "target_lo"), hi = opt_real(p, "target_hi");
  if (lo.has_value() != hi.has_value()) invalid("target_lo and target_hi go together");
  if (lo) {
    out["target"] = json::array({*lo, *hi});
    out["contains"] = contains_interval(u, {*lo, *hi}, p["margin"].get<double>());
  }
  run.csv([&](std::ostream& os) {
    os << "lo,hi\n";
    char buf[64];
    for (const auto& i : u.intervals()) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", i.lo, i.hi);
      os << buf;
    }
  });
  return out;
}

json run_hall(Run& run) {
  const auto c4 = gauss_cantor(4);
  const int depth = run.p["depth"].get<int>();
  const auto u = cover_sum(c4, c4, depth, depth, SetOp::Sum, 1.0, sum_config(run.budget));
  const Interval target{std::numbers::sqrt2 - 1, 4 * (std::numbers::sqrt2 - 1)};
  json out = union_summary(u);
  out["depth"] = depth;
  out["target"] = interval_json(target);
  out["contains"] = contains_interval(u, target, run.p["margin"].get<double>());
  out["endpoint_error"] = u.empty() ? INFINITY
                                    : std::max(std::abs(u.hull().lo - target.lo), std::abs(u.hull().hi - target.hi));
  return out;
}

json run_marstrand(Run& run) {
  const auto& p = run.p;
  const auto k1 = resolve_set(p["set1"]), k2 = resolve_set(p["set2"]);
  const auto lambdas = log_uniform_grid(p["lambda_lo"].get<double>(), p["lambda_hi"].get<double>(),
                                        p["lambdas"].get<std::size_t>());
  const auto resolutions = p["resolutions"].is_null() ? default_resolutions() : reals(p["resolutions"]);
  ScanConfig config{sum_config(run.budget), run.jobs};
  const auto scan = marstrand_scan(k1, k2, lambdas, p["depth"].get<int>(), resolutions, config);
  run.csv([&](std::ostream& os) { write_scan_csv(os, scan); });
  return scan_summary(scan, p["theta"].get<double>());
}

json run_intersect(Run& run) {
  const auto& p = run.p;
  const auto k1 = resolve_set(p["set1"]), k2 = resolve_set(p["set2"]);
  const int depth = p["depth"].get<int>();
  const int points = p["points"].get<int>();
  if (points > 0) {
    const double lo = p["t_lo"].get<double>(), hi = p["t_hi"].get<double>();
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) grid.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
    const auto scan = difference_scan(k1, k2, grid, depth, cover_config(run.budget));
    run.csv([&](std::ostream& os) { write_difference_scan_csv(os, scan); });
    std::size_t certified = 0;
    for (const auto& pt : scan.points) certified += pt.status == ScanPoint::Status::Certified;
    return {{"points", points}, {"overlap_fraction", scan.overlap_fraction()}, {"certified", certified}};
  }
  const double t = p["t"].get<double>();
  const auto r = intersect_test(k1, k2, t, depth, cover_config(run.budget));
  const auto g = gap_lemma_test(k1, k2, t);
  return {{"status", r.disjoint() ? "disjoint-at-depth" : "overlap-at-depth"},
          {"depth", r.depth},
          {"gap_lemma", g == GapLemmaResult::CertifiedIntersection ? "certified-intersection" : "no-certificate"}};
}

json run_recur(Run& run) {
  const auto& p = run.p;
  if (!p["verify"].is_null()) {
    const auto path = p["verify"].get<std::string>();
    const auto check = verify_certificate(load_config(path));
    return {{"valid", check.valid}, {"cells_checked", check.cells_checked}, {"message", check.message}};
  }
  const auto k1 = resolve_set(p["set1"]), k2 = resolve_set(p["set2"]);
  RecurrenceConfig config;
  config.ns = p["ns"].get<int>();
  config.nu = p["nu"].get<int>();
  config.s_lo = p["s_lo"].get<double>();
  config.s_hi = p["s_hi"].get<double>();
  config.u_lo = opt_real(p, "u_lo");
  config.u_hi = opt_real(p, "u_hi");
  config.margin = p["margin"].get<int>();
  config.jobs = run.jobs;
  if (run.budget) config.cell_budget = *run.budget;
  const auto r = recurrent_compact_search(k1, k2, config);
  json out = {{"status", r.status == RecurrenceResult::Status::Certificate ? "certificate" : "not-found"},
              {"sweeps", r.sweeps},
              {"sensitivity", r.sensitivity},
              {"perturbation_radius", r.perturbation_radius},
              {"member_cells", r.region ? r.region->member_count() : 0}};
  if (const auto t = opt_real(p, "t")) out["certifies_t"] = r.region && certifies_translation(*r.region, *t);
  if (r.region && !p["certificate"].is_null()) {
    const auto path = p["certificate"].get<std::string>();
    auto os = open_output(path);
    os << certificate_to_json(k1, k2, r).dump() << '\n';
    run.artifacts.push_back(path);
  }
  return out;
}

json run_dstable(Run& run) {
  const auto& p = run.p;
  const auto k1 = resolve_set(p["set1"]), k2 = resolve_set(p["set2"]);
  DStableConfig config;
  config.perturbations = p["perturbations"].get<int>();
  config.radius = p["radius"].get<double>();
  config.depth = p["depth"].get<int>();
  config.seed = p["seed"].get<std::uint64_t>();
  config.cover = cover_config(run.budget);
  const auto r = d_stable_probe(k1, k2, p["t"].get<double>(), p["d"].get<double>(), config);
  return {{"fraction", r.fraction}, {"estimates", r.estimates}};
}

json run_density(Run& run) {
  const auto& p = run.p;
  const auto k1 = resolve_set(p["set1"]), k2 = resolve_set(p["set2"]);
  std::vector<double> deltas;
  if (p["deltas"].is_null()) {
    for (int k = 2; k <= 10; ++k) deltas.push_back(std::ldexp(1.0, -k));
  } else {
    deltas = reals(p["deltas"]);
  }
  const auto profile =
      tangency_density_experiment(k1, k2, p["t0"].get<double>(), deltas, p["depth"].get<int>(), p["side"].get<int>());
  run.csv([&](std::ostream& os) { write_density_csv(os, profile); });
  return {{"t0", profile.t0}, {"side", profile.side}, {"deltas", profile.deltas}, {"ratios", profile.ratios}};
}

json spectrum_json(const SpectrumValue& v) {
  json out = {{"value", v.value}, {"witness", v.witness}, {"window", v.window}, {"direct", v.direct}, {"tail", v.tail}};
  if (v.exact) out["exact"] = v.exact->str();
  return out;
}

json run_spectrum(Run& run) {
  const auto& p = run.p;
  if (!p["period"].is_null()) {
    const auto v = k_alpha(CFSequence::parse_period(p["period"].get<std::string>()), p["window"].get<int>());
    run.csv([&](std::ostream& os) { write_spectrum_csv(os, std::span(&v, 1)); });
    return spectrum_json(v);
  }
  LagrangeConfig config;
  config.jobs = run.jobs;
  if (run.budget) config.budget = *run.budget;
  const auto values = lagrange_sample(p["max_period"].get<int>(), p["digit_bound"].get<int>(), config);
  run.csv([&](std::ostream& os) { write_spectrum_csv(os, values); });
  json list = json::array();
  for (const auto& v : values) list.push_back(spectrum_json(v));
  return {{"count", values.size()}, {"minimum", values.empty() ? json(nullptr) : json(values.front().value)},
          {"values", list}};
}

json run_halfline(Run& run) {
  const auto targets = reals(run.p["targets"]);
  json list = json::array();
  for (const auto& h : hall_halfline_probe(targets, run.p["depth"].get<int>())) {
    list.push_back({{"target", h.target},
                    {"marker", h.marker},
                    {"witness_period", h.witness.period()},
                    {"value", h.value},
                    {"hit_distance", h.hit_distance}});
  }
  return {{"hits", list}};
}

json run_horseshoe(Run& run) {
  const double expansion = run.p["expansion"].get<double>();
  const bool solve = run.p["critical"].get<bool>();
  const double contraction = solve ? critical_contraction(expansion) : run.p["contraction"].get<double>();
  json out = to_json(horseshoe_cantor_sets({contraction, expansion}));
  out["contraction"] = contraction;
  out["expansion"] = expansion;
  out["solved"] = solve;
  return out;
}

json run_catmap(Run& run) {
  const auto m = run.p["matrix"];
  if (m.size() != 4) invalid("matrix needs four entries a,b,c,d");
  IntMatrix matrix{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double v = m[i].get<double>();
    if (v != std::floor(v)) invalid("matrix entries must be integers");
    matrix[i] = static_cast<std::int64_t>(v);
  }
  const auto report = run.budget ? cat_map_check(run.p["periods"].get<int>(), matrix, static_cast<std::int64_t>(*run.budget))
                                 : cat_map_check(run.p["periods"].get<int>(), matrix);
  return to_json(report);
}

json run_stdmap(Run& run) {
  const auto& p = run.p;
  LyapunovConfig config;
  config.orbits = p["orbits"].get<int>();
  config.iterates = p["iterates"].get<int>();
  config.seed = p["seed"].get<std::uint64_t>();
  config.positive_threshold = p["threshold"].get<double>();
  config.jobs = run.jobs;
  const auto r = standard_family_lyapunov(p["lambda"].get<double>(), config);
  run.csv([&](std::ostream& os) { write_lyapunov_csv(os, r); });
  return to_json(r);
}

}  // namespace

const std::vector<CommandSpec>& command_specs() {
  static const std::vector<CommandSpec> specs = build_specs();
  return specs;
}

const CommandSpec& command_spec(const std::string& name) {
  for (const auto& s : command_specs()) {
    if (s.name == name) return s;
  }
  invalid("unknown command '" + name + "'");
}

json parse_flag_value(const ParamSpec& spec, const std::string& text) {
  switch (spec.type) {
    case ParamType::Int: {
      std::int64_t v = 0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || end != text.data() + text.size()) {
        invalid("parameter '" + spec.key + "' expects an integer, got '" + text + "'");
      }
      return v;
    }
    case ParamType::Real: return parse_real(text, spec.key);
    case ParamType::Bool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      invalid("parameter '" + spec.key + "' expects true or false, got '" + text + "'");
    case ParamType::RealList: {
      json out = json::array();
      std::size_t start = 0;
      while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back(parse_real(item, spec.key));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return out;
    }
    case ParamType::String:
    case ParamType::Set: return text;
  }
  return text;
}

json resolve_params(const CommandSpec& spec, const json& config, const json& flags) {
  json params = json::object();
  for (const auto& p : spec.params) params[p.key] = p.fallback;
  for (const json* layer : {&config, &flags}) {
    if (layer->is_null()) continue;
    if (!layer->is_object()) invalid("parameters must form a JSON object");
    for (const auto& [key, value] : layer->items()) {
      if (key == "command") continue;
      auto it = std::find_if(spec.params.begin(), spec.params.end(), [&](const ParamSpec& p) { return p.key == key; });
      if (it == spec.params.end()) invalid("command '" + spec.name + "' has no parameter '" + key + "'");
      params[key] = check_type(*it, value);
    }
  }
  if (params.contains("budget") && !params["budget"].is_null() && params["budget"].get<std::int64_t>() <= 0) {
    invalid("budget must be positive");
  }
  return params;
}

json run_command(const std::string& command, const json& params, const RunContext& context) {
  const auto start = std::chrono::steady_clock::now();
  Run run{params, context.budget, std::max(1u, context.jobs)};
  if (!params["budget"].is_null()) run.budget = params["budget"].get<std::size_t>();
  json outputs;
  try {
    if (command == "dim") outputs = run_dim(run);
    else if (command == "thickness") outputs = run_thickness(run);
    else if (command == "sum") outputs = run_setop(run, SetOp::Sum);
    else if (command == "diff") outputs = run_setop(run, SetOp::Difference);
    else if (command == "hall") outputs = run_hall(run);
    else if (command == "marstrand") outputs = run_marstrand(run);
    else if (command == "intersect") outputs = run_intersect(run);
    else if (command == "recur") outputs = run_recur(run);
    else if (command == "dstable") outputs = run_dstable(run);
    else if (command == "density") outputs = run_density(run);
    else if (command == "spectrum") outputs = run_spectrum(run);
    else if (command == "halfline") outputs = run_halfline(run);
    else if (command == "horseshoe") outputs = run_horseshoe(run);
    else if (command == "catmap") outputs = run_catmap(run);
    else if (command == "stdmap") outputs = run_stdmap(run);
    else invalid("unknown command '" + command + "'");
  } catch (const json::exception& e) {
    invalid(e.what());
  } catch (const std::bad_alloc&) {
    throw Error(ErrorKind::BudgetExceeded, "out of memory");
  }
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {{"schema", 1},
          {"command", command},
          {"inputs", params},
          {"inputs_digest", inputs_digest(params)},
          {"outputs", outputs},
          {"artifacts", run.artifacts},
          {"runtime_seconds", runtime}};
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IOError, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid("'" + path.string() + "': " + e.what());
  }
}

int exit_code(ErrorKind kind) noexcept { return kind == ErrorKind::BudgetExceeded ? 2 : 3; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string inputs_digest(const json& params) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(params.dump())));
  return buf;
}

json catalog() {
  json out = json::array();
  for (const auto& e : list_builtin_sets()) {
    const auto set = builtin_set(e.name == "gauss:N" ? "gauss:2" : e.name);
    out.push_back({{"name", e.name}, {"description", e.description}, {"pieces", set.piece_count()}});
  }
  return out;
}

std::optional<std::size_t> budget_from_env() {
  const char* raw = std::getenv("CANTORLAB_BUDGET");
  if (!raw || !*raw) return std::nullopt;
  std::size_t v = 0;
  const std::string text(raw);
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || v == 0) {
    invalid("CANTORLAB_BUDGET must be a positive integer, got '" + text + "'");
  }
  return v;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Experiments on regular Cantor sets, their sums and intersections, and related dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned jobs = default_jobs();
  std::string out_path;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "also write the JSON record to this file");

  std::string run_path;
  auto* run_cmd = app.add_subcommand("run", "run an experiment config file");
  run_cmd->add_option("config", run_path, "config file with a 'command' field")->required();
  auto* list_cmd = app.add_subcommand("list", "list the built-in sets");

  struct Bound {
    CLI::App* app;
    const CommandSpec* spec;
    std::vector<std::pair<const ParamSpec*, std::string>> values;
    std::string config;
  };
  std::vector<Bound> bound;
  bound.reserve(command_specs().size());
  for (const auto& spec : command_specs()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    Bound& b = bound.emplace_back(Bound{sub, &spec, {}, {}});
    b.values.reserve(spec.params.size());
    sub->add_option("--config", b.config, "JSON config; flags override it");
    for (const auto& p : spec.params) {
      auto& slot = b.values.emplace_back(&p, std::string{});
      std::string flag = "--" + p.key;
      std::replace(flag.begin() + 2, flag.end(), '_', '-');
      std::string help = p.help;
      if (!p.fallback.is_null()) help += " [default: " + (p.fallback.is_string() ? p.fallback.get<std::string>() : p.fallback.dump()) + "]";
      sub->add_option(flag, slot.second, help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 3;
  }

  try {
    RunContext context{jobs, budget_from_env()};
    json record;
    if (list_cmd->parsed()) {
      out << json({{"schema", 1}, {"command", "list"}, {"sets", catalog()}}).dump(2) << '\n';
      return 0;
    }
    if (run_cmd->parsed()) {
      json config = load_config(run_path);
      if (!config.is_object() || !config.contains("command") || !config["command"].is_string()) {
        invalid("'" + run_path + "' needs a string 'command' field");
      }
      const auto command = config["command"].get<std::string>();
      if (config.contains("jobs")) {
        context.jobs = config["jobs"].get<unsigned>();
        config.erase("jobs");
      }
      record = run_command(command, resolve_params(command_spec(command), config, nullptr), context);
    } else {
      for (auto& b : bound) {
        if (!b.app->parsed()) continue;
        json config = b.config.empty() ? json(nullptr) : load_config(b.config);
        if (config.is_object() && config.contains("jobs")) {
          if (app.count("--jobs") == 0) context.jobs = config["jobs"].get<unsigned>();
          config.erase("jobs");
        }
        if (config.is_object() && config.contains("command") && config["command"] != b.spec->name) {
          invalid("config is for '" + config["command"].dump() + "', not '" + b.spec->name + "'");
        }
        json flags = json::object();
        for (const auto& [param, text] : b.values) {
          std::string flag = "--" + param->key;
          std::replace(flag.begin() + 2, flag.end(), '_', '-');
          if (b.app->count(flag) > 0) flags[param->key] = parse_flag_value(*param, text);
        }
        record = run_command(b.spec->name, resolve_params(*b.spec, config, flags), context);
      }
    }
    const auto text = record.dump(2);
    out << text << '\n';
    if (!out_path.empty()) {
      auto os = open_output(out_path);
      os << text << '\n';
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    err << "error: ConfigInvalid: " << e.what() << '\n';
    return 3;
  } catch (const std::bad_alloc&) {
    err << "error: BudgetExceeded: out of memory\n";
    return 2;
  }
}

}  // namespace cantorlab::cli
