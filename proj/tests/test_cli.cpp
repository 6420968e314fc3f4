#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cantorlab/builtins.hpp"
#include "cantorlab/cli.hpp"
#include "test_support.hpp"

using namespace cantorlab;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
  json record() const { return json::parse(out); }
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cantorlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "cantorlab_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("dim command reports the Moran root") {
  auto r = invoke({"dim", "--set", "ternary", "--method", "moran", "--tol", "1e-9"});
  REQUIRE(r.code == 0);
  auto rec = r.record();
  CHECK(rec["schema"] == 1);
  CHECK(rec["command"] == "dim");
  CHECK(rec["outputs"]["value"].get<double>() == doctest::Approx(0.6309297535714574).epsilon(1e-9));
  CHECK(rec["inputs_digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("hall command") {
  auto r = invoke({"hall", "--depth", "8", "--margin", "1e-3"});
  REQUIRE(r.code == 0);
  auto out = r.record()["outputs"];
  CHECK(out["contains"] == true);
  CHECK(out["target"][0].get<double>() == doctest::Approx(0.41421356237309515));
  CHECK(out["target"][1].get<double>() == doctest::Approx(1.6568542494923806));
}

TEST_CASE("identical inputs give identical records apart from the runtime") {
  auto strip = [](json rec) {
    rec.erase("runtime_seconds");
    return rec.dump();
  };
  auto a = invoke({"stdmap", "--orbits", "8", "--iterates", "500", "--seed", "4", "--jobs", "1"});
  auto b = invoke({"--jobs", "4", "stdmap", "--orbits", "8", "--iterates", "500", "--seed", "4"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(strip(a.record()) == strip(b.record()));
  auto c = invoke({"stdmap", "--orbits", "8", "--iterates", "500", "--seed", "5"});
  CHECK(c.record()["inputs_digest"] != a.record()["inputs_digest"]);
}

TEST_CASE("config files and flag precedence") {
  const auto config = scratch("dim.json");
  write_file(config, R"({"command": "dim", "set": "middle-fifth", "method": "box", "depth_max": 8})");
  auto from_file = invoke({"run", config.string()});
  REQUIRE(from_file.code == 0);
  auto rec = from_file.record();
  CHECK(rec["inputs"]["set"] == "middle-fifth");
  CHECK(rec["inputs"]["depth_max"] == 8);
  CHECK(rec["outputs"]["method"] == "box-regression");

  auto overridden = invoke({"dim", "--config", config.string(), "--method", "moran"});
  REQUIRE(overridden.code == 0);
  CHECK(overridden.record()["inputs"]["method"] == "moran");
  CHECK(overridden.record()["inputs"]["set"] == "middle-fifth");
  CHECK(overridden.record()["outputs"]["value"].get<double>() ==
        doctest::Approx(std::log(2.0) / std::log(2.5)).epsilon(1e-8));

  const auto inline_set = scratch("inline.json");
  write_file(inline_set, R"({"command": "thickness", "set": {"pieces": [["0", "1/3"], ["2/3", "1"]]}, "depth": 6})");
  auto t = invoke({"run", inline_set.string()});
  REQUIRE(t.code == 0);
  CHECK(t.record()["outputs"]["value"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("set files are loaded by path") {
  const auto set = scratch("fifth.json");
  write_file(set, R"({"pieces": [["0", "2/5"], ["3/5", "1"]]})");
  auto r = invoke({"dim", "--set", set.string()});
  REQUIRE(r.code == 0);
  CHECK(r.record()["outputs"]["value"].get<double>() == doctest::Approx(std::log(2.0) / std::log(2.5)).epsilon(1e-8));
}

TEST_CASE("exit codes") {
  auto missing = invoke({"run", "/nonexistent/cantorlab-config.json"});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("/nonexistent/cantorlab-config.json") != std::string::npos);

  CHECK(invoke({"dim", "--set", "/nonexistent/set.json"}).code == 3);
  CHECK(invoke({"dim", "--depth", "x"}).code == 3);
  CHECK(invoke({"dim", "--method", "guess"}).code == 3);
  CHECK(invoke({"nosuch"}).code == 3);

  const auto bad = scratch("bad.json");
  write_file(bad, R"({"command": "dim", "colour": 3})");
  auto unknown = invoke({"run", bad.string()});
  CHECK(unknown.code == 3);
  CHECK(unknown.err.find("colour") != std::string::npos);
  write_file(bad, "{not json");
  CHECK(invoke({"run", bad.string()}).code == 3);

  CHECK(invoke({"catmap", "--budget", "100"}).code == 2);
  CHECK(invoke({"spectrum", "--max-period", "20", "--digit-bound", "4", "--budget", "1000"}).code == 2);
  CHECK(invoke({"dim", "--budget", "0"}).code == 3);
}

TEST_CASE("environment budget override") {
  ::setenv("CANTORLAB_BUDGET", "100", 1);
  CHECK(invoke({"catmap"}).code == 2);
  // A budget parameter takes precedence over the environment.
  CHECK(invoke({"catmap", "--periods", "3", "--budget", "1000"}).code == 0);
  ::setenv("CANTORLAB_BUDGET", "many", 1);
  CHECK(invoke({"catmap", "--periods", "2"}).code == 3);
  ::unsetenv("CANTORLAB_BUDGET");
  CHECK(invoke({"catmap", "--periods", "2"}).code == 0);
}

TEST_CASE("CSV artifacts and the output file") {
  const auto csv = scratch("lyapunov.csv");
  const auto out = scratch("record.json");
  auto r = invoke({"--out", out.string(), "stdmap", "--orbits", "3", "--iterates", "100", "--csv", csv.string()});
  REQUIRE(r.code == 0);
  CHECK(r.record()["artifacts"][0] == csv.string());
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "orbit_id,exponent");
  std::ifstream rec(out);
  CHECK(json::parse(rec)["command"] == "stdmap");
}

TEST_CASE("certificates round trip through files") {
  const auto cert = scratch("cert.json");
  auto found = invoke({"recur", "--certificate", cert.string(), "--t", "0.2"});
  REQUIRE(found.code == 0);
  CHECK(found.record()["outputs"]["status"] == "certificate");
  CHECK(found.record()["outputs"]["certifies_t"] == true);
  auto checked = invoke({"recur", "--verify", cert.string()});
  REQUIRE(checked.code == 0);
  CHECK(checked.record()["outputs"]["valid"] == true);
  auto thin = invoke({"recur", "--set1", "thin", "--set2", "thin"});
  CHECK(thin.record()["outputs"]["status"] == "not-found");
}

TEST_CASE("every command runs with small parameters") {
  const std::vector<std::vector<std::string>> runs = {
      {"thickness", "--depth", "6"},
      {"sum", "--depth", "6", "--target-lo", "0", "--target-hi", "2"},
      {"diff", "--set1", "thin", "--set2", "thin", "--depth", "6"},
      {"marstrand", "--lambdas", "5", "--depth", "6"},
      {"intersect", "--t", "0.5"},
      {"intersect", "--points", "11", "--depth", "6"},
      {"dstable", "--perturbations", "3", "--depth", "8"},
      {"density", "--t0", "1", "--side", "-1", "--depth", "6"},
      {"spectrum", "--period", "1"},
      {"spectrum", "--max-period", "3", "--digit-bound", "2"},
      {"halfline", "--targets", "6,8.5", "--depth", "4"},
      {"horseshoe", "--critical", "true", "--expansion", "4"},
      {"catmap", "--periods", "4", "--matrix", "1,1,1,0"},
      {"stdmap", "--orbits", "4", "--iterates", "200"},
  };
  for (const auto& args : runs) {
    CAPTURE(args[0]);
    auto r = invoke(args);
    CHECK(r.code == 0);
    if (r.code == 0) CHECK(r.record()["outputs"].is_object());
  }
  auto sum = invoke({"sum", "--depth", "6", "--target-lo", "0", "--target-hi", "2"}).record();
  CHECK(sum["outputs"]["contains"] == true);
  auto horseshoe = invoke({"horseshoe", "--critical", "true", "--expansion", "4"}).record();
  CHECK(horseshoe["outputs"]["regime"] == "critical");
}

TEST_CASE("builtin catalog") {
  auto r = invoke({"list"});
  REQUIRE(r.code == 0);
  auto sets = r.record()["sets"];
  REQUIRE(sets.size() > 0);
  bool ternary = false;
  for (const auto& s : sets) {
    if (s["name"] == "ternary") {
      ternary = s["description"].get<std::string>().find("psi(x) = 3x - floor(3x)") != std::string::npos;
    }
  }
  CHECK(ternary);
  for (const auto& e : list_builtin_sets()) {
    if (e.name == "gauss:N") continue;
    CHECK_NOTHROW(builtin_set(e.name));
  }
}

TEST_CASE("fnv1a digest") {
  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(cli::fnv1a64("foobar") == 0x85944171f73967e8ull);
}
