#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "parcap/error.hpp"
#include "parcap/harness.hpp"
#include "support.hpp"

using namespace parcap;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

Json capacity_config() {
  return Json::parse(R"({
    "schema": "parcap.experiment/1",
    "name": "interval",
    "experiment": "capacity",
    "params": {"N": 1, "q": 4},
    "set": {"kind": "interval", "lo": -0.25, "hi": 0.25},
    "capacity": {"h": 0.02},
    "refine": false
  })");
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("parcap_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config: strict schema") {
  CHECK_NOTHROW(ExperimentConfig::from_json(capacity_config()));

  auto j = capacity_config();
  j["colour"] = "blue";
  CHECK(code_of([&] { ExperimentConfig::from_json(j); }) == ErrorCode::SchemaMismatch);

  j = capacity_config();
  j["schema"] = "parcap.experiment/0";
  CHECK(code_of([&] { ExperimentConfig::from_json(j); }) == ErrorCode::SchemaMismatch);

  j = capacity_config();
  j["params"]["q"] = "four";
  CHECK(code_of([&] { ExperimentConfig::from_json(j); }) == ErrorCode::SchemaMismatch);

  j = capacity_config();
  j["experiment"] = "teleport";
  CHECK(code_of([&] { ExperimentConfig::from_json(j); }) == ErrorCode::SchemaMismatch);

  j = capacity_config();
  j["grid"] = {{"geometry", "torus"}};
  CHECK(code_of([&] { ExperimentConfig::from_json(j); }) == ErrorCode::SchemaMismatch);

  j = capacity_config();
  j["set"] = {{"kind", "ball"}, {"radius", 1.0}, {"centre", {0.0}}};
  CHECK(code_of([&] { ExperimentConfig::from_json(j).closed_set(); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("config: round trip through JSON") {
  auto c = ExperimentConfig::from_json(capacity_config());
  c.maximal.eps_list = {0.2, 0.1};
  c.tolerances.fields["value"] = 1e-3;
  auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.maximal.eps_list == std::vector<double>{0.2, 0.1});
  CHECK(back.tolerances.for_field("value") == 1e-3);
  CHECK(back.tolerances.for_field("other") == back.tolerances.default_rel);
}

TEST_CASE("config: validation of probes and regimes") {
  auto j = capacity_config();
  j["experiment"] = "solve";
  j["grid"] = {{"geometry", "line"}, {"lo", -1.0}, {"hi", 1.0}, {"h", 0.05}, {"T", 0.1}};
  j["probes"] = {{"x", {0.0, 3.0}}, {"t", {0.1}}};
  CHECK(code_of([&] { ExperimentConfig::from_json(j).validate(); }) == ErrorCode::InvalidArgument);
  j["probes"] = {{"x", {0.0}}, {"t", {0.5}}};
  CHECK(code_of([&] { ExperimentConfig::from_json(j).validate(); }) == ErrorCode::InvalidArgument);

  auto p = capacity_config();
  p["experiment"] = "profile";
  p["params"]["q"] = 4.0;
  p["profile"] = {{"kind", "radial"}};
  CHECK(code_of([&] { ExperimentConfig::from_json(p).validate(); }) == ErrorCode::NoProfileRegime);

  auto a = capacity_config();
  a["experiment"] = "appendix";
  a["appendix"] = {{"lemma", "integral"}, {"sweep", "/nonexistent/sweep.json"}};
  CHECK(code_of([&] { ExperimentConfig::from_json(a).validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("set descriptions") {
  auto u = set_from_json(Json::parse(R"({"kind": "union", "members": [
      {"kind": "point", "center": 2.0}, {"kind": "interval", "lo": -1, "hi": 0}]})"),
                         1);
  CHECK(u.dist({1.0}) == doctest::Approx(1.0));
  CHECK(u.contains({2.0}, 1e-12));
  auto b = set_from_json(Json::parse(R"({"kind": "ball", "center": [1, 0], "radius": 0.5})"), 2);
  CHECK(b.dist({0.0, 0.0}) == doctest::Approx(0.5));
  CHECK(code_of([] { set_from_json(Json::parse(R"({"kind": "ball", "center": [1, 0, 0], "radius": 1})"), 2); }) ==
        ErrorCode::SchemaMismatch);
  CHECK(code_of([] { set_from_json(Json::parse(R"({"kind": "blob"})"), 1); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("golden comparison names the offending field") {
  auto golden = Json::parse(R"({"value": 1.0, "nested": {"ratio": 2.0, "rows": [1, 2]}, "name": "x"})");
  GoldenTolerances tol;
  CHECK(golden_compare(golden, golden, tol).pass);

  auto run = golden;
  run["nested"]["ratio"] = 2.1;
  auto r = golden_compare(run, golden, tol);
  CHECK_FALSE(r.pass);
  REQUIRE(r.differences.size() == 1);
  CHECK(r.differences[0].rfind("nested.ratio:", 0) == 0);

  tol.fields["ratio"] = 0.1;
  CHECK(golden_compare(run, golden, tol).pass);

  run = golden;
  run["nested"]["rows"] = Json::array({1, 2, 3});
  r = golden_compare(run, golden, tol);
  CHECK_FALSE(r.pass);
  CHECK(r.differences[0].find("schema mismatch") != std::string::npos);

  run = golden;
  run.erase("name");
  run["extra"] = true;
  r = golden_compare(run, golden, tol);
  CHECK(r.differences.size() == 2);

  run = golden;
  run["value"] = "1.0";
  CHECK(golden_compare(run, golden, tol).differences[0].find("type") != std::string::npos);
}

TEST_CASE("capacity experiment: deterministic summary and golden round trip") {
  auto dir = scratch_dir("capacity");
  auto j = capacity_config();
  j["output"] = {{"dir", dir.string()}};
  auto cfg = ExperimentConfig::from_json(j);
  auto a = run_experiment(cfg);
  auto b = run_experiment(cfg);
  CHECK(a.pass);
  CHECK(a.summary.dump() == b.summary.dump());
  CHECK(a.summary.at("mass_ratio").get<double>() == doctest::Approx(1.0).epsilon(0.05));
  const auto summary = (dir / "summary.json").string();
  REQUIRE(fs::exists(summary));
  CHECK(golden_compare_files(summary, summary, cfg.tolerances).pass);
  fs::remove_all(dir);
}

TEST_CASE("solve and profile experiments write CSV and SVG files") {
  auto dir = scratch_dir("solve");
  auto j = Json::parse(R"({
    "schema": "parcap.experiment/1",
    "experiment": "solve",
    "params": {"N": 1, "q": 2},
    "grid": {"geometry": "line", "boundary": "neumann", "lo": -1, "hi": 1, "h": 0.05, "T": 0.2},
    "probes": {"x": [0.0], "t": [0.1, 0.2]},
    "data": {"kind": "flat", "value": 1e8}
  })");
  j["output"] = {{"dir", dir.string()}};
  auto res = run_experiment(ExperimentConfig::from_json(j));
  CHECK(res.pass);
  CHECK(res.summary.at("flat_relative_error").get<double>() < 1e-3);
  std::ifstream probes(dir / "probes.csv");
  std::string header;
  std::getline(probes, header);
  CHECK(header == "x,t,u,bound,slack");
  std::ifstream svg(dir / "snapshots.svg");
  std::stringstream ss;
  ss << svg.rdbuf();
  CHECK(ss.str().rfind("<svg", 0) == 0);
  CHECK(ss.str().find("</svg>") != std::string::npos);

  auto p = Json::parse(R"({
    "schema": "parcap.experiment/1",
    "experiment": "profile",
    "params": {"N": 1, "q": 2},
    "profile": {"kind": "radial"}
  })");
  auto pr = run_experiment(ExperimentConfig::from_json(p));
  CHECK(pr.pass);
  CHECK(pr.summary.at("f0").get<double>() > 0.0);
  CHECK(pr.files.empty());
  fs::remove_all(dir);
}

TEST_CASE("svg plot: log axis skips nonpositive values") {
  PlotSeries s{"a", {0.0, 1.0, 2.0}, {1.0, 0.0, 100.0}};
  auto lin = svg_line_plot("t", "x", "y", {s});
  auto log = svg_line_plot("t", "x", "y", {s}, true);
  CHECK(lin.find("polyline") != std::string::npos);
  CHECK(log.find("(log10)") != std::string::npos);
  CHECK(log.find("1e2") != std::string::npos);
  CHECK(svg_line_plot("empty", "x", "y", {}).find("</svg>") != std::string::npos);
}
