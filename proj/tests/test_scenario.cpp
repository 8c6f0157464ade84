#include "doctest.h"

#include "cnls/field_io.hpp"
#include "cnls/scenario.hpp"

#include <cmath>
#include <filesystem>

using namespace cnls;

TEST_CASE("bundled configs parse") {
  const auto names = bundled_scenario_names();
  CHECK(names.size() >= 9);
  for (const Scenario& s : bundled_scenarios()) {
    CHECK_FALSE(s.name.empty());
    CHECK_NOTHROW(build_system(s.system));
  }
}

TEST_CASE("config errors carry a location") {
  try {
    parse_scenarios("{\n  \"name\": \"x\",\n  \"system\": {\"N\": 1,, }\n}");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const std::string ok = R"({"name": "x", "task": "classify", "system": {"N": 1, "lambda": [1, 1],
      "couplings": [{"i": 1, "j": 2, "value": 0.2}]}})";
  CHECK_NOTHROW(parse_scenarios(ok));
  const std::string typo = R"({"name": "x", "system": {"N": 1, "lambda": [1, 1],
      "couplings": [{"i": 1, "j": 2, "value": 0.2}]}, "gird": {}})";
  CHECK_THROWS_AS(parse_scenarios(typo), ConfigError);
  const std::string bad_task = R"({"name": "x", "task": "solve", "system": {"N": 1, "lambda": [1, 1],
      "couplings": [{"i": 1, "j": 2, "value": 0.2}]}})";
  CHECK_THROWS_AS(parse_scenarios(bad_task), ConfigError);
}

TEST_CASE("tolerance overrides") {
  Scenario s = bundled_scenarios().front();
  apply_tolerance(s, "tol_g", 1e-7);
  CHECK(s.analysis.minimize.tol_g == 1e-7);
  apply_tolerance(s, "near_equal", 0.2);
  CHECK(s.thresholds.near_equal == 0.2);
  CHECK_THROWS_AS(apply_tolerance(s, "nope", 1.0), ConfigError);
}

TEST_CASE("classify report and exit codes") {
  const std::string text = R"({"seed": 5, "scenarios": [
      {"name": "pair", "task": "predict", "system": {"N": 1, "lambda": [1, 1],
       "couplings": [{"i": 1, "j": 2, "value": -0.4}]}}]})";
  const ScenarioFile f = parse_scenarios(text);
  REQUIRE(f.seed);
  CHECK(*f.seed == 5);
  RunSettings rs;
  rs.seed = *f.seed;
  const BatchReport r = run_batch(f.scenarios, rs);
  CHECK(r.json["schema_version"] == kReportSchemaVersion);
  const auto& e = r.json["scenarios"][0];
  CHECK(e["classification"]["class"] == "PurelyRepulsive");
  CHECK(e["prediction"]["verdict"] == "NotExists");
  CHECK(r.exit_code == 0);
}

TEST_CASE("field dumps round-trip exactly") {
  const Grid g = Grid::make(2, 3.0, 0.5);
  FieldVector u(g, 2);
  for (int j = 0; j < 2; ++j)
    for (Eigen::Index p = 0; p < u[j].size(); ++p) u[j][p] = std::sin(0.37 * p + j) / 3.0;
  const std::string path = (std::filesystem::temp_directory_path() / "cnls_roundtrip.bin").string();
  write_fields(path, u);
  const FieldVector v = read_fields(path);
  std::filesystem::remove(path);
  CHECK(v.grid == g);
  REQUIRE(v.k() == 2);
  for (int j = 0; j < 2; ++j) CHECK((v[j] - u[j]).cwiseAbs().maxCoeff() == 0.0);
}
