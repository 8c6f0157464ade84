// Scenario configs (JSON), the task pipelines behind the command line tool
// and the reports they produce.
#pragma once

#include "cnls/analysis.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnls {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

const std::vector<std::string>& scenario_tasks();

struct Scenario {
  std::string name;
  std::string task = "full-report";
  SystemConfig system;
  AnalysisOptions analysis;  // grid extent and spacing, minimizer tolerances
  std::optional<ConstraintPartition> partition;
  std::vector<double> centers;
  std::vector<double> R_grid;               // sweep separations
  std::vector<double> decay_R;              // decay sweep separations
  std::vector<std::pair<int, int>> pairs;   // decay pairs (zero based); empty: all
  PredictThresholds thresholds;
  std::optional<DeltaScaling> scaling;
  MorseOptions morse;
  bool dump_fields = false;
  nlohmann::json echo;  // the scenario object as parsed
};

struct ScenarioFile {
  std::vector<Scenario> scenarios;
  std::optional<std::uint64_t> seed;
};

// Accepts a single scenario object or {"seed": ..., "scenarios": [...]}.
// Errors name the line/column (syntax) or the key path (schema).
ScenarioFile parse_scenarios(const std::string& text, const std::string& source = "<config>");
ScenarioFile load_scenarios(const std::string& path);
Scenario parse_scenario(const nlohmann::json& j, const std::string& where = "scenario");

// Tolerance overrides, "key=value": tol_g, tol_E, tol_split, max_iter,
// zero_tol, residual_tol, beta_small, beta_large, near_equal, dominance,
// delta_small.
void apply_tolerance(Scenario& s, const std::string& key, double value);

struct RunSettings {
  std::uint64_t seed = 12345;
  std::string out_dir;  // field dumps go here when requested; empty: none
};

struct ScenarioReport {
  nlohmann::json json;
  std::map<std::string, std::string> csv;  // sidecar file name -> contents
  bool indeterminate = false;
  bool failed = false;
};

ScenarioReport run_scenario(const Scenario& s, const RunSettings& settings = {});

// Runs every scenario (up to `jobs` at once) and assembles the report
// {schema_version, seed, scenarios[]}.  Timings sit under "timings" in each
// entry and are the only non-reproducible numbers.
struct BatchReport {
  nlohmann::json json;
  std::map<std::string, std::string> csv;
  int exit_code = 0;  // 0 ok, 2 some prediction indeterminate, 1 some scenario failed
};

BatchReport run_batch(const std::vector<Scenario>& scenarios, const RunSettings& settings, int jobs = 1);

// Configs shipped in scenarios/.
std::vector<std::string> bundled_scenario_names();
std::vector<Scenario> bundled_scenarios(const std::string& dir = CNLS_SCENARIO_DIR);

}  // namespace cnls
