// cnls: scenario runner.
//
//   cnls <task> --config FILE [--out DIR] [--jobs N] [--seed U64] [--tolerance KEY=VALUE ...]
//
// <task> is one of classify, scalar, decay, ground-state, sweep, predict,
// full-report (overrides the task in the config) or run (keeps it).
// Exit codes: 0 success, 2 some prediction indeterminate, 1 error.

#include "cnls/scenario.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Coupled cubic Schrodinger systems: classification, ground states, reports"};
  app.require_subcommand(1);

  std::string config, out = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> tolerances;
  bool quiet = false;

  std::vector<std::string> tasks = cnls::scenario_tasks();
  tasks.push_back("run");
  for (const auto& t : tasks) {
    CLI::App* sub = app.add_subcommand(t, t == "run" ? "run each scenario's own task" : "run the " + t + " task");
    sub->add_option("--config", config, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--jobs", jobs, "scenarios run in parallel")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", seed, "random seed (default: the config's, else 12345)");
    sub->add_option("--tolerance", tolerances, "override, KEY=VALUE (repeatable)");
    sub->add_flag("--quiet", quiet, "no summary on stdout");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string task = app.get_subcommands().front()->get_name();

  try {
    cnls::ScenarioFile file = cnls::load_scenarios(config);
    for (auto& s : file.scenarios) {
      if (task != "run") s.task = task;
      for (const auto& kv : tolerances) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw cnls::ConfigError("--tolerance expects KEY=VALUE, got '" + kv + "'");
        double v = 0.0;
        try {
          v = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
          throw cnls::ConfigError("--tolerance " + kv + ": value is not a number");
        }
        cnls::apply_tolerance(s, kv.substr(0, eq), v);
      }
    }
    cnls::RunSettings rs;
    rs.seed = seed ? *seed : file.seed.value_or(12345);
    rs.out_dir = out;
    fs::create_directories(out);

    const cnls::BatchReport rep = cnls::run_batch(file.scenarios, rs, jobs);
    {
      std::ofstream f(fs::path(out) / "report.json");
      f << rep.json.dump(2) << "\n";
      if (!f) throw std::runtime_error("cannot write report.json in " + out);
    }
    for (const auto& [name, text] : rep.csv) {
      std::ofstream f(fs::path(out) / name);
      f << text;
    }
    if (!quiet) {
      for (const auto& s : rep.json["scenarios"]) {
        std::cout << s["name"].get<std::string>() << " [" << s["task"].get<std::string>() << "]";
        if (s.contains("error")) std::cout << " error in " << s["error"]["module"].get<std::string>() << ": "
                                           << s["error"]["message"].get<std::string>();
        if (s.contains("classification")) std::cout << " class " << s["classification"]["class"].get<std::string>();
        if (s.contains("prediction")) std::cout << " prediction " << s["prediction"]["verdict"].get<std::string>();
        if (s.contains("ground_state"))
          std::cout << " energy " << s["ground_state"]["energy"].get<double>() << " "
                    << s["ground_state"]["attainment"]["diagnosis"].get<std::string>();
        std::cout << "\n";
      }
      std::cout << "report: " << (fs::path(out) / "report.json").string() << "\n";
    }
    return rep.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "cnls: " << e.what() << "\n";
    return 1;
  }
}
