#include "cnls/scenario.hpp"

#include "cnls/field_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cnls {

using nlohmann::json;

const std::vector<std::string>& scenario_tasks() {
  static const std::vector<std::string> t{"classify", "scalar", "decay", "ground-state",
                                          "sweep",    "predict", "full-report"};
  return t;
}

namespace {

// ---------------------------------------------------------------------------
// Parsing

[[noreturn]] void bad(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; }))
      bad(where + "." + k, "unknown key");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t a = 0; a < j.size(); ++a) v.push_back(number(j[a], where + "[" + std::to_string(a) + "]"));
  return v;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of rows");
  std::vector<std::vector<double>> m;
  for (std::size_t a = 0; a < j.size(); ++a) m.push_back(numbers(j[a], where + "[" + std::to_string(a) + "]"));
  return m;
}

Eigen::MatrixXd square(const json& j, int k, const std::string& where) {
  const auto m = matrix(j, where);
  if (static_cast<int>(m.size()) != k) bad(where, "needs " + std::to_string(k) + " rows");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(m[i].size()) != k) bad(where + "[" + std::to_string(i) + "]", "needs k entries");
    for (int c = i + 1; c < k; ++c) out(i, c) = out(c, i) = m[i][c];  // upper triangle is authoritative
  }
  return out;
}

int index1(const json& j, int k, const std::string& where) {
  const int i = integer(j, where);
  if (i < 1 || i > k) bad(where, "component index must be in 1.." + std::to_string(k));
  return i - 1;
}

std::vector<double> separations(const json& j, const std::string& where) {
  if (j.is_array()) return numbers(j, where);
  only_keys(j, where, {"from", "to", "points"});
  if (!j.contains("from") || !j.contains("to")) bad(where, "needs from and to");
  const int n = j.contains("points") ? integer(j["points"], where + ".points") : 32;
  if (n < 2) bad(where + ".points", "need at least two points");
  return linspace(number(j["from"], where + ".from"), number(j["to"], where + ".to"), n);
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t a = 0; a < std::min(byte, text.size()); ++a) {
    if (text[a] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Scenario parse_scenario(const json& j, const std::string& where) {
  only_keys(j, where, {"name", "task", "system", "grid", "options"});
  Scenario s;
  s.echo = j;
  if (!j.contains("name") || !j["name"].is_string()) bad(where + ".name", "required string");
  s.name = j["name"].get<std::string>();
  if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos)
    bad(where + ".name", "must be nonempty without spaces or slashes");
  if (j.contains("task")) {
    if (!j["task"].is_string()) bad(where + ".task", "expected a string");
    s.task = j["task"].get<std::string>();
    const auto& t = scenario_tasks();
    if (std::find(t.begin(), t.end(), s.task) == t.end()) bad(where + ".task", "unknown task '" + s.task + "'");
  }

  const std::string ws = where + ".system";
  if (!j.contains("system")) bad(ws, "required");
  const json& sys = j["system"];
  only_keys(sys, ws, {"N", "k", "lambda", "mu", "beta", "couplings", "allow_zero_coupling"});
  SystemConfig& c = s.system;
  c.dim = sys.contains("N") ? integer(sys["N"], ws + ".N") : 1;
  if (!sys.contains("lambda")) bad(ws + ".lambda", "required");
  c.lambda = numbers(sys["lambda"], ws + ".lambda");
  c.k = sys.contains("k") ? integer(sys["k"], ws + ".k") : static_cast<int>(c.lambda.size());
  if (c.k != static_cast<int>(c.lambda.size())) bad(ws + ".lambda", "needs k entries");
  c.mu = sys.contains("mu") ? numbers(sys["mu"], ws + ".mu") : std::vector<double>(c.k, 1.0);
  if (sys.contains("beta")) c.beta = matrix(sys["beta"], ws + ".beta");
  if (sys.contains("couplings")) {
    const json& cl = sys["couplings"];
    if (!cl.is_array()) bad(ws + ".couplings", "expected an array of {i, j, value}");
    for (std::size_t a = 0; a < cl.size(); ++a) {
      const std::string w = ws + ".couplings[" + std::to_string(a) + "]";
      only_keys(cl[a], w, {"i", "j", "value"});
      if (!cl[a].contains("i") || !cl[a].contains("j") || !cl[a].contains("value")) bad(w, "needs i, j and value");
      c.couplings.push_back({index1(cl[a]["i"], c.k, w + ".i"), index1(cl[a]["j"], c.k, w + ".j"),
                             number(cl[a]["value"], w + ".value")});
    }
  }
  if (sys.contains("allow_zero_coupling")) {
    if (!sys["allow_zero_coupling"].is_boolean()) bad(ws + ".allow_zero_coupling", "expected true or false");
    c.allow_zero_coupling = sys["allow_zero_coupling"].get<bool>();
  }

  if (j.contains("grid")) {
    const std::string wg = where + ".grid";
    const json& g = j["grid"];
    only_keys(g, wg, {"extent", "spacing", "overlap_spacing", "force_points"});
    if (g.contains("extent")) s.analysis.extent = number(g["extent"], wg + ".extent");
    if (g.contains("spacing")) s.analysis.spacing = number(g["spacing"], wg + ".spacing");
    if (g.contains("overlap_spacing")) s.analysis.overlap.spacing = number(g["overlap_spacing"], wg + ".overlap_spacing");
    if (g.contains("force_points")) s.analysis.force_points = integer(g["force_points"], wg + ".force_points");
    if (!(s.analysis.spacing > 0.0)) bad(wg + ".spacing", "must be positive");
    if (s.analysis.extent < 0.0) bad(wg + ".extent", "must be nonnegative (0 picks a default)");
    if (!(s.analysis.overlap.spacing > 0.0)) bad(wg + ".overlap_spacing", "must be positive");
    if (s.analysis.force_points < 2) bad(wg + ".force_points", "need at least two points");
  }

  if (j.contains("options")) {
    const std::string wo = where + ".options";
    const json& o = j["options"];
    only_keys(o, wo, {"partition", "centers", "R_grid", "decay_R", "pairs", "thresholds", "scaling", "minimize",
                      "morse", "dump_fields"});
    if (o.contains("partition")) {
      ConstraintPartition p;
      const json& pj = o["partition"];
      if (!pj.is_array()) bad(wo + ".partition", "expected an array of groups");
      for (std::size_t a = 0; a < pj.size(); ++a) {
        const std::string w = wo + ".partition[" + std::to_string(a) + "]";
        if (!pj[a].is_array()) bad(w, "expected an array of component indices");
        std::vector<int> grp;
        for (std::size_t b = 0; b < pj[a].size(); ++b) grp.push_back(index1(pj[a][b], c.k, w + "[" + std::to_string(b) + "]"));
        p.groups.push_back(grp);
      }
      try {
        p.validate(c.k);
      } catch (const InvalidInput& e) {
        bad(wo + ".partition", e.what());
      }
      s.partition = p;
    }
    if (o.contains("centers")) {
      s.centers = numbers(o["centers"], wo + ".centers");
      if (static_cast<int>(s.centers.size()) != c.k) bad(wo + ".centers", "needs k entries");
    }
    if (o.contains("R_grid")) s.R_grid = separations(o["R_grid"], wo + ".R_grid");
    if (o.contains("decay_R")) s.decay_R = separations(o["decay_R"], wo + ".decay_R");
    if (o.contains("pairs")) {
      const json& pj = o["pairs"];
      if (!pj.is_array()) bad(wo + ".pairs", "expected an array of [i, j]");
      for (std::size_t a = 0; a < pj.size(); ++a) {
        const std::string w = wo + ".pairs[" + std::to_string(a) + "]";
        if (!pj[a].is_array() || pj[a].size() != 2) bad(w, "expected [i, j]");
        const int i = index1(pj[a][0], c.k, w + "[0]"), jj = index1(pj[a][1], c.k, w + "[1]");
        if (i == jj) bad(w, "pair needs two distinct components");
        s.pairs.emplace_back(i, jj);
      }
    }
    if (o.contains("thresholds")) {
      const std::string w = wo + ".thresholds";
      const json& t = o["thresholds"];
      only_keys(t, w, {"beta_small", "beta_large", "near_equal", "dominance", "delta_small"});
      if (t.contains("beta_small")) s.thresholds.beta_small = number(t["beta_small"], w + ".beta_small");
      if (t.contains("beta_large")) s.thresholds.beta_large = number(t["beta_large"], w + ".beta_large");
      if (t.contains("near_equal")) s.thresholds.near_equal = number(t["near_equal"], w + ".near_equal");
      if (t.contains("dominance")) s.thresholds.dominance = number(t["dominance"], w + ".dominance");
      if (t.contains("delta_small")) s.thresholds.delta_small = number(t["delta_small"], w + ".delta_small");
    }
    if (o.contains("scaling")) {
      const std::string w = wo + ".scaling";
      const json& t = o["scaling"];
      only_keys(t, w, {"delta", "exponents", "beta_hat"});
      if (!t.contains("delta") || !t.contains("exponents") || !t.contains("beta_hat"))
        bad(w, "needs delta, exponents and beta_hat");
      DeltaScaling d;
      d.delta = number(t["delta"], w + ".delta");
      if (!(d.delta > 0.0)) bad(w + ".delta", "must be positive");
      d.exponent = square(t["exponents"], c.k, w + ".exponents");
      d.beta_hat = square(t["beta_hat"], c.k, w + ".beta_hat");
      for (int i = 0; i < c.k; ++i)
        for (int jj = i + 1; jj < c.k; ++jj)
          if (d.beta_hat(i, jj) == 0.0)
            bad(w + ".beta_hat", "every coupling needs a nonzero beta_hat (pair " + std::to_string(i + 1) + "," +
                                     std::to_string(jj + 1) + ")");
      s.scaling = d;
      if (c.beta.empty() && c.couplings.empty())
        for (int i = 0; i < c.k; ++i)
          for (int jj = i + 1; jj < c.k; ++jj)
            c.couplings.push_back({i, jj, std::pow(d.delta, d.exponent(i, jj)) * d.beta_hat(i, jj)});
    }
    if (o.contains("minimize")) {
      const std::string w = wo + ".minimize";
      const json& t = o["minimize"];
      only_keys(t, w, {"tol_g", "tol_E", "window", "max_iter", "tol_split", "split_fraction", "split_window"});
      MinimizeOptions& m = s.analysis.minimize;
      if (t.contains("tol_g")) m.tol_g = number(t["tol_g"], w + ".tol_g");
      if (t.contains("tol_E")) m.tol_E = number(t["tol_E"], w + ".tol_E");
      if (t.contains("window")) m.window = integer(t["window"], w + ".window");
      if (t.contains("max_iter")) m.max_iter = integer(t["max_iter"], w + ".max_iter");
      if (t.contains("tol_split")) m.tol_split = number(t["tol_split"], w + ".tol_split");
      if (t.contains("split_fraction")) m.split_fraction = number(t["split_fraction"], w + ".split_fraction");
      if (t.contains("split_window")) m.split_window = integer(t["split_window"], w + ".split_window");
    }
    if (o.contains("morse")) {
      const std::string w = wo + ".morse";
      const json& t = o["morse"];
      only_keys(t, w, {"zero_tol", "residual_tol", "max_iter", "eigenvalues"});
      if (t.contains("zero_tol")) s.morse.zero_tol = number(t["zero_tol"], w + ".zero_tol");
      if (t.contains("residual_tol")) s.morse.residual_tol = number(t["residual_tol"], w + ".residual_tol");
      if (t.contains("max_iter")) s.morse.max_iter = integer(t["max_iter"], w + ".max_iter");
      if (t.contains("eigenvalues")) s.morse.eigenvalues = integer(t["eigenvalues"], w + ".eigenvalues");
    }
    if (o.contains("dump_fields")) {
      if (!o["dump_fields"].is_boolean()) bad(wo + ".dump_fields", "expected true or false");
      s.dump_fields = o["dump_fields"].get<bool>();
    }
  }

  try {
    (void)build_system(s.system);
  } catch (const InvalidInput& e) {
    bad(ws, e.what());
  }
  return s;
}

ScenarioFile parse_scenarios(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": syntax error at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  ScenarioFile f;
  if (j.is_object() && j.contains("scenarios")) {
    only_keys(j, source, {"scenarios", "seed"});
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) bad(source + ".seed", "expected a nonnegative integer");
      f.seed = j["seed"].get<std::uint64_t>();
    }
    const json& list = j["scenarios"];
    if (!list.is_array()) bad(source + ".scenarios", "expected an array");
    std::set<std::string> names;
    for (std::size_t a = 0; a < list.size(); ++a) {
      const std::string w = source + ".scenarios[" + std::to_string(a) + "]";
      f.scenarios.push_back(parse_scenario(list[a], w));
      if (!names.insert(f.scenarios.back().name).second) bad(w + ".name", "duplicate scenario name");
    }
  } else {
    f.scenarios.push_back(parse_scenario(j, source));
  }
  return f;
}

ScenarioFile load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenarios(ss.str(), path);
}

void apply_tolerance(Scenario& s, const std::string& key, double v) {
  MinimizeOptions& m = s.analysis.minimize;
  if (key == "tol_g") m.tol_g = v;
  else if (key == "tol_E") m.tol_E = v;
  else if (key == "tol_split") m.tol_split = v;
  else if (key == "max_iter") m.max_iter = static_cast<int>(v);
  else if (key == "zero_tol") s.morse.zero_tol = v;
  else if (key == "residual_tol") s.morse.residual_tol = v;
  else if (key == "beta_small") s.thresholds.beta_small = v;
  else if (key == "beta_large") s.thresholds.beta_large = v;
  else if (key == "near_equal") s.thresholds.near_equal = v;
  else if (key == "dominance") s.thresholds.dominance = v;
  else if (key == "delta_small") s.thresholds.delta_small = v;
  else throw ConfigError("--tolerance: unknown key '" + key + "'");
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json one_based(const std::vector<int>& v) {
  json a = json::array();
  for (int x : v) a.push_back(x + 1);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int c = 0; c < m.cols(); ++c) r.push_back(m(i, c));
    a.push_back(r);
  }
  return a;
}

std::string side_tag(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : "-") + std::to_string(x + 1);
  return s;
}

std::string csv_number(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

json classification_json(const BlockAnalysis& an) {
  json j;
  j["class"] = to_string(an.cls);
  j["degree_d"] = an.optimal.degree;
  j["exact_search"] = an.optimal.exact;
  if (!an.optimal.warning.empty()) j["warning"] = an.optimal.warning;
  j["optimal_decompositions"] = json::array();
  for (const auto& d : an.optimal.decompositions) j["optimal_decompositions"].push_back(blocks_str(d.blocks));
  j["forces"] = json::array();
  for (std::size_t a = 0; a < an.forces.size(); ++a)
    for (const auto& f : an.forces[a])
      j["forces"].push_back({{"decomposition", blocks_str(an.optimal.decompositions[a].blocks)},
                             {"left", one_based(f.left)},
                             {"right", one_based(f.right)},
                             {"value", f.value},
                             {"argmax_R", f.argmax_R},
                             {"sign", to_string(f.sign)}});
  j["eventual"] = json::array();
  for (const auto& ev : an.eventual) {
    json e{{"start", blocks_str(ev.start.blocks)}, {"min_m", ev.min_m}, {"max_m", ev.max_m}, {"trees", json::array()}};
    for (const auto& t : ev.trees) {
      json levels = json::array();
      for (const auto& l : t.levels) levels.push_back(blocks_str(l.components));
      e["trees"].push_back({{"m", t.m}, {"levels", levels}});
    }
    j["eventual"].push_back(e);
  }
  j["degree_m"] = {{"min", an.min_m}, {"max", an.max_m}, {"complete", an.eventual_complete}};
  j["indeterminate_decompositions"] = an.indeterminate;
  j["force_R_grid"] = {{"from", an.R_grid.empty() ? 0.0 : an.R_grid.front()},
                       {"to", an.R_grid.empty() ? 0.0 : an.R_grid.back()},
                       {"points", an.R_grid.size()}};
  return j;
}

json prediction_json(const ExistencePrediction& p, const PredictThresholds& th) {
  json j;
  j["verdict"] = to_string(p.verdict);
  j["matched_rule"] = p.matched_rule;
  j["morse_index_range"] = p.morse_index_range ? json::array({p.morse_index_range->first, p.morse_index_range->second})
                                               : json(nullptr);
  j["unmet_hypotheses"] = p.unmet_hypotheses;
  j["notes"] = p.notes;
  j["thresholds"] = {{"beta_small", p.beta_small},
                     {"beta_large", matrix_json(p.beta_large)},
                     {"near_equal", th.near_equal},
                     {"dominance", th.dominance},
                     {"delta_small", th.delta_small}};
  return j;
}

json sweep_json(const SeparationCurve& c) {
  return {{"left", one_based(c.left)},      {"right", one_based(c.right)},   {"limit", c.limit},
          {"left_energy", c.left_energy},   {"right_energy", c.right_energy}, {"min_energy", c.min_energy},
          {"argmin_R", c.argmin_R},         {"below_limit", c.below_limit},  {"interior_minimum", c.interior},
          {"skipped", c.skipped},           {"points", c.R.size()}};
}

std::string sweep_csv(const SeparationCurve& c) {
  std::ostringstream o;
  o << "R,energy,limit";
  const std::size_t m = c.multipliers.empty() ? 0 : c.multipliers.front().size();
  for (std::size_t a = 0; a < m; ++a) o << ",t" << a + 1;
  o << "\n";
  for (std::size_t r = 0; r < c.R.size(); ++r) {
    o << csv_number(c.R[r]) << "," << csv_number(c.energy[r]) << "," << csv_number(c.limit);
    if (r < c.multipliers.size())
      for (double t : c.multipliers[r]) o << "," << csv_number(t);
    o << "\n";
  }
  return o.str();
}

json ground_state_json(const GroundStateRun& run, const Scenario& s) {
  const GroundStateResult& r = run.result;
  json j;
  j["start"] = run.start;
  j["start_centers"] = run.start_centers;
  j["partition"] = r.partition.str();
  j["energy"] = r.energy;
  j["diagnosis"] = to_string(r.diagnosis);
  j["note"] = r.note;
  j["iterations"] = r.iterations;
  j["gradient_norm"] = r.gradient_norm;
  j["nehari_residuals"] = r.residuals;
  j["masses"] = r.masses;
  j["centroids"] = r.centroids;
  j["boundary_mass"] = r.boundary_mass;
  j["condition"] = r.condition;
  const std::size_t tail = std::min<std::size_t>(r.separation_history.size(), 50);
  j["separation_tail"] = std::vector<double>(r.separation_history.end() - tail, r.separation_history.end());
  const MinimizeOptions& m = s.analysis.minimize;
  j["tolerances"] = {{"tol_g", m.tol_g}, {"tol_E", m.tol_E}, {"window", m.window}, {"max_iter", m.max_iter},
                     {"tol_split", m.tol_split}, {"split_fraction", m.split_fraction},
                     {"triviality", m.triviality}};
  if (run.morse) {
    j["morse"] = {{"index", run.morse->index},
                  {"zero_modes", run.morse->zero_modes},
                  {"translation_modes", run.morse->translation_modes},
                  {"eigenvalues", run.morse->eigenvalues},
                  {"zero_tol", run.morse->zero_tol},
                  {"residual_tol", s.morse.residual_tol},
                  {"seed", s.morse.seed}};
  } else {
    j["morse"] = nullptr;
  }
  json att{{"diagnosis", to_string(run.attainment.diagnosis)},
           {"energy", run.attainment.energy},
           {"tol_split", run.attainment.tol_split},
           {"note", run.attainment.note},
           {"diverging_split", run.attainment.diverging_split},
           {"splits", json::array()}};
  for (const auto& c : run.attainment.splits)
    att["splits"].push_back({{"left", one_based(c.left)},
                             {"right", one_based(c.right)},
                             {"limit", c.limit},
                             {"margin", c.margin},
                             {"cross_term", c.cross_term},
                             {"separation", c.separation},
                             {"decoupled", c.decoupled}});
  j["attainment"] = att;
  j["sweeps"] = json::array();
  for (const auto& c : run.sweeps) j["sweeps"].push_back(sweep_json(c));
  if (run.ansatz) {
    j["ansatz"] = {{"centers", run.ansatz->centers},
                   {"multipliers", std::vector<double>(run.ansatz->t.data(), run.ansatz->t.data() + run.ansatz->t.size())},
                   {"evaluations", run.ansatz->evaluations}};
  }
  j["notes"] = run.notes;
  return j;
}

std::string history_csv(const GroundStateResult& r) {
  std::ostringstream o;
  o << "step,energy,separation\n";
  const std::size_t n = r.energy_history.size();
  for (std::size_t a = 0; a < n; ++a)
    o << (r.iterations + 1 - static_cast<long>(n) + static_cast<long>(a)) << "," << csv_number(r.energy_history[a])
      << "," << csv_number(a < r.separation_history.size() ? r.separation_history[a] : 0.0) << "\n";
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> decay_grid(const Scenario& s, const SystemSpec& spec, int i, int j) {
  if (!s.decay_R.empty()) return s.decay_R;
  const double dl = 1.0 / std::min(std::sqrt(spec.lambda(i)), std::sqrt(spec.lambda(j)));
  return linspace(6.0 * dl, 14.0 * dl, 33);
}

}  // namespace

ScenarioReport run_scenario(const Scenario& sc, const RunSettings& settings) {
  ScenarioReport rep;
  json& j = rep.json;
  j["name"] = sc.name;
  j["task"] = sc.task;
  j["config"] = sc.echo;
  json timings = json::object();
  Scenario s = sc;
  s.morse.seed = settings.seed;
  std::string module = "model";
  try {
    const SystemSpec spec = build_system(s.system);
    const std::string& task = s.task;
    const bool classify = task == "classify" || task == "predict" || task == "full-report";

    std::optional<BlockAnalysis> an;
    if (classify) {
      module = "blocks";
      auto t0 = std::chrono::steady_clock::now();
      an = analyze_blocks(spec, s.analysis);
      j["classification"] = classification_json(*an);
      timings["classify"] = seconds_since(t0);
      t0 = std::chrono::steady_clock::now();
      const ExistencePrediction p = predict_existence(spec, *an, s.thresholds, s.scaling);
      j["prediction"] = prediction_json(p, s.thresholds);
      timings["predict"] = seconds_since(t0);
      rep.indeterminate = p.verdict == Verdict::Indeterminate;
    }

    if (task == "scalar") {
      module = "scalar";
      auto t0 = std::chrono::steady_clock::now();
      j["scalar"] = json::array();
      for (int c = 0; c < spec.k; ++c) {
        const double L = s.analysis.extent > 0.0 ? s.analysis.extent : 0.0;
        const ScalarSoliton sol =
            solve_scalar(spec.lambda(c), spec.mu(c), spec.dim, profile_mesh(spec.lambda(c), s.analysis.spacing, L));
        const TailFit tf = fit_tail(sol);
        j["scalar"].push_back({{"component", c + 1},
                               {"lambda", sol.lambda},
                               {"mu", sol.mu},
                               {"method", sol.method},
                               {"w0", sol.peak()},
                               {"energy", sol.energy},
                               {"pohozaev_residual", pohozaev_residual(sol)},
                               {"equation_residual", equation_residual(sol)},
                               {"tail_amplitude", tf.amplitude},
                               {"fitted_rate", tf.rate},
                               {"expected_rate", std::sqrt(sol.lambda)}});
      }
      timings["scalar"] = seconds_since(t0);
    }

    if (task == "decay" || task == "full-report") {
      module = "overlap";
      auto t0 = std::chrono::steady_clock::now();
      std::vector<std::pair<int, int>> pairs = s.pairs;
      if (pairs.empty())
        for (int a = 0; a < spec.k; ++a)
          for (int b = a + 1; b < spec.k; ++b) pairs.emplace_back(a, b);
      j["decay"] = json::array();
      std::map<int, ScalarSoliton> sol;
      for (auto [a, b] : pairs)
        for (int c : {a, b})
          if (!sol.count(c))
            sol.emplace(c, solve_scalar(spec.lambda(c), spec.mu(c), spec.dim,
                                        profile_mesh(spec.lambda(c), s.analysis.overlap.spacing, 60.0 / std::sqrt(spec.lambda_min()))));
      for (auto [a, b] : pairs) {
        const std::vector<double> R = decay_grid(s, spec, a, b);
        const auto sweep = decay_sweep(sol.at(a).profile, sol.at(b).profile, R, s.analysis.overlap);
        const DecayFit fit = decay_fit(sweep);
        const bool equal = spec.lambda(a) == spec.lambda(b);
        j["decay"].push_back({{"pair", {a + 1, b + 1}},
                              {"rate", fit.rate},
                              {"power", fit.power},
                              {"constant", fit.constant},
                              {"fit_residual", fit.fit_residual},
                              {"points", fit.points},
                              {"R_from", R.front()},
                              {"R_to", R.back()},
                              {"expected_rate", 2.0 * std::min(std::sqrt(spec.lambda(a)), std::sqrt(spec.lambda(b)))},
                              {"expected_power", expected_power(spec.dim, equal)}});
        std::ostringstream o;
        o << "R,overlap,log_overlap\n";
        for (const auto& p : sweep)
          o << csv_number(p.R) << "," << csv_number(p.overlap) << "," << csv_number(std::log(p.overlap)) << "\n";
        rep.csv[sc.name + "_decay_" + std::to_string(a + 1) + "-" + std::to_string(b + 1) + ".csv"] = o.str();
      }
      timings["decay"] = seconds_since(t0);
    }

    if (task == "ground-state" || task == "full-report") {
      module = "solver";
      auto t0 = std::chrono::steady_clock::now();
      GroundStateOptions go;
      go.analysis = s.analysis;
      go.partition = s.partition;
      go.centers = s.centers;
      go.R_grid = s.R_grid;
      go.morse_options = s.morse;
      const GroundStateRun run = run_ground_state(spec, go);
      j["ground_state"] = ground_state_json(run, s);
      for (const auto& c : run.sweeps)
        rep.csv[sc.name + "_sweep_" + side_tag(c.left) + "_" + side_tag(c.right) + ".csv"] = sweep_csv(c);
      if (spec.dim == 1) rep.csv[sc.name + "_history.csv"] = history_csv(run.result);
      if (s.dump_fields && !settings.out_dir.empty() && spec.dim == 1) {
        const std::string file = sc.name + "_fields.nlsb";
        write_fields((std::filesystem::path(settings.out_dir) / file).string(), run.result.fields);
        j["ground_state"]["fields_file"] = file;
      }
      timings["ground_state"] = seconds_since(t0);
      if (j.contains("prediction")) {
        const std::string v = j["prediction"]["verdict"];
        const Diagnosis d = run.attainment.diagnosis;
        std::string agree = "n/a";
        if (v == "Exists") agree = d == Diagnosis::Attained ? "agree" : "disagree";
        if (v == "NotExists") agree = d == Diagnosis::SplittingDetected ? "agree" : "disagree";
        j["agreement"] = agree;
        if (v == "Exists" && d == Diagnosis::Attained && run.morse && j["prediction"]["morse_index_range"].is_array()) {
          const int lo = j["prediction"]["morse_index_range"][0], hi = j["prediction"]["morse_index_range"][1];
          j["morse_agreement"] = run.morse->index >= lo && run.morse->index <= hi ? "agree" : "disagree";
        }
      }
    }

    if (task == "sweep") {
      module = "solver";
      auto t0 = std::chrono::steady_clock::now();
      if (spec.dim != 1) throw InvalidInput("separation sweeps need N = 1");
      const Grid g = analysis_grid(spec, s.analysis);
      const auto splits = decomposition_splits(optimal_decompositions(spec.beta));
      std::vector<double> R = s.R_grid;
      if (R.empty()) {
        const double dl = 1.0 / std::sqrt(spec.lambda_min());
        R = linspace(0.5 * dl, std::min(16.0 * dl, g.extent() - 10.0 * dl), 32);
      }
      MinimizeOptions mo = s.analysis.minimize;
      mo.split_limits.clear();
      j["sweeps"] = json::array();
      for (const auto& [l, r] : splits) {
        const SeparationCurve c = sweep_separation(spec, l, r, R, side_state(spec, l, g, mo), side_state(spec, r, g, mo));
        j["sweeps"].push_back(sweep_json(c));
        rep.csv[sc.name + "_sweep_" + side_tag(l) + "_" + side_tag(r) + ".csv"] = sweep_csv(c);
      }
      timings["sweep"] = seconds_since(t0);
    }
  } catch (const std::exception& e) {
    rep.failed = true;
    j["error"] = {{"module", module}, {"message", e.what()}};
  }
  j["timings"] = timings;
  return rep;
}

BatchReport run_batch(const std::vector<Scenario>& scenarios, const RunSettings& settings, int jobs) {
  std::vector<ScenarioReport> reps(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t a; (a = next++) < scenarios.size();) reps[a] = run_scenario(scenarios[a], settings);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BatchReport out;
  out.json["schema_version"] = kReportSchemaVersion;
  out.json["seed"] = settings.seed;
  out.json["scenarios"] = json::array();
  bool indeterminate = false, failed = false;
  for (auto& r : reps) {
    out.json["scenarios"].push_back(std::move(r.json));
    out.csv.merge(r.csv);
    indeterminate = indeterminate || r.indeterminate;
    failed = failed || r.failed;
  }
  out.exit_code = failed ? 1 : indeterminate ? 2 : 0;
  return out;
}

std::vector<std::string> bundled_scenario_names() {
  return {"k3-attractive",        "k3-repulsive",          "k3-repulsive-mixed",
          "k3-total-mixed-exists", "k3-total-mixed-nonexists", "k4-caseH-exists",
          "k4-caseH-nonexists",   "decay-equal-lambda",    "decay-unequal-lambda"};
}

std::vector<Scenario> bundled_scenarios(const std::string& dir) {
  std::vector<Scenario> out;
  for (const auto& n : bundled_scenario_names()) {
    ScenarioFile f = load_scenarios((std::filesystem::path(dir) / (n + ".json")).string());
    for (auto& s : f.scenarios) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cnls
