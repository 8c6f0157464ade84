#include "cnls/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cnls;

namespace {

SystemSpec make_system(int N, std::vector<double> lambda, std::vector<double> mu,
                       std::vector<std::vector<double>> beta, bool allow_zero) {
  SystemConfig c;
  c.dim = N;
  c.k = static_cast<int>(lambda.size());
  c.lambda = std::move(lambda);
  c.mu = mu.empty() ? std::vector<double>(c.k, 1.0) : std::move(mu);
  c.beta = std::move(beta);
  c.allow_zero_coupling = allow_zero;
  return build_system(c);
}

py::dict scalar(double lambda, double mu, int N, double extent, double spacing) {
  const ScalarSoliton s = solve_scalar(lambda, mu, N, profile_mesh(lambda, spacing, extent));
  py::dict d;
  d["w0"] = s.peak();
  d["energy"] = s.energy;
  d["l2_sq"] = s.l2_sq;
  d["l4_pow4"] = s.l4_pow4;
  d["pohozaev_residual"] = pohozaev_residual(s);
  d["method"] = s.method;
  d["dr"] = s.profile.dr;
  d["w"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(s.profile.w.data(), s.profile.w.size()));
  return d;
}

py::dict decay(double li, double lj, int N, std::vector<double> R, double spacing) {
  const double ext = 60.0 / std::sqrt(std::min(li, lj));
  const ScalarSoliton a = solve_scalar(li, 1.0, N, profile_mesh(li, spacing, ext));
  const ScalarSoliton b = solve_scalar(lj, 1.0, N, profile_mesh(lj, spacing, ext));
  OverlapOptions o;
  o.spacing = spacing;
  const auto sw = decay_sweep(a.profile, b.profile, R, o);
  const DecayFit f = decay_fit(sw);
  std::vector<double> rr, ov;
  for (const auto& p : sw) {
    rr.push_back(p.R);
    ov.push_back(p.overlap);
  }
  py::dict d;
  d["R"] = rr;
  d["overlap"] = ov;
  d["rate"] = f.rate;
  d["power"] = f.power;
  d["constant"] = f.constant;
  d["fit_residual"] = f.fit_residual;
  return d;
}

py::dict ground_state(const SystemSpec& spec, std::vector<double> centers, double extent, double spacing) {
  GroundStateOptions o;
  o.analysis.extent = extent;
  o.analysis.spacing = spacing;
  o.centers = std::move(centers);
  const GroundStateRun r = run_ground_state(spec, o);
  py::dict d;
  d["energy"] = r.result.energy;
  d["diagnosis"] = to_string(r.result.diagnosis);
  d["attainment"] = to_string(r.attainment.diagnosis);
  d["morse_index"] = r.result.morse_index;
  d["zero_modes"] = r.result.zero_modes;
  d["iterations"] = r.result.iterations;
  d["start"] = r.start;
  if (spec.dim == 1) {
    const Grid& g = r.result.fields.grid;
    Eigen::MatrixXd u(spec.k, g.size());
    for (int j = 0; j < spec.k; ++j) u.row(j) = r.result.fields[j].transpose();
    Eigen::VectorXd x(g.points());
    for (int i = 0; i < g.points(); ++i) x[i] = g.coord(i);
    d["x"] = x;
    d["fields"] = u;
  }
  return d;
}

py::dict predict(const SystemSpec& spec) {
  const BlockAnalysis an = analyze_blocks(spec);
  const ExistencePrediction p = predict_existence(spec, an);
  py::dict d;
  d["class"] = to_string(an.cls);
  d["degree_d"] = an.optimal.degree;
  d["degree_m"] = std::make_pair(an.min_m, an.max_m);
  d["verdict"] = to_string(p.verdict);
  d["rule"] = p.matched_rule;
  d["morse_index_range"] = p.morse_index_range ? py::cast(*p.morse_index_range) : py::none();
  d["unmet"] = p.unmet_hypotheses;
  return d;
}

std::pair<std::string, int> run_config(const std::string& text, std::uint64_t seed, int jobs) {
  const ScenarioFile f = parse_scenarios(text);
  RunSettings rs;
  rs.seed = f.seed.value_or(seed);
  const BatchReport r = run_batch(f.scenarios, rs, jobs);
  return {r.json.dump(), r.exit_code};
}

}  // namespace

PYBIND11_MODULE(_cnls, m) {
  m.doc() = "Coupled cubic Schrodinger systems";
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SystemSpec>(m, "System")
      .def(py::init(&make_system), py::arg("N"), py::arg("lam"), py::arg("mu") = std::vector<double>{},
           py::arg("beta") = std::vector<std::vector<double>>{}, py::arg("allow_zero_coupling") = false)
      .def_readonly("N", &SystemSpec::dim)
      .def_readonly("k", &SystemSpec::k)
      .def_readonly("lam", &SystemSpec::lambda)
      .def_readonly("mu", &SystemSpec::mu)
      .def_readonly("beta", &SystemSpec::beta);

  m.def("classify", [](const SystemSpec& s) { return to_string(classify_couplings(s.beta)); });
  m.def("optimal_decompositions", [](const SystemSpec& s) {
    std::vector<Blocks> out;
    for (const auto& d : optimal_decompositions(s.beta).decompositions) out.push_back(d.blocks);
    return out;
  });
  m.def("scalar_soliton", &scalar, py::arg("lam") = 1.0, py::arg("mu") = 1.0, py::arg("N") = 1,
        py::arg("extent") = 0.0, py::arg("spacing") = 0.01);
  m.def("decay", &decay, py::arg("lam_i"), py::arg("lam_j"), py::arg("N"), py::arg("R"), py::arg("spacing") = 0.02);
  m.def("beta_bar", [](double li, double mui, double lj, double muj, double extent, double h) {
    return beta_bar(LineOperator::cartesian(Grid::make(1, extent, h)), li, mui, lj, muj);
  }, py::arg("lam_i"), py::arg("mu_i"), py::arg("lam_j"), py::arg("mu_j"), py::arg("extent") = 24.0,
        py::arg("spacing") = 0.05);
  m.def("d_tilde", [](double li, double lj, double extent, double h) {
    return d_tilde(LineOperator::cartesian(Grid::make(1, extent, h)), li, lj).value;
  }, py::arg("lam_i"), py::arg("lam_j"), py::arg("extent") = 24.0, py::arg("spacing") = 0.05);
  m.def("predict", &predict);
  m.def("ground_state", &ground_state, py::arg("system"), py::arg("centers") = std::vector<double>{},
        py::arg("extent") = 0.0, py::arg("spacing") = 0.05);
  m.def("run_config", &run_config, py::arg("text"), py::arg("seed") = 12345, py::arg("jobs") = 1);
}
