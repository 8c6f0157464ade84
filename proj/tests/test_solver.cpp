#include "doctest.h"

#include "cnls/solver.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace cnls;

namespace {

SystemSpec make(std::vector<double> lambda, std::vector<double> mu, std::vector<Coupling> c,
                bool allow_zero = false) {
  SystemConfig cfg;
  cfg.dim = 1;
  cfg.k = static_cast<int>(lambda.size());
  cfg.lambda = std::move(lambda);
  cfg.mu = std::move(mu);
  cfg.couplings = std::move(c);
  cfg.allow_zero_coupling = allow_zero;
  return build_system(cfg);
}

SystemSpec decoupled3() { return make({1, 1, 1}, {1, 1, 1}, {{0, 1, 0}, {0, 2, 0}, {1, 2, 0}}, true); }

FieldVector random_direction(const Grid& g, int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  FieldVector h(g, k);
  for (int j = 0; j < k; ++j) {
    for (Eigen::Index p = 0; p < h[j].size(); ++p) h[j][p] = nd(rng) * std::exp(-0.05 * std::pow(g.coord(p), 2));
    zero_boundary(g, h[j]);
  }
  return h;
}

double sech_energy_sum(const SystemSpec& s) {
  double e = 0.0;
  for (int j = 0; j < s.k; ++j) e += 4.0 * std::pow(s.lambda(j), 1.5) / (3.0 * s.mu(j));
  return e;
}

}  // namespace

TEST_CASE("projection of scaled solitons") {
  const SystemSpec s = decoupled3();
  const Grid g = Grid::make(1, 20.0, 0.02);
  FieldVector u = soliton_guess(s, g, {-6.0, 0.0, 6.0});
  const ProjectionResult base = project_nehari(s, u, ConstraintPartition::singletons(3));
  for (double t : base.t) CHECK(t == doctest::Approx(1.0).epsilon(1e-4));
  for (int j = 0; j < 3; ++j) u[j] *= 1.7;
  const ProjectionResult p = project_nehari(s, u, ConstraintPartition::singletons(3));
  for (int j = 0; j < 3; ++j) CHECK(p.t[j] == doctest::Approx(base.t[j] / 1.7).epsilon(1e-12));
  // idempotent
  const ProjectionResult q = project_nehari(s, p.fields, ConstraintPartition::singletons(3));
  for (double t : q.t) CHECK(std::abs(t - 1.0) < 1e-10);
  for (double r : nehari_residuals(s, p.fields, ConstraintPartition::singletons(3)))
    CHECK(std::abs(r) < 1e-10 * l2_sq(g, p.fields[0]));
}

TEST_CASE("grouped projection and infeasible cones") {
  const SystemSpec s = make({1, 2, 2.5}, {1, 1, 1}, {{0, 1, 0.05}, {0, 2, 0.05}, {1, 2, -0.05}});
  const Grid g = Grid::make(1, 20.0, 0.05);
  const FieldVector u = soliton_guess(s, g, {0.0, 0.5, -0.5});
  ConstraintPartition part{{{0, 1}, {2}}};
  const ProjectionResult p = project_nehari(s, u, part);
  CHECK(p.t.size() == 2);
  const auto r = nehari_residuals(s, p.fields, part);
  for (double x : r) CHECK(std::abs(x) < 1e-10);
  CHECK(p.condition >= 1.0);

  // two identical overlapping profiles with beta = -mu: singular system
  const SystemSpec bad = make({1, 1}, {1, 1}, {{0, 1, -1.0}});
  FieldVector v = soliton_guess(bad, g, {0.0, 0.0});
  CHECK_THROWS_AS(project_nehari(bad, v, ConstraintPartition::singletons(2)), ProjectionInfeasible);
  // strong repulsion on the full overlap: no positive multiplier
  const SystemSpec worse = make({1, 1}, {1, 1}, {{0, 1, -3.0}});
  CHECK_THROWS_AS(project_nehari(worse, v, ConstraintPartition::singletons(2)), ProjectionInfeasible);
  CHECK_THROWS_AS(project_nehari(worse, v, ConstraintPartition{{{0, 1}}}), ProjectionInfeasible);
  // milder repulsion is feasible
  const SystemSpec mild = make({1, 1}, {1, 1}, {{0, 1, -0.5}});
  CHECK_NOTHROW(project_nehari(mild, v, ConstraintPartition::singletons(2)));
}

TEST_CASE("decoupled minimization reproduces three solitons") {
  const SystemSpec s = decoupled3();
  const Grid g = Grid::make(1, 16.0, 0.005);
  FieldVector init = soliton_guess(s, g, {-5.0, 0.0, 5.0});
  for (int j = 0; j < 3; ++j) init[j] *= 0.8 + 0.1 * j;
  const GroundStateResult r = minimize(s, ConstraintPartition::singletons(3), init);
  CHECK(r.diagnosis == Diagnosis::Attained);
  CHECK(r.energy == doctest::Approx(4.0).epsilon(1e-5 / 4.0));
  CHECK(r.gradient_norm <= 1e-8);
  for (std::size_t a = 1; a < r.energy_history.size(); ++a)
    CHECK(r.energy_history[a] <= r.energy_history[a - 1] + 1e-14 * std::abs(r.energy_history[a - 1]));

  const MorseResult m = morse_index(s, r.fields);
  CHECK(m.index == 3);
  CHECK(m.zero_modes == 3);
}

TEST_CASE("coupled minimization stays below the decoupled sum and on the manifold") {
  const SystemSpec s = make({1, 2, 2.5}, {1, 1, 1}, {{0, 1, 0.05}, {0, 2, 0.05}, {1, 2, -0.05}});
  const Grid g = Grid::make(1, 20.0, 0.05);
  // co-located start is a symmetric saddle; break the symmetry
  const GroundStateResult r =
      minimize(s, ConstraintPartition::singletons(3), soliton_guess(s, g, {0.0, 0.0, 6.0}));
  CHECK(r.diagnosis == Diagnosis::Attained);
  for (std::size_t a = 1; a < r.energy_history.size(); ++a)
    CHECK(r.energy_history[a] <= r.energy_history[a - 1] + 1e-14 * std::abs(r.energy_history[a - 1]));
  CHECK(r.energy <= sech_energy_sum(s) + 1e-3);
  double quarter = 0.0;
  for (int j = 0; j < 3; ++j) quarter += 0.25 * lambda_norm_sq(g, r.fields[j], s.lambda(j));
  CHECK(r.energy == doctest::Approx(quarter).epsilon(1e-8));
  for (double m : r.masses) CHECK(m > 1e-4 * r.masses[0]);
}

TEST_CASE("Hessian is symmetric and matches second differences") {
  const SystemSpec s = make({1, 2}, {1, 1.5}, {{0, 1, 0.3}});
  const Grid g = Grid::make(1, 12.0, 0.05);
  const FieldVector u = soliton_guess(s, g, {-0.5, 0.7});
  const Eigen::SparseMatrix<double> H = hessian(s, u);
  CHECK((Eigen::MatrixXd(H) - Eigen::MatrixXd(H).transpose()).cwiseAbs().maxCoeff() < 1e-12);

  const auto nodes = interior_nodes(g);
  const long m = static_cast<long>(nodes.size());
  const FieldVector h = random_direction(g, 2, 7);
  Eigen::VectorXd hv(2 * m);
  for (int j = 0; j < 2; ++j)
    for (long a = 0; a < m; ++a) hv(j * m + a) = h[j][nodes[a]];
  const double quad = hv.dot(H * hv) * g.cell();
  double prev = 0.0;
  for (double eps : {1e-2, 5e-3}) {
    FieldVector up = u, um = u;
    for (int j = 0; j < 2; ++j) {
      up[j] += eps * h[j];
      um[j] -= eps * h[j];
    }
    const double fd = (energy(s, up) - 2.0 * energy(s, u) + energy(s, um)) / (eps * eps);
    const double err = std::abs(fd - quad);
    CHECK(err < 1e-3 * std::abs(quad));
    if (prev > 0.0) CHECK(err < 0.3 * prev);  // second order in eps
    prev = err;
  }
}

TEST_CASE("Morse index of the scalar soliton against a dense oracle") {
  const SystemSpec s = make({1}, {1}, {});
  const Grid g = Grid::make(1, 10.0, 0.05);
  const GroundStateResult r = minimize(s, ConstraintPartition::singletons(1), soliton_guess(s, g, {0.0}));
  const MorseResult m = morse_index(s, r.fields);
  CHECK(m.index == 1);
  CHECK(m.zero_modes == 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(hessian(s, r.fields)));
  for (std::size_t a = 0; a < 2; ++a)
    CHECK(m.eigenvalues[a] == doctest::Approx(es.eigenvalues()(a)).epsilon(1e-8).scale(1.0));
  CHECK(m.eigenvalues[0] == doctest::Approx(-3.0).epsilon(1e-2));
}

TEST_CASE("morse_index refuses non-critical states") {
  const SystemSpec s = make({1}, {1}, {});
  const Grid g = Grid::make(1, 10.0, 0.05);
  FieldVector u = soliton_guess(s, g, {0.0});
  u[0] *= 1.1;
  CHECK_THROWS_AS(morse_index(s, u), SolverError);
}

TEST_CASE("rho_hat against a dense generalized eigenproblem") {
  const Grid g = Grid::make(1, 10.0, 0.05);  // 399 interior nodes
  const LineOperator op = LineOperator::cartesian(g);
  const Eigen::VectorXd w1 = soliton_on(op, 1.0, 1.0), w2 = soliton_on(op, 2.0, 1.0);
  const double r = rho_hat(op, w1, w2, 1.5);

  const int n = op.size();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n), B = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = op.diag[i] + 1.5 * op.mass[i];
    if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = op.off[i];
    B(i, i) = op.mass[i] * (w1[i] * w1[i] + w2[i] * w2[i]);
  }
  // B is only semidefinite far out; solve B^-1-free via K^-1 B
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(B, K);
  const double oracle = 1.0 / es.eigenvalues().maxCoeff();
  CHECK(std::abs(r - oracle) < 1e-6 * oracle);

  // homogeneity and monotonicity in the weight
  CHECK(rho_hat(op, 2.0 * w1, 2.0 * w2, 1.5) == doctest::Approx(r / 4.0).epsilon(1e-10));
  CHECK(rho_hat(op, 1.1 * w1, w2, 1.5) < r);
  // single soliton weight w^2 with its own lambda: the soliton itself, rho = 1
  CHECK(rayleigh_min(op, w1.cwiseAbs2(), 1.0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(beta_bar(op, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("limiting quotient") {
  const LineOperator op = LineOperator::cartesian(Grid::make(1, 16.0, 0.02));
  const DTilde d = d_tilde(op, 1.0, 1.0);
  CHECK(d.value <= 8.0 / 3.0 + 1e-4);
  CHECK(d.value == doctest::Approx(8.0 / 3.0).epsilon(1e-3));
  CHECK(d_tilde_quotient(op, d.u, d.v, 1.0, 1.0) == doctest::Approx(d.value).epsilon(1e-10));
  // the returned pair solves the limiting system
  const Eigen::VectorXd mass = Eigen::Map<const Eigen::VectorXd>(op.mass.data(), op.size());
  const Eigen::VectorXd res = op.apply(1.0, d.u) - mass.cwiseProduct(d.v.cwiseAbs2()).cwiseProduct(d.u);
  CHECK(res.cwiseQuotient(mass).cwiseAbs().maxCoeff() < 1e-8);

  const DTilde a = d_tilde(op, 1.0, 2.0), b = d_tilde(op, 2.0, 1.0);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
  // testing with the pair (w, w) of a common soliton bounds the value
  const Eigen::VectorXd w = soliton_on(op, 1.5, 1.0);
  CHECK(a.value <= d_tilde_quotient(op, w, w, 1.0, 2.0) + 1e-10);
}

TEST_CASE("separation sweeps") {
  const Grid g = Grid::make(1, 30.0, 0.05);
  const auto R = std::vector<double>{4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0};

  const SystemSpec free2 = make({1, 1.5}, {1, 1}, {{0, 1, 0.0}}, true);
  GroundStateResult l = side_state(free2, {0}, g), r = side_state(free2, {1}, g);
  const SeparationCurve flat = sweep_separation(free2, {0}, {1}, R, l, r);
  for (double e : flat.energy) CHECK(e == doctest::Approx(flat.limit).epsilon(1e-12));
  CHECK_FALSE(flat.below_limit);

  const SystemSpec rep = make({1, 1.5}, {1, 1}, {{0, 1, -0.5}});
  l = side_state(rep, {0}, g);
  r = side_state(rep, {1}, g);
  const SeparationCurve c = sweep_separation(rep, {0}, {1}, R, l, r);
  for (std::size_t a = 0; a < c.energy.size(); ++a) {
    CHECK(c.energy[a] > c.limit);
    if (a) CHECK(c.energy[a] < c.energy[a - 1]);
  }
  CHECK(c.energy.back() - c.limit < 1e-9);
  for (double t : c.multipliers.back()) CHECK(std::abs(t - 1.0) < 1e-6);
  CHECK_FALSE(c.below_limit);

  FieldVector u = l.fields;
  CHECK(shift_fields(u, 700) > 0.99);
}

TEST_CASE("attainment of a decoupled product state") {
  const SystemSpec s = make({1, 1.5}, {1, 1}, {{0, 1, 0.0}}, true);
  const Grid g = Grid::make(1, 25.0, 0.05);
  const GroundStateResult r =
      minimize(s, ConstraintPartition::singletons(2), soliton_guess(s, g, {-4.0, 4.0}));
  const SeparationCurve c = sweep_separation(s, {0}, {1}, {6.0, 8.0, 10.0}, side_state(s, {0}, g),
                                             side_state(s, {1}, g));
  const AttainmentReport a = check_attainment(s, r, {c});
  CHECK(a.diagnosis == Diagnosis::Attained);
  CHECK(a.splits.size() == 1);
  CHECK(a.splits[0].decoupled);
  CHECK(a.splits[0].cross_term == 0.0);
}

TEST_CASE("translate ansatz in three dimensions") {
  SystemConfig cfg;
  cfg.dim = 3;
  cfg.k = 2;
  cfg.lambda = {1.0, 1.5};
  cfg.mu = {1.0, 1.0};
  cfg.allow_zero_coupling = true;
  AnsatzOptions o;
  o.spacing = 0.1;
  o.R_max = 10.0;

  cfg.couplings = {{0, 1, 0.0}};
  const SystemSpec free = build_system(cfg);
  const AnsatzResult a = translate_ansatz(free, ConstraintPartition::singletons(2), {0.0, 3.0}, o);
  CHECK(a.diagnosis == Diagnosis::Attained);
  const double sum = solve_scalar(1.0, 1.0, 3, Grid::make(1, 30.0, 0.1)).energy +
                     solve_scalar(1.5, 1.0, 3, Grid::make(1, 30.0, 0.1)).energy;
  CHECK(a.energy == doctest::Approx(sum).epsilon(1e-4));

  cfg.couplings = {{0, 1, 0.5}};
  const AnsatzResult b = translate_ansatz(build_system(cfg), ConstraintPartition::singletons(2), {0.0, 3.0}, o);
  CHECK(b.diagnosis == Diagnosis::Attained);
  CHECK(std::abs(b.centers[1] - b.centers[0]) < 1e-12);
  CHECK(b.energy < sum);

  cfg.couplings = {{0, 1, -0.5}};
  const AnsatzResult c = translate_ansatz(build_system(cfg), ConstraintPartition::singletons(2), {0.0, 3.0}, o);
  CHECK(c.diagnosis == Diagnosis::SplittingDetected);
  CHECK(c.energy > sum - 1e-9);
}
