#include "doctest.h"

#include "cnls/model.hpp"

#include <cmath>
#include <random>

using namespace cnls;

namespace {

SystemConfig case_d_config() {
  SystemConfig c;
  c.dim = 1;
  c.k = 3;
  c.lambda = {1, 2, 2.5};
  c.mu = {1, 1, 1};
  c.couplings = {{0, 1, 0.05}, {0, 2, 0.05}, {1, 2, -0.05}};
  return c;
}

Eigen::VectorXd sech_field(const Grid& g, double amp, double rate, double center) {
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.points(); ++i) v[i] = amp / std::cosh(rate * (g.coord(i) - center));
  zero_boundary(g, v);
  return v;
}

FieldVector smooth_fields(const Grid& g, int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.5, 1.5), C(-2.0, 2.0);
  FieldVector u(g, k);
  for (int j = 0; j < k; ++j) {
    const double a = U(rng), w = U(rng), c = C(rng), f = U(rng);
    for (int i = 0; i < g.points(); ++i) {
      const double x = g.coord(i);
      u[j][i] = a * std::exp(-w * (x - c) * (x - c)) * (1.0 + 0.3 * std::sin(f * x));
    }
    zero_boundary(g, u[j]);
  }
  return u;
}

}  // namespace

TEST_CASE("build_system symmetrizes and validates") {
  const SystemSpec s = build_system(case_d_config());
  CHECK(s.k == 3);
  CHECK(s.beta(1, 0) == doctest::Approx(0.05));
  CHECK(s.beta(2, 1) == doctest::Approx(-0.05));
  for (int j = 0; j < 3; ++j) CHECK(s.beta(j, j) == s.mu(j));

  SystemConfig bad = case_d_config();
  bad.lambda = {0, 1, 1};
  CHECK_THROWS_AS(build_system(bad), InvalidInput);

  bad = case_d_config();
  bad.couplings[2].value = 0.0;
  CHECK_THROWS_AS(build_system(bad), InvalidInput);

  bad = case_d_config();
  bad.couplings.clear();
  bad.beta = {{1, 0.05, 0.05}, {0.04, 1, -0.05}, {0.05, -0.05, 1}};
  CHECK_THROWS_AS(build_system(bad), InvalidInput);

  bad = case_d_config();
  bad.dim = 4;
  CHECK_THROWS_AS(build_system(bad), InvalidInput);
  bad = case_d_config();
  bad.k = 0;
  CHECK_THROWS_AS(build_system(bad), InvalidInput);

  SystemConfig upper = case_d_config();
  upper.couplings.clear();
  upper.beta = {{1, 0.05, 0.05}, {0, 1, -0.05}, {0, 0, 1}};
  CHECK(build_system(upper).beta.isApprox(s.beta));

  SystemConfig diag = case_d_config();
  diag.couplings.clear();
  diag.allow_zero_coupling = true;
  CHECK(build_system(diag).decoupled());
}

TEST_CASE("grid layout") {
  const Grid g = Grid::make(1, 40.0, 0.01);
  CHECK(g.points() == 8001);
  CHECK(g.coord(4000) == doctest::Approx(0.0));
  CHECK_THROWS_AS(Grid::make(1, 1.0, 0.3), InvalidInput);
  const Grid g3 = Grid::make(3, 2.0, 0.5);
  CHECK(g3.size() == 9u * 9u * 9u);
  CHECK(g3.on_boundary(0));
  CHECK_FALSE(g3.on_boundary(g3.stride(0) * 4 + g3.stride(1) * 4 + 4));
}

TEST_CASE("energy of the zero field and of the sech soliton") {
  SystemConfig c;
  c.k = 1;
  c.lambda = {1};
  c.mu = {1};
  const SystemSpec s = build_system(c);
  const Grid g = Grid::make(1, 40.0, 0.01);
  FieldVector u(g, 1);
  CHECK(energy(s, u) == 0.0);
  u[0] = sech_field(g, std::sqrt(2.0), 1.0, 0.0);
  // int 2 sech^2 = 4, int 4 sech^4 = 16/3, int 2 sech^2 tanh^2 = 4/3
  CHECK(l2_sq(g, u[0]) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(l4_pow4(g, u[0]) == doctest::Approx(16.0 / 3.0).epsilon(1e-10));
  CHECK(energy(s, u) == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("gradient matches central differences of the energy") {
  const SystemSpec s = build_system(case_d_config());
  const Grid g = Grid::make(1, 10.0, 0.05);
  const FieldVector u = smooth_fields(g, 3, 7);
  const FieldVector dir = smooth_fields(g, 3, 11);
  const FieldVector gr = gradient(s, u);
  double analytic = 0.0;
  for (int j = 0; j < 3; ++j) analytic += inner(g, gr[j], dir[j]);
  const double eps = 1e-4;
  FieldVector up = u, um = u;
  for (int j = 0; j < 3; ++j) {
    up[j] += eps * dir[j];
    um[j] -= eps * dir[j];
  }
  const double fd = (energy(s, up) - energy(s, um)) / (2 * eps);
  CHECK(std::abs(fd - analytic) <= 1e-6 * std::abs(analytic));
}

TEST_CASE("gradient of decoupled solitons shrinks at second order") {
  SystemConfig c = case_d_config();
  c.couplings.clear();
  c.allow_zero_coupling = true;
  const SystemSpec s = build_system(c);
  double prev = 0.0;
  for (double h : {0.04, 0.02}) {
    const Grid g = Grid::make(1, 30.0, h);
    FieldVector u(g, 3);
    for (int j = 0; j < 3; ++j)
      u[j] = sech_field(g, std::sqrt(2 * s.lambda(j)), std::sqrt(s.lambda(j)), 0.0);
    const double n = gradient_norm(gradient(s, u));
    CHECK(n < 10 * h * h);
    if (prev > 0.0) CHECK(prev / n == doctest::Approx(4.0).epsilon(0.02));
    prev = n;
  }
}

TEST_CASE("gradient is additive over components when decoupled") {
  SystemConfig c = case_d_config();
  c.couplings.clear();
  c.allow_zero_coupling = true;
  const SystemSpec s = build_system(c);
  const Grid g = Grid::make(1, 10.0, 0.05);
  const FieldVector u = smooth_fields(g, 3, 3);
  const FieldVector gr = gradient(s, u);
  for (int j = 0; j < 3; ++j) {
    const SystemSpec one = s.subsystem({j});
    FieldVector uj(g, 1);
    uj[0] = u[j];
    CHECK((gradient(one, uj)[0] - gr[j]).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("nehari residuals: grouping is a sum, on-manifold energy identity") {
  const SystemSpec s = build_system(case_d_config());
  const Grid g = Grid::make(1, 12.0, 0.02);
  FieldVector u = smooth_fields(g, 3, 5);
  const auto single = nehari_residuals(s, u, ConstraintPartition::singletons(3));
  const auto whole = nehari_residuals(s, u, ConstraintPartition::whole(3));
  CHECK(single.size() == 3);
  CHECK(whole[0] == doctest::Approx(single[0] + single[1] + single[2]).epsilon(1e-13));

  // a single component scaled onto its manifold: t^2 = ||u||_l^2 / (mu ||u||_4^4)
  const SystemSpec one = s.subsystem({1});
  FieldVector v(g, 1);
  v[0] = u[1];
  const double t2 = lambda_norm_sq(g, v[0], one.lambda(0)) / (one.mu(0) * l4_pow4(g, v[0]));
  v[0] *= std::sqrt(t2);
  CHECK(std::abs(nehari_residuals(one, v, ConstraintPartition::singletons(1))[0]) < 1e-12);
  CHECK(energy(one, v) ==
        doctest::Approx(0.25 * lambda_norm_sq(g, v[0], one.lambda(0))).epsilon(1e-10));

  FieldVector z(g, 3);
  z[0] = u[0];
  CHECK_THROWS_AS(nehari_residuals(s, z, ConstraintPartition::singletons(3)), InvalidInput);
  CHECK_NOTHROW(nehari_residuals(s, z, ConstraintPartition::whole(3)));
}

TEST_CASE("energy invariant under interior translation and index permutation") {
  const SystemSpec s = build_system(case_d_config());
  const Grid g = Grid::make(1, 15.0, 0.05);
  FieldVector u(g, 3), shifted(g, 3);
  for (int j = 0; j < 3; ++j) {
    u[j] = sech_field(g, 1.0 + 0.2 * j, 1.0 + 0.1 * j, 0.5 * j - 0.5);
    shifted[j] = sech_field(g, 1.0 + 0.2 * j, 1.0 + 0.1 * j, 0.5 * j - 0.5 + 20 * g.spacing());
  }
  CHECK(energy(s, shifted) == doctest::Approx(energy(s, u)).epsilon(1e-10));
  const auto r0 = nehari_residuals(s, u, ConstraintPartition::singletons(3));
  const auto r1 = nehari_residuals(s, shifted, ConstraintPartition::singletons(3));
  for (int j = 0; j < 3; ++j) CHECK(r1[j] == doctest::Approx(r0[j]).epsilon(1e-9));

  const std::vector<int> perm = {2, 0, 1};
  const SystemSpec sp = s.permuted(perm);
  FieldVector up(g, 3);
  for (int a = 0; a < 3; ++a) up[a] = u[perm[a]];
  CHECK(energy(sp, up) == doctest::Approx(energy(s, u)).epsilon(1e-14));
}

TEST_CASE("boundary mass and centroids") {
  const Grid g = Grid::make(1, 20.0, 0.05);
  FieldVector u(g, 2);
  u[0] = sech_field(g, 1.0, 1.0, -3.0);
  u[1] = sech_field(g, 1.0, 1.0, 4.0);
  const auto c = centroids(u);
  CHECK(c[0] == doctest::Approx(-3.0).epsilon(1e-6));
  CHECK(c[1] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(boundary_mass_fraction(u) < 1e-10);
  u[1] = sech_field(g, 1.0, 1.0, 19.0);
  CHECK(boundary_mass_fraction(u) > 1e-3);
}
