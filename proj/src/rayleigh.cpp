#include "cnls/solver.hpp"

#include <cmath>

namespace cnls {

Eigen::VectorXd soliton_on(const LineOperator& op, double lambda, double mu) {
  const double extent = op.kind == LineOperator::Kind::Radial ? op.x.back() + op.h : op.h - op.x.front();
  const ScalarSoliton s = solve_scalar(lambda, mu, op.dim, profile_mesh(lambda, op.h, extent));
  Eigen::VectorXd w(op.size());
  for (int i = 0; i < op.size(); ++i) w[i] = s.profile.value(std::abs(op.x[i]));
  return w;
}

double rayleigh_min(const LineOperator& op, const Eigen::VectorXd& weight, double lambda) {
  if (weight.size() != op.size()) throw InvalidInput("weight does not match the operator");
  if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
  if ((weight.array() < 0.0).any() || !(weight.maxCoeff() > 0.0))
    throw InvalidInput("weight must be nonnegative and not identically zero");
  const Eigen::VectorXd mw = Eigen::Map<const Eigen::VectorXd>(op.mass.data(), op.size()).cwiseProduct(weight);

  Eigen::VectorXd v = weight;
  double rho = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd next = op.solve(lambda, mw.cwiseProduct(v));
    next /= next.norm();
    const double num = next.dot(op.apply(lambda, next));
    const double den = next.dot(mw.cwiseProduct(next));
    const double r = num / den;
    v = std::move(next);
    if (it > 2 && std::abs(r - rho) <= 1e-15 * r) return r;
    rho = r;
  }
  throw SolverError("inverse iteration did not converge");
}

double rho_hat(const LineOperator& op, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
               double lambda_l) {
  return rayleigh_min(op, phi_i.cwiseAbs2() + phi_j.cwiseAbs2(), lambda_l);
}

double d_tilde_quotient(const LineOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        double lambda_i, double lambda_j) {
  const double a = u.dot(op.apply(lambda_i, u));
  const double b = v.dot(op.apply(lambda_j, v));
  const double c = op.integrate(u.cwiseProduct(v).cwiseAbs2());
  if (!(c > 0.0)) throw InvalidInput("components do not overlap");
  return (a + b) * (a + b) / (8.0 * c);
}

DTilde d_tilde(const LineOperator& op, double lambda_i, double lambda_j, int max_iter) {
  if (!(lambda_i > 0.0) || !(lambda_j > 0.0)) throw InvalidInput("lambda must be positive");
  const Eigen::VectorXd mass = Eigen::Map<const Eigen::VectorXd>(op.mass.data(), op.size());
  auto normalize = [&](Eigen::VectorXd& f, double lambda) { f /= std::sqrt(2.0 * f.dot(op.apply(lambda, f))); };

  // Normalized fixed point on ||u||^2 = ||v||^2 = 1/2, where the quotient
  // is 1 / (8 ||uv||^2).  Symmetric seed, so the iteration never sees
  // translations.
  Eigen::VectorXd u = soliton_on(op, 0.5 * (lambda_i + lambda_j), 1.0), v = u;
  normalize(u, lambda_i);
  normalize(v, lambda_j);
  DTilde r;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd nu = op.solve(lambda_i, mass.cwiseProduct(v.cwiseAbs2()).cwiseProduct(u));
    normalize(nu, lambda_i);
    Eigen::VectorXd nv = op.solve(lambda_j, mass.cwiseProduct(nu.cwiseAbs2()).cwiseProduct(v));
    normalize(nv, lambda_j);
    if (!nu.allFinite() || !nv.allFinite()) throw SolverError("d_tilde iteration diverged");
    const double change = (nu - u).cwiseAbs().maxCoeff() + (nv - v).cwiseAbs().maxCoeff();
    u = std::move(nu);
    v = std::move(nv);
    r.iterations = it;
    if (change <= 1e-12 * u.cwiseAbs().maxCoeff()) break;
    if (it == max_iter) throw SolverError("d_tilde iteration did not converge");
  }
  const double c = op.integrate(u.cwiseProduct(v).cwiseAbs2());
  r.value = 1.0 / (8.0 * c);
  const double s = std::sqrt(1.0 / (2.0 * c));
  r.u = s * u;
  r.v = s * v;
  return r;
}

double beta_bar(const LineOperator& op, double lambda_i, double mu_i, double lambda_j, double mu_j) {
  const Eigen::VectorXd wi = soliton_on(op, lambda_i, mu_i), wj = soliton_on(op, lambda_j, mu_j);
  return std::max(rayleigh_min(op, wi.cwiseAbs2(), lambda_j), rayleigh_min(op, wj.cwiseAbs2(), lambda_i));
}

}  // namespace cnls
