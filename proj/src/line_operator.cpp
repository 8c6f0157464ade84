#include "cnls/line_operator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cnls {

namespace {

double ball_factor(int dim) {
  // omega_N / N, with omega_1 = 2 counting both half lines.
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    default: return 4.0 * std::numbers::pi / 3.0;
  }
}

}  // namespace

LineOperator LineOperator::cartesian(const Grid& g) {
  if (g.dim() != 1) throw InvalidInput("cartesian line operator needs a 1D grid");
  LineOperator op;
  op.kind = Kind::Cartesian;
  op.dim = 1;
  op.h = g.spacing();
  const int n = g.points() - 2;
  for (int i = 0; i < n; ++i) op.x.push_back(g.coord(i + 1));
  op.mass.assign(n, op.h);
  op.diag.assign(n, 2.0 / op.h);
  op.off.assign(n > 0 ? n - 1 : 0, -1.0 / op.h);
  return op;
}

LineOperator LineOperator::radial(int dim, double h, int n) {
  if (n < 3) throw InvalidInput("radial line operator needs at least three nodes");
  LineOperator op;
  op.kind = Kind::Radial;
  op.dim = dim;
  op.h = h;
  const double f = ball_factor(dim);
  auto vol = [&](double r) { return f * std::pow(r, dim); };
  for (int i = 0; i < n; ++i) {
    const double r = i * h;
    op.x.push_back(r);
    op.mass.push_back(i == 0 ? vol(0.5 * h) : vol(r + 0.5 * h) - vol(r - 0.5 * h));
  }
  std::vector<double> edge(n);  // edge i joins node i and i+1 (node n is the wall)
  for (int i = 0; i < n; ++i) edge[i] = (vol((i + 1) * h) - vol(i * h)) / (h * h);
  op.diag.assign(n, 0.0);
  op.off.assign(n - 1, 0.0);
  for (int i = 0; i < n; ++i) {
    op.diag[i] += edge[i];
    if (i > 0) op.diag[i] += edge[i - 1];
    if (i + 1 < n) op.off[i] = -edge[i];
  }
  return op;
}

double LineOperator::integrate(const Eigen::VectorXd& f) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += mass[i] * f[i];
  return s;
}

double LineOperator::dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += mass[i] * a[i] * b[i];
  return s;
}

Eigen::VectorXd LineOperator::apply(double c, const Eigen::VectorXd& v,
                                    const Eigen::VectorXd* extra) const {
  const int n = size();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double d = diag[i] + c * mass[i];
    if (extra) d += mass[i] * (*extra)[i];
    double s = d * v[i];
    if (i > 0) s += off[i - 1] * v[i - 1];
    if (i + 1 < n) s += off[i] * v[i + 1];
    out[i] = s;
  }
  return out;
}

Eigen::VectorXd LineOperator::solve(double c, const Eigen::VectorXd& rhs,
                                    const Eigen::VectorXd* extra) const {
  std::vector<double> d(diag);
  for (int i = 0; i < size(); ++i) {
    d[i] += c * mass[i];
    if (extra) d[i] += mass[i] * (*extra)[i];
  }
  return solve_tridiagonal(d, off, rhs);
}

Eigen::VectorXd solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                  const Eigen::VectorXd& rhs) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> c(n), d(n);
  double den = diag[0];
  if (den == 0.0) throw std::runtime_error("singular tridiagonal system");
  c[0] = n > 1 ? off[0] / den : 0.0;
  d[0] = rhs[0] / den;
  for (int i = 1; i < n; ++i) {
    den = diag[i] - off[i - 1] * c[i - 1];
    if (den == 0.0) throw std::runtime_error("singular tridiagonal system");
    c[i] = i + 1 < n ? off[i] / den : 0.0;
    d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / den;
  }
  Eigen::VectorXd x(n);
  x[n - 1] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace cnls
