#include "cnls/solver.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace cnls {

GramData gram_data(const FieldVector& u, const SystemSpec& spec) {
  check_compatible(spec, u);
  const Grid& g = u.grid;
  GramData d;
  d.norms.resize(spec.k);
  d.quartic = Eigen::MatrixXd::Zero(spec.k, spec.k);
  for (int j = 0; j < spec.k; ++j) {
    d.norms(j) = lambda_norm_sq(g, u[j], spec.lambda(j));
    d.quartic(j, j) = l4_pow4(g, u[j]);
    for (int i = 0; i < j; ++i)
      d.quartic(i, j) = d.quartic(j, i) = product_l2_sq(g, u[i], u[j]);
  }
  return d;
}

Multipliers solve_multipliers(const SystemSpec& spec, const GramData& d,
                              const ConstraintPartition& partition) {
  partition.validate(spec.k);
  const int G = static_cast<int>(partition.groups.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(G, G);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(G);
  for (int a = 0; a < G; ++a) {
    for (int i : partition.groups[a]) {
      b(a) += d.norms(i);
      for (int c = 0; c < G; ++c)
        for (int j : partition.groups[c]) A(a, c) += spec.beta(i, j) * d.quartic(i, j);
    }
    if (!(b(a) > 0.0))
      throw ProjectionInfeasible("constraint group " + std::to_string(a + 1) + " carries no field");
  }
  if (!A.allFinite() || !b.allFinite()) throw ProjectionInfeasible("non-finite projection data");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(G - 1);
  if (!(smax > 0.0) || smin <= 1e-13 * smax)
    throw ProjectionInfeasible("projection matrix is singular");

  const Eigen::VectorXd s = A.fullPivLu().solve(b);
  Multipliers m;
  m.condition = smax / smin;
  for (int a = 0; a < G; ++a) {
    if (!(s(a) > 0.0) || !std::isfinite(s(a))) {
      std::ostringstream os;
      os << "no positive scaling for constraint group " << a + 1 << " (t^2 = " << s(a) << ")";
      throw ProjectionInfeasible(os.str());
    }
    m.t.push_back(std::sqrt(s(a)));
  }
  return m;
}

ProjectionResult project_nehari(const SystemSpec& spec, const FieldVector& u,
                                const ConstraintPartition& partition) {
  const Multipliers m = solve_multipliers(spec, gram_data(u, spec), partition);
  ProjectionResult r{u, m.t, m.condition};
  for (std::size_t a = 0; a < partition.groups.size(); ++a)
    for (int j : partition.groups[a]) r.fields[j] *= m.t[a];
  return r;
}

}  // namespace cnls
