// Tridiagonal discretizations of -Lap on a line: the interior of a 1D box, or
// the radial part of -Lap on R^N with a vertex-centred mesh r_i = i h.
#pragma once

#include "cnls/model.hpp"

#include <Eigen/Dense>
#include <vector>

namespace cnls {

struct LineOperator {
  enum class Kind { Cartesian, Radial };

  Kind kind = Kind::Cartesian;
  int dim = 1;
  double h = 0.0;
  std::vector<double> x;     // node coordinates
  std::vector<double> mass;  // lumped quadrature weights
  std::vector<double> diag;  // stiffness: u^T S u approximates int |grad u|^2
  std::vector<double> off;   // off[i] couples node i and i+1

  // Interior nodes of a 1D grid, zero Dirichlet data at +-L.
  static LineOperator cartesian(const Grid& g);
  // Nodes r_i = i h, i < n, with u(n h) = 0.
  static LineOperator radial(int dim, double h, int n);

  int size() const { return static_cast<int>(x.size()); }
  double integrate(const Eigen::VectorXd& f) const;  // sum mass_i f_i
  double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  // (S + c M + diag(M extra)) v
  Eigen::VectorXd apply(double c, const Eigen::VectorXd& v,
                        const Eigen::VectorXd* extra = nullptr) const;
  // Solves (S + c M + diag(M extra)) v = rhs; the matrix must be SPD.
  Eigen::VectorXd solve(double c, const Eigen::VectorXd& rhs,
                        const Eigen::VectorXd* extra = nullptr) const;
};

// Thomas algorithm for a symmetric tridiagonal system.
Eigen::VectorXd solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                  const Eigen::VectorXd& rhs);

}  // namespace cnls
