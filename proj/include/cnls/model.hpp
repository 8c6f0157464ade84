// System parameters, grids, field vectors and the energy functional of a
// k-component cubic Schrodinger system
//
//   -Lap u_j + lambda_j u_j = mu_j u_j^3 + sum_{i != j} beta_ij u_i^2 u_j
//
// on a truncated box [-L, L]^N with zero Dirichlet data.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnls {

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Coupling {
  int i = 0;  // zero based
  int j = 0;
  double value = 0.0;
};

// Raw parameters as they come out of a config file.  Couplings may be given
// as a full (or upper-triangular) matrix or as a list of pairs.
struct SystemConfig {
  int dim = 1;
  int k = 0;
  std::vector<double> lambda;
  std::vector<double> mu;
  std::vector<std::vector<double>> beta;
  std::vector<Coupling> couplings;
  bool allow_zero_coupling = false;  // diagnostic decoupled runs
};

struct SystemSpec {
  int dim = 1;
  int k = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  Eigen::MatrixXd beta;  // symmetric, diagonal holds mu

  // Restriction to the listed components, in the listed order.
  SystemSpec subsystem(const std::vector<int>& idx) const;
  SystemSpec permuted(const std::vector<int>& perm) const;
  bool decoupled() const;
  double lambda_min() const { return lambda.minCoeff(); }
};

SystemSpec build_system(const SystemConfig& cfg);

class Grid {
 public:
  Grid() = default;
  static Grid make(int dim, double extent, double spacing);

  int dim() const { return dim_; }
  double extent() const { return extent_; }
  double spacing() const { return h_; }
  int points() const { return n_; }  // per axis
  std::size_t size() const { return size_; }
  double coord(int i) const { return -extent_ + i * h_; }
  double cell() const;  // h^N
  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && h_ == o.h_ && extent_ == o.extent_;
  }
  std::size_t stride(int axis) const;
  bool on_boundary(std::size_t flat) const;
  // Fills idx[0..dim) with the per-axis indices of a flat index.
  void unflatten(std::size_t flat, int* idx) const;

 private:
  int dim_ = 1;
  double extent_ = 1.0;
  double h_ = 1.0;
  int n_ = 3;
  std::size_t size_ = 3;
};

struct FieldVector {
  Grid grid;
  std::vector<Eigen::VectorXd> components;

  FieldVector() = default;
  FieldVector(Grid g, int k);
  int k() const { return static_cast<int>(components.size()); }
  Eigen::VectorXd& operator[](int j) { return components[j]; }
  const Eigen::VectorXd& operator[](int j) const { return components[j]; }
  void check_finite() const;
};

struct ConstraintPartition {
  std::vector<std::vector<int>> groups;

  static ConstraintPartition singletons(int k);
  static ConstraintPartition whole(int k);
  void validate(int k) const;
  int group_of(int j) const;
  std::string str() const;  // 1-based, e.g. "{1,2}|{3}"
};

// Discrete inner products and norms.  All sums run over interior nodes only,
// boundary values are treated as zero.
double inner(const Grid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double dirichlet_form(const Grid& g, const Eigen::VectorXd& u);  // sum |grad_h u|^2
double lambda_norm_sq(const Grid& g, const Eigen::VectorXd& u, double lambda);
double l2_sq(const Grid& g, const Eigen::VectorXd& u);
double l4_pow4(const Grid& g, const Eigen::VectorXd& u);
double product_l2_sq(const Grid& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
// -Lap_h u with zero boundary values; zero on boundary nodes.
Eigen::VectorXd neg_laplacian(const Grid& g, const Eigen::VectorXd& u);
void zero_boundary(const Grid& g, Eigen::VectorXd& u);

double energy(const SystemSpec& spec, const FieldVector& u);
FieldVector gradient(const SystemSpec& spec, const FieldVector& u);
double gradient_norm(const FieldVector& grad);  // discrete L2 norm
std::vector<double> nehari_residuals(const SystemSpec& spec, const FieldVector& u,
                                     const ConstraintPartition& partition);

// Fraction of sum ||u_j||^2 carried by the outer 10% shell of the box.
double boundary_mass_fraction(const FieldVector& u);
// Mass center of u_j^2 along the first axis.
std::vector<double> centroids(const FieldVector& u);

void check_compatible(const SystemSpec& spec, const FieldVector& u);

}  // namespace cnls
