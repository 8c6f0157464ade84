// Variational machinery on Nehari-type manifolds: multiplier projection,
// constrained descent, separation sweeps, Hessian spectra, Rayleigh-quotient
// constants and the attainment diagnostic.
#pragma once

#include "cnls/line_operator.hpp"
#include "cnls/model.hpp"
#include "cnls/scalar.hpp"

#include <Eigen/Sparse>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnls {

class ProjectionInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Multiplier projection

// Per-component data the projection needs: lambda-norms and the matrix of
// quartic couplings Q_ij = ||u_i u_j||_2^2 (Q_jj = ||u_j||_4^4).
struct GramData {
  Eigen::VectorXd norms;
  Eigen::MatrixXd quartic;
};

GramData gram_data(const FieldVector& u, const SystemSpec& spec);

struct Multipliers {
  std::vector<double> t;  // per group
  double condition = 0.0;
};

// Solves A t^2 = b with A[g][h] = sum_{i in g, j in h} beta_ij Q_ij and
// b[g] = sum_{j in g} norms_j.
Multipliers solve_multipliers(const SystemSpec& spec, const GramData& d,
                              const ConstraintPartition& partition);

struct ProjectionResult {
  FieldVector fields;
  std::vector<double> t;
  double condition = 0.0;
};

ProjectionResult project_nehari(const SystemSpec& spec, const FieldVector& u,
                                const ConstraintPartition& partition);

// ---------------------------------------------------------------------------
// Minimization

enum class Diagnosis { Attained, SplittingDetected, MaxIterations, TrivialComponent };
std::string to_string(Diagnosis d);

struct MinimizeOptions {
  double tol_g = 1e-8;
  double tol_E = 1e-12;
  int window = 20;
  int max_iter = 20000;
  double tol_split = 1e-3;
  std::vector<double> split_limits;  // energies of split configurations, if known
  double split_fraction = 0.6;       // of the box half-width
  int split_window = 50;
  double triviality = 1e-4;
  int max_shrinks = 10;
  bool precondition = true;  // H^1-type (-Lap + lambda_j)^{-1} metric
  int history = 400;
};

struct GroundStateResult {
  FieldVector fields;
  ConstraintPartition partition;
  double energy = 0.0;
  std::vector<double> residuals;
  double gradient_norm = 0.0;
  int morse_index = -1;  // -1 when not computed
  int zero_modes = -1;
  std::vector<double> centroids;
  std::vector<double> masses;
  Diagnosis diagnosis = Diagnosis::MaxIterations;
  int iterations = 0;
  double boundary_mass = 0.0;
  double condition = 0.0;
  std::vector<double> energy_history;      // last accepted iterates
  std::vector<double> separation_history;  // max inter-centroid distance
  std::string note;
};

GroundStateResult minimize(const SystemSpec& spec, const ConstraintPartition& partition,
                           const FieldVector& init, const MinimizeOptions& opts = {});

// Decoupled solitons w_j centred at centers[j] (1D grids: along x; N-D: on
// the first axis).
FieldVector soliton_guess(const SystemSpec& spec, const Grid& grid, const std::vector<double>& centers);

// 1D mesh for solve_scalar covering at least 40 decay lengths.
Grid profile_mesh(double lambda, double h, double extent);

// Max over pairs of |c_i - c_j|.
double max_separation(const std::vector<double>& centroids);

// ---------------------------------------------------------------------------
// Translate ansatz (N = 2, 3)
//
// Components are the scalar soliton shapes placed at centres on the first
// axis.  Amplitudes come from the multiplier projection, the centres from a
// lattice pattern search on the projected energy.  Pair overlaps are
// tabulated once on the cylindrical lattice.

struct AnsatzOptions {
  double spacing = 0.05;  // lattice for centres and overlap tables
  double R_max = 0.0;     // 0: 16 decay lengths of the slowest component
  int max_iter = 100000;
};

struct AnsatzResult {
  std::vector<double> centers;
  std::vector<double> t;  // per group
  double energy = 0.0;
  double condition = 0.0;
  GramData gram;
  Diagnosis diagnosis = Diagnosis::MaxIterations;
  int evaluations = 0;
  std::string note;
};

AnsatzResult translate_ansatz(const SystemSpec& spec, const ConstraintPartition& partition,
                              const std::vector<double>& init_centers, const AnsatzOptions& opts = {});

// ---------------------------------------------------------------------------
// Separation sweeps

struct SeparationCurve {
  std::vector<int> left, right;
  std::vector<double> R;
  std::vector<double> energy;
  std::vector<std::vector<double>> multipliers;
  std::vector<double> skipped;  // separations where the projection failed
  double left_energy = 0.0, right_energy = 0.0;
  double limit = 0.0;
  double min_energy = 0.0;
  double argmin_R = 0.0;
  bool below_limit = false;  // some point strictly below the limit
  bool interior = false;     // ... at a separation strictly inside the grid
};

// Ground state of the sub-system on `idx` (singleton constraints), started
// from co-located solitons.
GroundStateResult side_state(const SystemSpec& spec, const std::vector<int>& idx, const Grid& grid,
                             const MinimizeOptions& opts = {});

SeparationCurve sweep_separation(const SystemSpec& spec, const std::vector<int>& left,
                                 const std::vector<int>& right, const std::vector<double>& R_grid,
                                 const GroundStateResult& left_state,
                                 const GroundStateResult& right_state);

// Shifts every component by s grid nodes along the first axis, zero fill.
// Returns the fraction of mass pushed off the grid.
double shift_fields(FieldVector& u, long s);

// ---------------------------------------------------------------------------
// Second variation

// Interior-node Hessian of the energy in the L2 sense (symmetric).
Eigen::SparseMatrix<double> hessian(const SystemSpec& spec, const FieldVector& u);
std::vector<std::size_t> interior_nodes(const Grid& g);
// -Lap_h restricted to interior nodes, ordered as interior_nodes().
Eigen::SparseMatrix<double> neg_laplacian_matrix(const Grid& g);

struct MorseOptions {
  double zero_tol = -1.0;  // < 0: 1e-6 * largest computed |eigenvalue|
  int eigenvalues = 0;     // 0: k + kN + 2
  double gradient_tol = 1e-5;
  double residual_tol = 1e-9;
  int max_iter = 3000;
  unsigned seed = 12345;
};

struct MorseResult {
  int index = 0;
  int zero_modes = 0;
  int translation_modes = 0;  // near-zero or negative modes matched to d/dx u
  std::vector<double> eigenvalues;
  double zero_tol = 0.0;
  int iterations = 0;
};

MorseResult morse_index(const SystemSpec& spec, const FieldVector& u, const MorseOptions& opts = {});

// Lowest eigenpairs of a sparse symmetric matrix by shift-invert block
// subspace iteration with Rayleigh-Ritz.  Ritz pairs at or above
// converge_below are returned without a residual check.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int iterations = 0;
};
EigenPairs lowest_eigenpairs(const Eigen::SparseMatrix<double>& H, int count, double residual_tol,
                             int max_iter, unsigned seed,
                             double converge_below = std::numeric_limits<double>::infinity());

// ---------------------------------------------------------------------------
// Rayleigh quotients on a line operator

// Smallest rho with (S + lambda M) v = rho M W v, i.e. inf ||v||_lambda^2 / int W v^2.
double rayleigh_min(const LineOperator& op, const Eigen::VectorXd& weight, double lambda);

double rho_hat(const LineOperator& op, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
               double lambda_l);

struct DTilde {
  double value = 0.0;
  Eigen::VectorXd u, v;  // scaled to solve -Lap u + l_i u = v^2 u, -Lap v + l_j v = u^2 v
  int iterations = 0;
};

DTilde d_tilde(const LineOperator& op, double lambda_i, double lambda_j, int max_iter = 20000);

// (||u||_{l_i}^2 + ||v||_{l_j}^2)^2 / (8 ||u v||_2^2)
double d_tilde_quotient(const LineOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        double lambda_i, double lambda_j);

// Two-component attainment threshold: max of inf ||u||_{l_j}^2 / ||w_i u||^2
// and the same with i, j swapped, w the scalar solitons.
double beta_bar(const LineOperator& op, double lambda_i, double mu_i, double lambda_j, double mu_j);

// Scalar soliton sampled on the operator's nodes.
Eigen::VectorXd soliton_on(const LineOperator& op, double lambda, double mu);

// ---------------------------------------------------------------------------
// Attainment

struct SplitCertificate {
  std::vector<int> left, right;
  double limit = 0.0;
  double margin = 0.0;      // limit - energy
  double cross_term = 0.0;  // sum over the split of beta_ij ||u_i u_j||^2
  double separation = 0.0;  // distance between the two sides' mass centres
  bool decoupled = false;
};

struct AttainmentReport {
  Diagnosis diagnosis = Diagnosis::MaxIterations;
  double energy = 0.0;
  double tol_split = 0.0;
  std::vector<SplitCertificate> splits;
  int diverging_split = -1;
  std::string note;
};

AttainmentReport check_attainment(const SystemSpec& spec, const GroundStateResult& result,
                                  const std::vector<SeparationCurve>& sweeps, double tol_split = 1e-3);

}  // namespace cnls
