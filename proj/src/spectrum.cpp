#include "cnls/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cnls {

std::vector<std::size_t> interior_nodes(const Grid& g) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (!g.on_boundary(p)) out.push_back(p);
  return out;
}

Eigen::SparseMatrix<double> neg_laplacian_matrix(const Grid& g) {
  const auto nodes = interior_nodes(g);
  std::vector<long> pos(g.size(), -1);
  for (std::size_t a = 0; a < nodes.size(); ++a) pos[nodes[a]] = static_cast<long>(a);
  const double ih2 = 1.0 / (g.spacing() * g.spacing());
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const std::size_t p = nodes[a];
    t.emplace_back(a, a, 2.0 * g.dim() * ih2);
    for (int ax = 0; ax < g.dim(); ++ax) {
      const std::size_t st = g.stride(ax);
      for (std::size_t q : {p - st, p + st})
        if (pos[q] >= 0) t.emplace_back(a, pos[q], -ih2);
    }
  }
  Eigen::SparseMatrix<double> L(nodes.size(), nodes.size());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

Eigen::SparseMatrix<double> hessian(const SystemSpec& spec, const FieldVector& u) {
  check_compatible(spec, u);
  const Grid& g = u.grid;
  const auto nodes = interior_nodes(g);
  const long m = static_cast<long>(nodes.size());
  const Eigen::SparseMatrix<double> L = neg_laplacian_matrix(g);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(L.nonZeros()) * spec.k + spec.k * spec.k * m);
  for (int j = 0; j < spec.k; ++j) {
    const long o = j * m;
    for (int c = 0; c < L.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(L, c); it; ++it)
        t.emplace_back(o + it.row(), o + it.col(), it.value());
    for (long a = 0; a < m; ++a) {
      const std::size_t p = nodes[a];
      double d = spec.lambda(j) - 3.0 * spec.mu(j) * u[j][p] * u[j][p];
      for (int i = 0; i < spec.k; ++i)
        if (i != j) d -= spec.beta(i, j) * u[i][p] * u[i][p];
      t.emplace_back(o + a, o + a, d);
      for (int i = 0; i < spec.k; ++i)
        if (i != j && spec.beta(i, j) != 0.0)
          t.emplace_back(o + a, i * m + a, -2.0 * spec.beta(i, j) * u[i][p] * u[j][p]);
    }
  }
  Eigen::SparseMatrix<double> H(spec.k * m, spec.k * m);
  H.setFromTriplets(t.begin(), t.end());
  return H;
}

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

double gershgorin_lower(const Eigen::SparseMatrix<double>& H) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(H.rows()), rad = Eigen::VectorXd::Zero(H.rows());
  for (int c = 0; c < H.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(H, c); it; ++it) {
      if (it.row() == it.col())
        diag(it.row()) += it.value();
      else
        rad(it.row()) += std::abs(it.value());
    }
  return (diag - rad).minCoeff();
}

}  // namespace

EigenPairs lowest_eigenpairs(const Eigen::SparseMatrix<double>& H, int count, double residual_tol,
                             int max_iter, unsigned seed, double converge_below) {
  const long n = H.rows();
  if (count < 1 || count > n) throw InvalidInput("eigenpair count out of range");
  const long p = std::min<long>(n, count + 6);
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();

  double shift = gershgorin_lower(H) - 1.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  auto factor = [&](double s) {
    solver.compute(H - s * I);
    if (solver.info() != Eigen::Success) throw SolverError("shifted Hessian factorization failed");
  };
  factor(shift);

  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(n, p);
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < p; ++b) X(a, b) = nd(rng);
  X = orthonormalize(X);

  bool reshifted = false;
  Eigen::VectorXd theta, prev = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd Q = orthonormalize(solver.solve(X));
    const Eigen::MatrixXd HQ = H * Q;
    Eigen::MatrixXd T = Q.transpose() * HQ;
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    theta = es.eigenvalues();
    X = Q * es.eigenvectors();
    const Eigen::MatrixXd R = HQ * es.eigenvectors() - X * theta.asDiagonal();
    // pairs above the cut only need settled Ritz values
    bool done = it > 2;
    for (int a = 0; a < count && done; ++a) {
      const double scale = std::max(1.0, std::abs(theta(a)));
      if (theta(a) >= converge_below)
        done = std::abs(theta(a) - prev(a)) <= 1e-8 * scale;
      else
        done = R.col(a).norm() <= residual_tol * scale;
    }
    if (done) return {theta.head(count), X.leftCols(count), it};
    prev = theta;
    if (!reshifted && it >= 20) {
      // move the pole next to the bottom of the spectrum
      shift = theta(0) - std::max(0.5, 0.1 * std::abs(theta(0)));
      factor(shift);
      reshifted = true;
    }
  }
  throw SolverError("eigensolver did not converge in " + std::to_string(max_iter) + " iterations");
}

MorseResult morse_index(const SystemSpec& spec, const FieldVector& u, const MorseOptions& opts) {
  check_compatible(spec, u);
  const double gn = gradient_norm(gradient(spec, u));
  if (gn > opts.gradient_tol)
    throw SolverError("morse_index: state is not critical (gradient norm " + std::to_string(gn) + ")");

  const Grid& g = u.grid;
  const auto nodes = interior_nodes(g);
  const long m = static_cast<long>(nodes.size());
  const Eigen::SparseMatrix<double> H = hessian(spec, u);
  const int count = std::min<long>(H.rows(), opts.eigenvalues > 0 ? opts.eigenvalues
                                                                    : spec.k + spec.k * spec.dim + 2);
  const EigenPairs ep = lowest_eigenpairs(H, count, opts.residual_tol, opts.max_iter, opts.seed,
                                           0.5 * spec.lambda_min());

  // translations: d/dx_a of each component, central differences
  std::vector<Eigen::VectorXd> trans;
  for (int ax = 0; ax < g.dim(); ++ax) {
    const std::size_t st = g.stride(ax);
    for (int j = 0; j < spec.k; ++j) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(spec.k * m);
      for (long a = 0; a < m; ++a) {
        const std::size_t p = nodes[a];
        t(j * m + a) = (u[j][p + st] - u[j][p - st]) / (2.0 * g.spacing());
      }
      if (t.norm() > 0.0) trans.push_back(t);
    }
  }
  Eigen::MatrixXd T(spec.k * m, static_cast<long>(trans.size()));
  for (std::size_t a = 0; a < trans.size(); ++a) T.col(static_cast<long>(a)) = trans[a];
  const Eigen::MatrixXd TQ = trans.empty() ? T : orthonormalize(T);

  MorseResult r;
  r.iterations = ep.iterations;
  r.eigenvalues.assign(ep.values.data(), ep.values.data() + ep.values.size());
  r.zero_tol = opts.zero_tol >= 0.0 ? opts.zero_tol : 1e-6 * ep.values.cwiseAbs().maxCoeff();
  for (int a = 0; a < count; ++a) {
    const double th = ep.values(a);
    if (std::abs(th) <= r.zero_tol) {
      ++r.zero_modes;
      continue;
    }
    if (th < 0.0) {
      const double overlap = trans.empty() ? 0.0 : (TQ.transpose() * ep.vectors.col(a)).norm();
      if (overlap > 0.9) {
        ++r.translation_modes;
        ++r.zero_modes;
      } else {
        ++r.index;
      }
    }
  }
  return r;
}

}  // namespace cnls
