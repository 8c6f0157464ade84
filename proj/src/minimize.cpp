#include "cnls/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

namespace cnls {

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::Attained: return "Attained";
    case Diagnosis::SplittingDetected: return "SplittingDetected";
    case Diagnosis::MaxIterations: return "MaxIterations";
    case Diagnosis::TrivialComponent: return "TrivialComponent";
  }
  return "?";
}

double max_separation(const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) s = std::max(s, std::abs(c[i] - c[j]));
  return s;
}

Grid profile_mesh(double lambda, double h, double extent) {
  // long enough for the profile to decay to roundoff; the tail is analytic beyond
  const double L = std::max(extent, 40.0 / std::sqrt(lambda));
  return Grid::make(1, h * std::ceil(L / h), h);
}

FieldVector soliton_guess(const SystemSpec& spec, const Grid& grid, const std::vector<double>& centers) {
  if (static_cast<int>(centers.size()) != spec.k) throw InvalidInput("need one centre per component");
  if (grid.dim() != spec.dim) throw InvalidInput("grid dimension does not match the system");
  FieldVector u(grid, spec.k);
  for (int j = 0; j < spec.k; ++j) {
    const ScalarSoliton s = solve_scalar(spec.lambda(j), spec.mu(j), spec.dim,
                                         profile_mesh(spec.lambda(j), grid.spacing(), grid.extent()));
    u[j] = sample_on_grid(s.profile, grid, centers[j]);
  }
  return u;
}

namespace {

// (-Lap_h + lambda_j)^{-1} on interior nodes.
class Preconditioner {
 public:
  Preconditioner(const Grid& g, const Eigen::VectorXd& lambda) : g_(g), lambda_(lambda) {
    if (g.dim() == 1) return;
    nodes_ = interior_nodes(g);
    const Eigen::SparseMatrix<double> L = neg_laplacian_matrix(g);
    for (int j = 0; j < lambda.size(); ++j) {
      if (solvers_.count(lambda(j))) continue;
      Eigen::SparseMatrix<double> I(L.rows(), L.cols());
      I.setIdentity();
      auto s = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
      s->compute(L + lambda(j) * I);
      if (s->info() != Eigen::Success) throw SolverError("preconditioner factorization failed");
      solvers_[lambda(j)] = s;
    }
  }

  Eigen::VectorXd apply(int j, const Eigen::VectorXd& r) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(r.size());
    const double h = g_.spacing();
    if (g_.dim() == 1) {
      const int m = g_.points() - 2;
      std::vector<double> d(m, 2.0 / (h * h) + lambda_(j)), o(m > 0 ? m - 1 : 0, -1.0 / (h * h));
      out.segment(1, m) = solve_tridiagonal(d, o, r.segment(1, m));
      return out;
    }
    Eigen::VectorXd rr(nodes_.size());
    for (std::size_t a = 0; a < nodes_.size(); ++a) rr[a] = r[nodes_[a]];
    const Eigen::VectorXd z = solvers_.at(lambda_(j))->solve(rr);
    for (std::size_t a = 0; a < nodes_.size(); ++a) out[nodes_[a]] = z[a];
    return out;
  }

 private:
  Grid g_;
  Eigen::VectorXd lambda_;
  std::vector<std::size_t> nodes_;
  std::map<double, std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>> solvers_;
};

double metric_sq(const SystemSpec& spec, const FieldVector& s) {
  double t = 0.0;
  for (int j = 0; j < spec.k; ++j) t += lambda_norm_sq(s.grid, s[j], spec.lambda(j));
  return t;
}

double l2_dot(const FieldVector& a, const FieldVector& b) {
  double t = 0.0;
  for (int j = 0; j < a.k(); ++j) t += inner(a.grid, a[j], b[j]);
  return t;
}

template <class T>
void push_capped(std::vector<T>& v, T x, int cap) {
  v.push_back(x);
  if (cap > 0 && static_cast<int>(v.size()) > cap) v.erase(v.begin());
}

}  // namespace

GroundStateResult minimize(const SystemSpec& spec, const ConstraintPartition& partition,
                           const FieldVector& init, const MinimizeOptions& opts) {
  check_compatible(spec, init);
  partition.validate(spec.k);
  if (opts.tol_g <= 0.0 || opts.tol_E < 0.0 || opts.window < 1 || opts.max_iter < 1)
    throw InvalidInput("minimize: bad tolerances");

  const Grid& g = init.grid;
  Preconditioner P(g, spec.lambda);

  FieldVector u = init;
  for (auto& c : u.components) zero_boundary(g, c);
  ProjectionResult pr = project_nehari(spec, u, partition);
  u = pr.fields;
  double E = energy(spec, u);
  FieldVector grad = gradient(spec, u);

  GroundStateResult res;
  res.partition = partition;
  res.condition = pr.condition;

  std::deque<double> window;
  std::vector<double> seps;  // full history is short enough to keep
  double tau = 1.0;
  bool converged = false, split = false, stalled = false, edge = false;
  const double slack = 8.0 * std::numeric_limits<double>::epsilon();
  const double split_at = opts.split_fraction * g.extent();
  const double split_floor =
      opts.split_limits.empty() ? -std::numeric_limits<double>::infinity()
                                : *std::min_element(opts.split_limits.begin(), opts.split_limits.end()) -
                                      opts.tol_split;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double gn = gradient_norm(grad);
    window.push_back(E);
    if (static_cast<int>(window.size()) > opts.window) window.pop_front();
    const double sep = max_separation(centroids(u));
    seps.push_back(sep);
    push_capped(res.energy_history, E, opts.history);
    push_capped(res.separation_history, sep, opts.history);

    if (gn <= opts.tol_g && static_cast<int>(window.size()) == opts.window) {
      const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
      if (*hi - *lo <= opts.tol_E) {
        converged = true;
        break;
      }
    }
    if (spec.k > 1 && sep > split_at && static_cast<int>(seps.size()) > opts.split_window &&
        E >= split_floor) {
      bool growing = true;
      for (std::size_t a = seps.size() - opts.split_window; a < seps.size(); ++a)
        growing = growing && seps[a] >= seps[a - 1];
      if (growing) {
        split = true;
        break;
      }
    }

    FieldVector dir(g, spec.k);
    for (int j = 0; j < spec.k; ++j) dir[j] = opts.precondition ? P.apply(j, grad[j]) : grad[j];

    bool accepted = false;
    int infeasible = 0;
    FieldVector v;
    double Ev = E;
    for (int ls = 0; ls < 60; ++ls) {
      FieldVector trial = u;
      for (int j = 0; j < spec.k; ++j) trial[j] -= tau * dir[j];
      try {
        ProjectionResult q = project_nehari(spec, trial, partition);
        v = std::move(q.fields);
        res.condition = q.condition;
      } catch (const ProjectionInfeasible&) {
        if (++infeasible > opts.max_shrinks) {
          edge = true;
          break;
        }
        tau *= 0.5;
        continue;
      }
      Ev = energy(spec, v);
      if (Ev <= E + slack * std::abs(E)) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }

    FieldVector gv = gradient(spec, v);
    FieldVector s(g, spec.k), y(g, spec.k);
    for (int j = 0; j < spec.k; ++j) {
      s[j] = v[j] - u[j];
      y[j] = gv[j] - grad[j];
    }
    const double sy = l2_dot(s, y);
    const double ss = opts.precondition ? metric_sq(spec, s) : l2_dot(s, s);
    if (sy > 0.0 && ss > 0.0)
      tau = std::clamp(ss / sy, 1e-6, 1e3);
    else
      tau = std::min(2.0 * tau, 1e3);
    u = std::move(v);
    E = Ev;
    grad = std::move(gv);
  }

  res.fields = u;
  res.energy = E;
  res.iterations = it;
  res.gradient_norm = gradient_norm(grad);
  res.residuals = nehari_residuals(spec, u, partition);
  res.centroids = centroids(u);
  for (int j = 0; j < spec.k; ++j) res.masses.push_back(l2_sq(g, u[j]));
  res.boundary_mass = boundary_mass_fraction(u);

  const double mmax = *std::max_element(res.masses.begin(), res.masses.end());
  bool trivial = false;
  for (double m : res.masses) trivial = trivial || m < opts.triviality * mmax;

  std::ostringstream note;
  if (split) {
    res.diagnosis = Diagnosis::SplittingDetected;
    note << "centroid separation " << seps.back() << " exceeds " << split_at
         << " and kept growing while the energy decreased";
  } else if (converged) {
    res.diagnosis = trivial ? Diagnosis::TrivialComponent : Diagnosis::Attained;
    if (trivial) note << "converged with a component below the triviality floor";
  } else if (edge) {
    // descent runs into the edge of the constraint set: some component is being switched off
    res.diagnosis = trivial ? Diagnosis::TrivialComponent : Diagnosis::MaxIterations;
    note << "descent reached the edge of the constraint set (projection infeasible) at gradient norm "
         << res.gradient_norm;
  } else {
    res.diagnosis = Diagnosis::MaxIterations;
    note << (stalled ? "line search stalled" : "iteration limit reached") << " at gradient norm "
         << res.gradient_norm;
  }
  if (res.boundary_mass > 1e-6) note << (note.tellp() > 0 ? "; " : "") << "boundary mass " << res.boundary_mass;
  res.note = note.str();
  return res;
}

}  // namespace cnls
