#include "cnls/overlap.hpp"

#include <cmath>
#include <numbers>

namespace cnls {

LineProfile LineProfile::from_grid(const Grid& g, const Eigen::VectorXd& v) {
  if (g.dim() != 1) throw InvalidInput("line profiles need a 1D grid");
  return {g.coord(0), g.spacing(), v};
}

LineProfile LineProfile::from_radial(const RadialProfile& p) {
  const int n = static_cast<int>(p.size());
  LineProfile out{-p.r_max(), p.dr, Eigen::VectorXd(2 * n - 1)};
  for (int i = 0; i < n; ++i) {
    out.values[n - 1 + i] = p.w[i];
    out.values[n - 1 - i] = p.w[i];
  }
  return out;
}

namespace {

struct LinePair {
  const LineProfile& p;
  const LineProfile& q;
  long offset = 0;  // index of q's origin relative to p's, in steps

  LinePair(const LineProfile& a, const LineProfile& b) : p(a), q(b) {
    if (std::abs(a.h - b.h) > 1e-12 * a.h) throw OverlapError("line profiles on different spacings");
    const double off = (b.x0 - a.x0) / a.h;
    offset = std::lround(off);
    if (std::abs(off - offset) > 1e-6) throw OverlapError("line profiles on misaligned grids");
  }

  OverlapValue at(double R) const {
    const long s = std::lround(R / p.h);
    OverlapValue v;
    v.R_used = s * p.h;
    const long np = p.values.size(), nq = q.values.size();
    double total = 0.0, lost = 0.0, sum = 0.0;
    for (long j = 0; j < nq; ++j) {
      const double q2 = q.values[j] * q.values[j];
      total += q2;
      const long i = j + offset + s;  // where q_j lands in p's index space
      if (i < 0 || i >= np) {
        lost += q2;
        continue;
      }
      const double p2 = p.values[i] * p.values[i];
      sum += p2 * q2;
    }
    v.value = sum * p.h;
    v.lost_mass = total > 0.0 ? lost / total : 0.0;
    return v;
  }
};

// p^2 and q^2 tabulated on a (z, rho) lattice of step hq; cylindrical weights
// folded into p's table.
struct CylinderPair {
  double hq;
  long nzp, nzq, nr;
  Eigen::MatrixXd A, B;  // rows: z index + nz, cols: rho index
  Eigen::VectorXd q_marginal;

  CylinderPair(const RadialProfile& p, const RadialProfile& q, double spacing) : hq(spacing) {
    if (p.dim != q.dim) throw OverlapError("profiles of different dimension");
    const int dim = p.dim;
    nzp = static_cast<long>(p.r_max() / hq);
    nzq = static_cast<long>(q.r_max() / hq);
    nr = std::min(nzp, nzq);
    A.resize(2 * nzp + 1, nr + 1);
    B.resize(2 * nzq + 1, nr + 1);
    Eigen::VectorXd wr(nr + 1);
    for (long j = 0; j <= nr; ++j) {
      const double rho = j * hq;
      wr[j] = dim == 3 ? 2.0 * std::numbers::pi * rho * hq : (j == 0 ? 1.0 : 2.0) * hq;
    }
    for (long i = -nzp; i <= nzp; ++i)
      for (long j = 0; j <= nr; ++j) {
        const double v = p.value(std::hypot(i * hq, j * hq));
        A(i + nzp, j) = v * v * wr[j] * hq;
      }
    q_marginal.resize(2 * nzq + 1);
    for (long i = -nzq; i <= nzq; ++i) {
      double m = 0.0;
      for (long j = 0; j <= nr; ++j) {
        const double v = q.value(std::hypot(i * hq, j * hq));
        B(i + nzq, j) = v * v;
        m += v * v * wr[j];
      }
      q_marginal[i + nzq] = m;
    }
  }

  OverlapValue at(double R) const {
    const long s = std::lround(R / hq);
    OverlapValue v;
    v.R_used = s * hq;
    double sum = 0.0, lost = 0.0;
    for (long iq = -nzq; iq <= nzq; ++iq) {
      const long ip = iq + s;
      if (ip < -nzp || ip > nzp) {
        lost += q_marginal[iq + nzq];
        continue;
      }
      sum += A.row(ip + nzp).dot(B.row(iq + nzq));
    }
    v.value = sum;
    const double total = q_marginal.sum();
    v.lost_mass = total > 0.0 ? lost / total : 0.0;
    return v;
  }
};

void check_lost(const OverlapValue& v, double tol) {
  if (v.lost_mass > tol)
    throw OverlapError("translated profile leaves the grid at R = " + std::to_string(v.R_used) +
                       " (lost mass fraction " + std::to_string(v.lost_mass) + ")");
}

LineProfile as_line(const Profile& p) {
  if (const auto* l = std::get_if<LineProfile>(&p)) return *l;
  return LineProfile::from_radial(std::get<RadialProfile>(p));
}

bool both_radial_multi(const Profile& p, const Profile& q) {
  const auto* a = std::get_if<RadialProfile>(&p);
  const auto* b = std::get_if<RadialProfile>(&q);
  return a && b && a->dim > 1 && b->dim > 1;
}

template <class Engine>
std::vector<SweepPoint> run_sweep(const Engine& e, const std::vector<double>& R_grid, double tol) {
  std::vector<SweepPoint> out;
  for (double R : R_grid) {
    const OverlapValue v = e.at(R);
    check_lost(v, tol);
    out.push_back({v.R_used, v.value});
  }
  return out;
}

}  // namespace

OverlapValue overlap_integral(const Profile& p, const Profile& q, double R, const OverlapOptions& opts) {
  if (R < 0.0) throw InvalidInput("separation must be nonnegative");
  OverlapValue v;
  if (both_radial_multi(p, q)) {
    v = CylinderPair(std::get<RadialProfile>(p), std::get<RadialProfile>(q), opts.spacing).at(R);
  } else {
    if (const auto* a = std::get_if<RadialProfile>(&p); a && a->dim > 1)
      throw OverlapError("cannot mix a multi-dimensional radial profile with a line profile");
    if (const auto* b = std::get_if<RadialProfile>(&q); b && b->dim > 1)
      throw OverlapError("cannot mix a multi-dimensional radial profile with a line profile");
    const LineProfile a = as_line(p), b = as_line(q);
    v = LinePair(a, b).at(R);
  }
  check_lost(v, opts.lost_mass_tol);
  return v;
}

std::vector<SweepPoint> decay_sweep(const Profile& p, const Profile& q, const std::vector<double>& R_grid,
                                    const OverlapOptions& opts) {
  for (std::size_t i = 1; i < R_grid.size(); ++i)
    if (!(R_grid[i] > R_grid[i - 1])) throw InvalidInput("R grid must be increasing");
  if (both_radial_multi(p, q)) {
    const CylinderPair e(std::get<RadialProfile>(p), std::get<RadialProfile>(q), opts.spacing);
    return run_sweep(e, R_grid, opts.lost_mass_tol);
  }
  const LineProfile a = as_line(p), b = as_line(q);
  return run_sweep(LinePair(a, b), R_grid, opts.lost_mass_tol);
}

DecayFit decay_fit(const std::vector<SweepPoint>& sweep, double lo, double hi) {
  DecayFit f;
  const bool all = !(hi > lo);
  std::vector<const SweepPoint*> pts;
  for (const auto& s : sweep)
    if (all || (s.R >= lo - 1e-12 && s.R <= hi + 1e-12)) pts.push_back(&s);
  if (pts.size() < 12)
    throw InvalidInput("decay fit needs at least 12 points in the window (got " +
                       std::to_string(pts.size()) + ")");
  const int m = static_cast<int>(pts.size());
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    if (!(pts[i]->overlap > 0.0)) throw OverlapError("nonpositive overlap in the fit window");
    X(i, 0) = 1.0;
    X(i, 1) = std::log(pts[i]->R);
    X(i, 2) = -pts[i]->R;
    y[i] = std::log(pts[i]->overlap);
  }
  const Eigen::Vector3d c = X.colPivHouseholderQr().solve(y);
  f.constant = c[0];
  f.power = c[1];
  f.rate = c[2];
  f.fit_residual = std::sqrt((X * c - y).squaredNorm() / m);
  f.lo = pts.front()->R;
  f.hi = pts.back()->R;
  f.points = m;
  if (f.fit_residual > 1e-2)
    throw OverlapError("decay fit residual " + std::to_string(f.fit_residual) +
                       " above 1e-2: window not asymptotic");
  return f;
}

double expected_power(int dim, bool equal_rates) {
  const double alpha = dim == 1 ? 1.0 : 0.5;
  return equal_rates ? 1.0 + alpha - dim : 1.0 - dim;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  return v;
}

}  // namespace cnls
