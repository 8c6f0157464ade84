#include "cnls/scalar.hpp"

#include "cnls/line_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cnls {

// ---------------------------------------------------------------------------
// RadialProfile

namespace {

double hermite(double t, double h, double y0, double y1, double d0, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

double hermite_slope(double t, double h, double y0, double y1, double d0, double d1) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * d0 +
         (3 * t2 - 2 * t) * d1;
}

}  // namespace

double RadialProfile::value(double r) const {
  r = std::abs(r);
  const std::size_t n = w.size();
  const double rm = r_max();
  if (r >= rm) {
    if (r == rm) return w.back();
    if (tail_rate <= 0.0) return 0.0;
    const double geo = dim > 1 ? std::pow(rm / r, 0.5 * (dim - 1)) : 1.0;
    return w.back() * geo * std::exp(-tail_rate * (r - rm));
  }
  const std::size_t i = std::min(static_cast<std::size_t>(r / dr), n - 2);
  const double t = (r - static_cast<double>(i) * dr) / dr;
  return hermite(t, dr, w[i], w[i + 1], dw[i], dw[i + 1]);
}

double RadialProfile::slope(double r) const {
  const double sgn = r < 0 ? -1.0 : 1.0;
  r = std::abs(r);
  const std::size_t n = w.size();
  const double rm = r_max();
  if (r >= rm) {
    if (tail_rate <= 0.0) return 0.0;
    const double v = value(r);
    return sgn * -v * (tail_rate + 0.5 * (dim - 1) / r);
  }
  const std::size_t i = std::min(static_cast<std::size_t>(r / dr), n - 2);
  const double t = (r - static_cast<double>(i) * dr) / dr;
  return sgn * hermite_slope(t, dr, w[i], w[i + 1], dw[i], dw[i + 1]);
}

RadialProfile RadialProfile::scaled(double c) const {
  RadialProfile p = *this;
  for (auto& v : p.w) v *= c;
  for (auto& v : p.dw) v *= c;
  return p;
}

void RadialProfile::fill_slopes() {
  const std::size_t n = w.size();
  dw.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) dw[i] = (w[i + 1] - w[i - 1]) / (2.0 * dr);
  if (n > 1) dw[n - 1] = (w[n - 1] - w[n - 2]) / dr;
}

double sphere_factor(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

double radial_integral(const std::vector<double>& f, double dr, int dim) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  auto g = [&](std::size_t i) { return f[i] * std::pow(static_cast<double>(i) * dr, dim - 1); };
  std::size_t last = n - 1;  // number of intervals
  double s = 0.0;
  std::size_t even = last - (last % 2);
  for (std::size_t i = 0; i + 2 <= even; i += 2) s += g(i) + 4.0 * g(i + 1) + g(i + 2);
  s *= dr / 3.0;
  if (even < last) s += 0.5 * dr * (g(last - 1) + g(last));
  return sphere_factor(dim) * s;
}

// ---------------------------------------------------------------------------
// Shooting for lambda = mu = 1

namespace {

constexpr double kStep = 1e-3;     // RK4 step in the rescaled variable
constexpr double kMatch = 9.0;     // switch to the linear far field here
constexpr double kCutoff = 40.0;   // give up classifying beyond this radius

struct State {
  double w, p;
};

State rhs(int dim, double rho, State s) {
  return {s.p, s.w - s.w * s.w * s.w - (dim - 1) / rho * s.p};
}

State rk4(int dim, double rho, State s, double h) {
  auto add = [](State a, State b, double c) { return State{a.w + c * b.w, a.p + c * b.p}; };
  const State k1 = rhs(dim, rho, s);
  const State k2 = rhs(dim, rho + 0.5 * h, add(s, k1, 0.5 * h));
  const State k3 = rhs(dim, rho + 0.5 * h, add(s, k2, 0.5 * h));
  const State k4 = rhs(dim, rho + h, add(s, k3, h));
  return {s.w + h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w),
          s.p + h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p)};
}

// RK4 loses accuracy next to the 1/r singularity; refine the first steps.
State advance(int dim, double rho, State s, double h) {
  if (rho >= 0.2) return rk4(dim, rho, s, h);
  const int sub = 64;
  for (int i = 0; i < sub; ++i) s = rk4(dim, rho + i * h / sub, s, h / sub);
  return s;
}

// Regular expansion w = a + c2 r^2 + c4 r^4 near the origin.
State series(int dim, double a, double rho) {
  const double c2 = (a - a * a * a) / (2.0 * dim);
  const double c4 = (1.0 - 3.0 * a * a) * c2 / (4.0 * (dim + 2));
  const double r2 = rho * rho;
  return {a + c2 * r2 + c4 * r2 * r2, 2 * c2 * rho + 4 * c4 * r2 * rho};
}

enum class Shot { Under, Over, Stalled };

Shot classify(int dim, double a) {
  double rho = kStep;
  State s = series(dim, a, rho);
  while (rho < kCutoff) {
    s = advance(dim, rho, s, kStep);
    rho += kStep;
    if (!std::isfinite(s.w) || !std::isfinite(s.p)) return Shot::Stalled;
    if (s.w < 0.0) return Shot::Over;
    if (s.p > 0.0) return Shot::Under;
  }
  return Shot::Stalled;
}

// Decaying solution of the linearized far-field equation.
double far_field(int dim, double rho) {
  return dim == 2 ? std::cyl_bessel_k(0.0, rho) : std::exp(-rho) / rho;
}
double far_field_slope(int dim, double rho) {
  return dim == 2 ? -std::cyl_bessel_k(1.0, rho) : -std::exp(-rho) * (1.0 / rho + 1.0 / (rho * rho));
}

struct Canonical {
  int dim = 3;
  double a = 0.0;
  std::vector<double> w, p;  // at rho = i * kStep up to kMatch
  double tail = 0.0;

  double second(double rho, double wv, double pv) const {
    if (rho == 0.0) return (a - a * a * a) / dim;
    return wv - wv * wv * wv - (dim - 1) / rho * pv;
  }
  void eval(double rho, double& wv, double& pv) const {
    if (rho >= kMatch) {
      wv = tail * far_field(dim, rho);
      pv = tail * far_field_slope(dim, rho);
      return;
    }
    const std::size_t i = std::min(static_cast<std::size_t>(rho / kStep), w.size() - 2);
    const double r0 = i * kStep, r1 = r0 + kStep;
    const double t = (rho - r0) / kStep;
    wv = hermite(t, kStep, w[i], w[i + 1], p[i], p[i + 1]);
    pv = hermite(t, kStep, p[i], p[i + 1], second(r0, w[i], p[i]), second(r1, w[i + 1], p[i + 1]));
  }
};

Canonical shoot(int dim, std::pair<double, double> bracket) {
  double lo = bracket.first, hi = bracket.second;
  if (!(lo > 0.0 && hi > lo)) throw ShootingError("invalid shooting interval");
  const Shot slo = classify(dim, lo), shi = classify(dim, hi);
  if (slo != Shot::Under || shi != Shot::Over)
    throw ShootingError("shooting interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] does not bracket the ground state (N=" + std::to_string(dim) + ")");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Shot s = classify(dim, mid);
    if (s == Shot::Under)
      lo = mid;
    else if (s == Shot::Over)
      hi = mid;
    else {
      lo = hi = mid;
      break;
    }
  }
  if (hi - lo > 1e-12 * hi) throw ShootingError("shooting did not converge");

  Canonical c;
  c.dim = dim;
  c.a = 0.5 * (lo + hi);
  const int steps = static_cast<int>(std::lround(kMatch / kStep));
  c.w.resize(steps + 1);
  c.p.resize(steps + 1);
  c.w[0] = c.a;
  c.p[0] = 0.0;
  State s = series(dim, c.a, kStep);
  c.w[1] = s.w;
  c.p[1] = s.p;
  for (int i = 1; i < steps; ++i) {
    s = advance(dim, i * kStep, s, kStep);
    c.w[i + 1] = s.w;
    c.p[i + 1] = s.p;
  }
  if (!(s.w > 0.0) || s.p > 0.0) throw ShootingError("shooting trajectory left the ground state");
  c.tail = s.w / far_field(dim, kMatch);
  return c;
}

std::pair<double, double> default_bracket(int dim) {
  return dim == 2 ? std::pair{1.2, 4.0} : std::pair{1.5, 8.0};
}

// Petviashvili iteration on the radial finite-difference operator.
RadialProfile relax(double lambda, double mu, int dim, double dr, int nodes) {
  const LineOperator op = LineOperator::radial(dim, dr, nodes);
  const int n = op.size();
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = 2.0 * std::sqrt(lambda / mu) * std::exp(-0.5 * lambda * op.x[i] * op.x[i]);
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd cube = mu * w.array().cube();
    for (int i = 0; i < n; ++i) cube[i] *= op.mass[i];
    const double num = w.dot(op.apply(lambda, w));
    const double den = w.dot(cube);
    if (!(den > 0.0)) throw ShootingError("relaxation collapsed to zero");
    const double m = num / den;
    Eigen::VectorXd next = std::pow(m, 1.5) * op.solve(lambda, cube);
    const double change = (next - w).cwiseAbs().maxCoeff() / next.cwiseAbs().maxCoeff();
    w = next;
    if (change < 1e-14 && std::abs(m - 1.0) < 1e-12) break;
  }
  RadialProfile p;
  p.dim = dim;
  p.dr = dr;
  p.w.assign(w.data(), w.data() + n);
  p.w.push_back(0.0);
  p.fill_slopes();
  p.dw[0] = 0.0;
  p.tail_rate = std::sqrt(lambda);
  return p;
}

}  // namespace

ScalarSoliton solve_scalar(double lambda, double mu, int dim, const Grid& grid,
                           const ScalarOptions& opts) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw InvalidInput("lambda and mu must be positive");
  if (dim < 1 || dim > 3) throw InvalidInput("dimension must be 1, 2 or 3");
  const double dr = grid.spacing();
  const double rmax = grid.extent();
  const std::size_t n = static_cast<std::size_t>(std::lround(rmax / dr)) + 1;
  const double amp = std::sqrt(lambda / mu);
  const double sl = std::sqrt(lambda);

  ScalarSoliton s;
  s.lambda = lambda;
  s.mu = mu;
  s.dim = dim;
  RadialProfile& p = s.profile;
  p.dim = dim;
  p.dr = dr;
  p.tail_rate = sl;
  p.w.resize(n);
  p.dw.resize(n);

  if (dim == 1) {
    s.method = "closed-form";
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sl * static_cast<double>(i) * dr;
      const double sech = 1.0 / std::cosh(x);
      p.w[i] = std::sqrt(2.0) * amp * sech;
      p.dw[i] = -std::sqrt(2.0) * amp * sl * sech * std::tanh(x);
    }
  } else {
    bool relaxed = opts.force_relaxation;
    if (!relaxed) {
      try {
        const Canonical c = shoot(dim, opts.bracket.value_or(default_bracket(dim)));
        s.method = "shooting";
        for (std::size_t i = 0; i < n; ++i) {
          double wv, pv;
          c.eval(sl * static_cast<double>(i) * dr, wv, pv);
          p.w[i] = amp * wv;
          p.dw[i] = amp * sl * pv;
        }
      } catch (const ShootingError&) {
        // A bad user interval is reported; a stalled integration falls back.
        if (opts.bracket) throw;
        relaxed = true;
      }
    }
    if (relaxed) {
      s.method = "relaxation";
      p = relax(lambda, mu, dim, dr, static_cast<int>(n) - 1);
    }
  }

  if (p.w.back() > 1e-10 * p.w.front())
    throw InvalidInput("grid too small to contain the soliton: w(L)/w(0) = " +
                       std::to_string(p.w.back() / p.w.front()));

  std::vector<double> f2(n), f4(n), g2(n);
  for (std::size_t i = 0; i < n; ++i) {
    f2[i] = p.w[i] * p.w[i];
    f4[i] = f2[i] * f2[i];
    g2[i] = p.dw[i] * p.dw[i];
  }
  s.l2_sq = radial_integral(f2, dr, dim);
  s.l4_pow4 = radial_integral(f4, dr, dim);
  s.gradient_sq = radial_integral(g2, dr, dim);
  s.energy = 0.5 * s.lambda_norm_sq() - 0.25 * mu * s.l4_pow4;
  return s;
}

double pohozaev_residual(const ScalarSoliton& s) {
  return s.lambda * s.l2_sq - (4.0 - s.dim) * s.mu / 4.0 * s.l4_pow4;
}

double equation_residual(const ScalarSoliton& s) {
  const RadialProfile& p = s.profile;
  const std::size_t n = p.size();
  const double h = p.dr;
  double worst = 0.0;
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  for (std::size_t i = 4; i + 4 < n; ++i) {
    double d2 = 0.0;
    for (std::size_t m = 1; m <= 4; ++m) d2 += c[m - 1] * (p.dw[i + m] - p.dw[i - m]);
    d2 /= h;
    const double r = static_cast<double>(i) * h;
    const double w = p.w[i];
    const double res = -d2 - (s.dim - 1) / r * p.dw[i] + s.lambda * w - s.mu * w * w * w;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

TailFit fit_tail(const ScalarSoliton& s) {
  const RadialProfile& p = s.profile;
  const double sl = std::sqrt(s.lambda);
  TailFit f;
  f.lo = 4.0 / sl;
  f.hi = 8.0 / sl;
  if (f.hi > p.r_max()) throw InvalidInput("tail window exits the grid");
  std::vector<double> rs, ys;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = p.r(i);
    if (r < f.lo - 1e-12 || r > f.hi + 1e-12) continue;
    rs.push_back(r);
    ys.push_back(std::log(p.w[i]) + 0.5 * (s.dim - 1) * std::log(r));
  }
  const std::size_t m = rs.size();
  f.points = static_cast<int>(m);
  if (m < 3) throw InvalidInput("tail window holds too few mesh points");
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean += ys[i] + sl * rs[i];
  mean /= m;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) ss += std::pow(ys[i] + sl * rs[i] - mean, 2);
  f.rms = std::sqrt(ss / m);
  f.amplitude = std::exp(mean);
  double mr = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mr += rs[i];
    my += ys[i];
  }
  mr /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (rs[i] - mr) * (ys[i] - my);
    sxx += (rs[i] - mr) * (rs[i] - mr);
  }
  f.rate = -sxy / sxx;
  return f;
}

double tail_amplitude(const ScalarSoliton& s) {
  const TailFit f = fit_tail(s);
  if (f.rms > 1e-2) throw InvalidInput("tail fit residual above 1e-2: profile not asymptotic");
  return f.amplitude;
}

Eigen::VectorXd sample_on_grid(const RadialProfile& p, const Grid& grid, double center) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  int idx[3];
  for (std::size_t q = 0; q < grid.size(); ++q) {
    grid.unflatten(q, idx);
    double r2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const double x = grid.coord(idx[a]) - (a == 0 ? center : 0.0);
      r2 += x * x;
    }
    out[q] = p.value(std::sqrt(r2));
  }
  zero_boundary(grid, out);
  return out;
}

}  // namespace cnls
