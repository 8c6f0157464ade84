// Overlap integrals  I(R) = int p^2(x) q^2(x - R e1) dx  and fits of their
// decay  log I = c + p log R - rate R.
#pragma once

#include "cnls/scalar.hpp"

#include <Eigen/Dense>
#include <stdexcept>
#include <variant>
#include <vector>

namespace cnls {

class OverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 1D samples at x0 + i h.
struct LineProfile {
  double x0 = 0.0;
  double h = 0.0;
  Eigen::VectorXd values;

  static LineProfile from_grid(const Grid& g, const Eigen::VectorXd& v);
  static LineProfile from_radial(const RadialProfile& p);
};

using Profile = std::variant<LineProfile, RadialProfile>;

struct OverlapOptions {
  double spacing = 0.02;         // cylindrical quadrature step for N = 2, 3
  double lost_mass_tol = 1e-8;   // shifted mass allowed to leave the domain
};

struct OverlapValue {
  double value = 0.0;
  double R_used = 0.0;  // R rounded to the quadrature lattice
  double lost_mass = 0.0;
};

OverlapValue overlap_integral(const Profile& p, const Profile& q, double R,
                              const OverlapOptions& opts = {});

struct SweepPoint {
  double R = 0.0;  // rounded separation actually used
  double overlap = 0.0;
};

std::vector<SweepPoint> decay_sweep(const Profile& p, const Profile& q,
                                    const std::vector<double>& R_grid,
                                    const OverlapOptions& opts = {});

struct DecayFit {
  double rate = 0.0;
  double power = 0.0;
  double constant = 0.0;
  double lo = 0.0, hi = 0.0;
  double fit_residual = 0.0;  // rms of log residuals
  int points = 0;
};

// Least squares over sweep points with R in [lo, hi]; lo >= hi means "all".
DecayFit decay_fit(const std::vector<SweepPoint>& sweep, double lo = 0.0, double hi = 0.0);

// Exponent 1 + alpha - N for equal decay rates, 1 - N otherwise
// (alpha = 1 for N = 1 and 1/2 for N = 2, 3).
double expected_power(int dim, bool equal_rates);

std::vector<double> linspace(double a, double b, int n);
std::vector<double> geomspace(double a, double b, int n);

}  // namespace cnls
