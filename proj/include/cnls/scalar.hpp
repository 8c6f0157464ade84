// Positive radial solutions of  -Lap w + lambda w = mu w^3  on R^N.
#pragma once

#include "cnls/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cnls {

class ShootingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Radial profile sampled at r_i = i*dr, i = 0..n-1.  With slopes present the
// profile is interpolated by cubic Hermite pieces; otherwise slopes are
// estimated by finite differences.  Beyond the last node the profile is
// continued as r^{-(N-1)/2} e^{-tail_rate r} (or zero when tail_rate is 0).
struct RadialProfile {
  int dim = 1;
  double dr = 0.0;
  std::vector<double> w;
  std::vector<double> dw;
  double tail_rate = 0.0;

  std::size_t size() const { return w.size(); }
  double r(std::size_t i) const { return static_cast<double>(i) * dr; }
  double r_max() const { return dr * static_cast<double>(w.size() - 1); }
  double value(double r) const;
  double slope(double r) const;
  RadialProfile scaled(double c) const;
  void fill_slopes();  // finite-difference slopes when none were supplied
};

// omega_N * int_0^rmax f(r) r^{N-1} dr by composite Simpson on the mesh;
// omega_1 = 2 (both half lines), omega_2 = 2 pi, omega_3 = 4 pi.
double radial_integral(const std::vector<double>& f, double dr, int dim);
double sphere_factor(int dim);

struct ScalarOptions {
  // Initial shooting interval for w(0) at lambda = mu = 1.
  std::optional<std::pair<double, double>> bracket;
  bool force_relaxation = false;
};

struct ScalarSoliton {
  double lambda = 1.0;
  double mu = 1.0;
  int dim = 1;
  RadialProfile profile;
  double energy = 0.0;
  double l2_sq = 0.0;
  double l4_pow4 = 0.0;
  double gradient_sq = 0.0;
  std::string method;  // closed-form, shooting or relaxation

  double peak() const { return profile.w.front(); }
  double lambda_norm_sq() const { return gradient_sq + lambda * l2_sq; }
};

ScalarSoliton solve_scalar(double lambda, double mu, int dim, const Grid& grid,
                           const ScalarOptions& opts = {});

// lambda ||w||_2^2 - ((4 - N) mu / 4) ||w||_4^4
double pohozaev_residual(const ScalarSoliton& s);

// Max-norm residual of the radial equation at interior mesh nodes, with
// derivatives of the stored slope taken by an eighth-order central stencil.
double equation_residual(const ScalarSoliton& s);

struct TailFit {
  double amplitude = 0.0;  // c in w ~ c r^{-(N-1)/2} e^{-sqrt(lambda) r}
  double rate = 0.0;       // free-rate fit of the same window
  double rms = 0.0;        // rms residual of the fixed-rate fit
  double lo = 0.0, hi = 0.0;
  int points = 0;
};

TailFit fit_tail(const ScalarSoliton& s);
double tail_amplitude(const ScalarSoliton& s);

// Sample the profile on a 1D grid (x -> w(|x|)), zero on the boundary.
Eigen::VectorXd sample_on_grid(const RadialProfile& p, const Grid& grid, double center = 0.0);

}  // namespace cnls
