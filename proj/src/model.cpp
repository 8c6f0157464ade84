#include "cnls/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cnls {

namespace {

template <class F>
void for_interior(const Grid& g, F&& f) {
  const int n = g.points();
  if (g.dim() == 1) {
    for (int i = 1; i < n - 1; ++i) f(static_cast<std::size_t>(i));
    return;
  }
  for (std::size_t p = 0; p < g.size(); ++p)
    if (!g.on_boundary(p)) f(p);
}

}  // namespace

// ---------------------------------------------------------------------------
// SystemSpec

SystemSpec build_system(const SystemConfig& cfg) {
  if (cfg.dim < 1 || cfg.dim > 3)
    throw InvalidInput("dimension N must be 1, 2 or 3 (got " + std::to_string(cfg.dim) + ")");
  if (cfg.k < 1) throw InvalidInput("component count k must be at least 1");
  const int k = cfg.k;
  if (static_cast<int>(cfg.lambda.size()) != k || static_cast<int>(cfg.mu.size()) != k)
    throw InvalidInput("lambda and mu must each have k entries");

  SystemSpec s;
  s.dim = cfg.dim;
  s.k = k;
  s.lambda = Eigen::Map<const Eigen::VectorXd>(cfg.lambda.data(), k);
  s.mu = Eigen::Map<const Eigen::VectorXd>(cfg.mu.data(), k);
  for (int j = 0; j < k; ++j) {
    if (!(s.lambda(j) > 0.0) || !std::isfinite(s.lambda(j)))
      throw InvalidInput("lambda_" + std::to_string(j + 1) + " must be positive");
    if (!(s.mu(j) > 0.0) || !std::isfinite(s.mu(j)))
      throw InvalidInput("mu_" + std::to_string(j + 1) + " must be positive");
  }

  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(k, k, std::nan(""));
  auto put = [&](int i, int j, double v) {
    if (i < 0 || j < 0 || i >= k || j >= k)
      throw InvalidInput("coupling index out of range");
    if (i == j) return;
    if (!std::isfinite(v)) throw InvalidInput("coupling values must be finite");
    for (auto [a, c] : {std::pair{i, j}, std::pair{j, i}}) {
      if (!std::isnan(b(a, c)) && b(a, c) != v)
        throw InvalidInput("asymmetric coupling beta_" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1));
      b(a, c) = v;
    }
  };

  if (!cfg.beta.empty()) {
    if (static_cast<int>(cfg.beta.size()) != k)
      throw InvalidInput("beta matrix must have k rows");
    // Rows may be full or upper-triangular; a full matrix must be symmetric,
    // an upper-triangular one has zeros (or nothing) below the diagonal.
    bool upper_only = true;
    for (int i = 0; i < k; ++i) {
      const auto& row = cfg.beta[i];
      if (static_cast<int>(row.size()) != k) throw InvalidInput("beta matrix must be k x k");
      for (int j = 0; j < i; ++j)
        if (row[j] != 0.0) upper_only = false;
    }
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        put(i, j, cfg.beta[i][j]);
        if (!upper_only && cfg.beta[j][i] != cfg.beta[i][j])
          throw InvalidInput("asymmetric coupling beta_" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1));
      }
  }
  for (const auto& c : cfg.couplings) put(c.i, c.j, c.value);

  for (int i = 0; i < k; ++i) {
    b(i, i) = s.mu(i);
    for (int j = i + 1; j < k; ++j) {
      if (std::isnan(b(i, j))) {
        if (!cfg.allow_zero_coupling)
          throw InvalidInput("missing coupling beta_" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1));
        b(i, j) = b(j, i) = 0.0;
      }
      if (b(i, j) == 0.0 && !cfg.allow_zero_coupling)
        throw InvalidInput("zero coupling beta_" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + " (couplings must be nonzero)");
    }
  }
  s.beta = b;
  return s;
}

SystemSpec SystemSpec::subsystem(const std::vector<int>& idx) const {
  SystemSpec s;
  s.dim = dim;
  s.k = static_cast<int>(idx.size());
  s.lambda.resize(s.k);
  s.mu.resize(s.k);
  s.beta.resize(s.k, s.k);
  for (int a = 0; a < s.k; ++a) {
    s.lambda(a) = lambda(idx[a]);
    s.mu(a) = mu(idx[a]);
    for (int b = 0; b < s.k; ++b) s.beta(a, b) = beta(idx[a], idx[b]);
  }
  return s;
}

SystemSpec SystemSpec::permuted(const std::vector<int>& perm) const { return subsystem(perm); }

bool SystemSpec::decoupled() const {
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (beta(i, j) != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Grid

Grid Grid::make(int dim, double extent, double spacing) {
  if (dim < 1 || dim > 3) throw InvalidInput("grid dimension must be 1, 2 or 3");
  if (!(extent > 0.0) || !(spacing > 0.0)) throw InvalidInput("grid extent and spacing must be positive");
  const double cells = 2.0 * extent / spacing;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
    throw InvalidInput("2*extent/spacing must be an integer");
  if (rounded < 4) throw InvalidInput("grid needs at least 5 points per axis");
  Grid g;
  g.dim_ = dim;
  g.extent_ = extent;
  g.n_ = static_cast<int>(rounded) + 1;
  g.h_ = 2.0 * extent / rounded;
  g.size_ = 1;
  for (int a = 0; a < dim; ++a) g.size_ *= static_cast<std::size_t>(g.n_);
  return g;
}

double Grid::cell() const { return std::pow(h_, dim_); }

std::size_t Grid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = dim_ - 1; a > axis; --a) s *= static_cast<std::size_t>(n_);
  return s;
}

void Grid::unflatten(std::size_t flat, int* idx) const {
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
}

bool Grid::on_boundary(std::size_t flat) const {
  int idx[3];
  unflatten(flat, idx);
  for (int a = 0; a < dim_; ++a)
    if (idx[a] == 0 || idx[a] == n_ - 1) return true;
  return false;
}

// ---------------------------------------------------------------------------
// FieldVector and partitions

FieldVector::FieldVector(Grid g, int k) : grid(g) {
  components.assign(k, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size())));
}

void FieldVector::check_finite() const {
  for (const auto& c : components) {
    if (c.size() != static_cast<Eigen::Index>(grid.size()))
      throw InvalidInput("field component size does not match its grid");
    if (!c.allFinite()) throw InvalidInput("field contains non-finite values");
  }
}

ConstraintPartition ConstraintPartition::singletons(int k) {
  ConstraintPartition p;
  for (int j = 0; j < k; ++j) p.groups.push_back({j});
  return p;
}

ConstraintPartition ConstraintPartition::whole(int k) {
  ConstraintPartition p;
  p.groups.emplace_back();
  for (int j = 0; j < k; ++j) p.groups[0].push_back(j);
  return p;
}

void ConstraintPartition::validate(int k) const {
  std::vector<int> seen(k, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidInput("constraint groups must be nonempty");
    for (int j : g) {
      if (j < 0 || j >= k) throw InvalidInput("constraint group index out of range");
      if (seen[j]++) throw InvalidInput("constraint groups must be disjoint");
    }
  }
  for (int j = 0; j < k; ++j)
    if (!seen[j]) throw InvalidInput("constraint groups must cover every component");
}

int ConstraintPartition::group_of(int j) const {
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (std::find(groups[g].begin(), groups[g].end(), j) != groups[g].end())
      return static_cast<int>(g);
  return -1;
}

std::string ConstraintPartition::str() const {
  std::ostringstream os;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g) os << '|';
    os << '{';
    for (std::size_t a = 0; a < groups[g].size(); ++a) os << (a ? "," : "") << groups[g][a] + 1;
    os << '}';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Quadrature

double inner(const Grid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for_interior(g, [&](std::size_t p) { s += a[p] * b[p]; });
  return s * g.cell();
}

double l2_sq(const Grid& g, const Eigen::VectorXd& u) { return inner(g, u, u); }

double l4_pow4(const Grid& g, const Eigen::VectorXd& u) {
  double s = 0.0;
  for_interior(g, [&](std::size_t p) {
    const double q = u[p] * u[p];
    s += q * q;
  });
  return s * g.cell();
}

double product_l2_sq(const Grid& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double s = 0.0;
  for_interior(g, [&](std::size_t p) {
    const double q = u[p] * v[p];
    s += q * q;
  });
  return s * g.cell();
}

double dirichlet_form(const Grid& g, const Eigen::VectorXd& u) {
  // Sum over every grid edge touching an interior node; boundary values count
  // as zero.  Its first variation is exactly -Lap_h.
  const int n = g.points();
  auto val = [&](std::size_t p) { return g.on_boundary(p) ? 0.0 : u[p]; };
  double s = 0.0;
  if (g.dim() == 1) {
    for (int i = 0; i < n - 1; ++i) {
      const double a = (i == 0) ? 0.0 : u[i];
      const double b = (i + 1 == n - 1) ? 0.0 : u[i + 1];
      s += (b - a) * (b - a);
    }
  } else {
    int idx[3];
    for (std::size_t p = 0; p < g.size(); ++p) {
      g.unflatten(p, idx);
      const double up = val(p);
      for (int a = 0; a < g.dim(); ++a) {
        if (idx[a] == n - 1) continue;
        const double d = val(p + g.stride(a)) - up;
        s += d * d;
      }
    }
  }
  const double h = g.spacing();
  return s * g.cell() / (h * h);
}

double lambda_norm_sq(const Grid& g, const Eigen::VectorXd& u, double lambda) {
  return dirichlet_form(g, u) + lambda * l2_sq(g, u);
}

Eigen::VectorXd neg_laplacian(const Grid& g, const Eigen::VectorXd& u) {
  const int n = g.points();
  const double ih2 = 1.0 / (g.spacing() * g.spacing());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  if (g.dim() == 1) {
    for (int i = 1; i < n - 1; ++i) {
      const double l = (i == 1) ? 0.0 : u[i - 1];
      const double r = (i == n - 2) ? 0.0 : u[i + 1];
      out[i] = (2.0 * u[i] - l - r) * ih2;
    }
    return out;
  }
  auto val = [&](std::size_t p) { return g.on_boundary(p) ? 0.0 : u[p]; };
  for_interior(g, [&](std::size_t p) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const std::size_t st = g.stride(a);
      s += 2.0 * u[p] - val(p - st) - val(p + st);
    }
    out[p] = s * ih2;
  });
  return out;
}

void zero_boundary(const Grid& g, Eigen::VectorXd& u) {
  if (g.dim() == 1) {
    u[0] = 0.0;
    u[g.points() - 1] = 0.0;
    return;
  }
  for (std::size_t p = 0; p < g.size(); ++p)
    if (g.on_boundary(p)) u[p] = 0.0;
}

// ---------------------------------------------------------------------------
// Functional

void check_compatible(const SystemSpec& spec, const FieldVector& u) {
  if (u.k() != spec.k)
    throw InvalidInput("field has " + std::to_string(u.k()) + " components, system has " +
                       std::to_string(spec.k));
  if (u.grid.dim() != spec.dim)
    throw InvalidInput("grid dimension does not match the system dimension");
  u.check_finite();
}

double energy(const SystemSpec& spec, const FieldVector& u) {
  check_compatible(spec, u);
  const Grid& g = u.grid;
  double e = 0.0;
  for (int j = 0; j < spec.k; ++j) {
    e += 0.5 * lambda_norm_sq(g, u[j], spec.lambda(j));
    e -= 0.25 * spec.mu(j) * l4_pow4(g, u[j]);
    for (int i = 0; i < j; ++i)
      if (spec.beta(i, j) != 0.0) e -= 0.5 * spec.beta(i, j) * product_l2_sq(g, u[i], u[j]);
  }
  return e;
}

FieldVector gradient(const SystemSpec& spec, const FieldVector& u) {
  check_compatible(spec, u);
  const Grid& g = u.grid;
  FieldVector out(g, spec.k);
  for (int j = 0; j < spec.k; ++j) {
    Eigen::VectorXd pot = Eigen::VectorXd::Constant(u[j].size(), spec.lambda(j));
    pot.array() -= spec.mu(j) * u[j].array().square();
    for (int i = 0; i < spec.k; ++i)
      if (i != j && spec.beta(i, j) != 0.0) pot.array() -= spec.beta(i, j) * u[i].array().square();
    out[j] = neg_laplacian(g, u[j]);
    out[j].array() += pot.array() * u[j].array();
    zero_boundary(g, out[j]);
  }
  return out;
}

double gradient_norm(const FieldVector& grad) {
  double s = 0.0;
  for (const auto& c : grad.components) s += l2_sq(grad.grid, c);
  return std::sqrt(s);
}

std::vector<double> nehari_residuals(const SystemSpec& spec, const FieldVector& u,
                                     const ConstraintPartition& partition) {
  check_compatible(spec, u);
  partition.validate(spec.k);
  const Grid& g = u.grid;
  std::vector<double> per(spec.k);
  std::vector<double> mass(spec.k);
  for (int j = 0; j < spec.k; ++j) {
    mass[j] = l2_sq(g, u[j]);
    double r = lambda_norm_sq(g, u[j], spec.lambda(j)) - spec.mu(j) * l4_pow4(g, u[j]);
    for (int i = 0; i < spec.k; ++i)
      if (i != j && spec.beta(i, j) != 0.0) r -= spec.beta(i, j) * product_l2_sq(g, u[i], u[j]);
    per[j] = r;
  }
  std::vector<double> out;
  for (const auto& grp : partition.groups) {
    double r = 0.0;
    bool any = false;
    for (int j : grp) {
      r += per[j];
      any = any || mass[j] > 0.0;
    }
    if (!any) throw InvalidInput("constraint group " + partition.str() + " has only zero fields");
    out.push_back(r);
  }
  return out;
}

double boundary_mass_fraction(const FieldVector& u) {
  const Grid& g = u.grid;
  const double cut = 0.9 * g.extent();
  double total = 0.0, shell = 0.0;
  int idx[3];
  for (std::size_t p = 0; p < g.size(); ++p) {
    g.unflatten(p, idx);
    bool outer = false;
    for (int a = 0; a < g.dim(); ++a) outer = outer || std::abs(g.coord(idx[a])) > cut;
    double m = 0.0;
    for (const auto& c : u.components) m += c[p] * c[p];
    total += m;
    if (outer) shell += m;
  }
  return total > 0.0 ? shell / total : 0.0;
}

std::vector<double> centroids(const FieldVector& u) {
  const Grid& g = u.grid;
  std::vector<double> out;
  int idx[3];
  for (const auto& c : u.components) {
    double m = 0.0, mx = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      g.unflatten(p, idx);
      const double w = c[p] * c[p];
      m += w;
      mx += w * g.coord(idx[0]);
    }
    out.push_back(m > 0.0 ? mx / m : 0.0);
  }
  return out;
}

}  // namespace cnls
