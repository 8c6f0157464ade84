#include "cnls/solver.hpp"

#include <algorithm>
#include <cmath>

namespace cnls {

double shift_fields(FieldVector& u, long s) {
  const Grid& g = u.grid;
  const std::size_t st = g.stride(0);
  const long n = g.points();
  double total = 0.0, lost = 0.0;
  int idx[3];
  for (auto& c : u.components) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(c.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double w = c[p] * c[p];
      if (w == 0.0) continue;
      total += w;
      g.unflatten(p, idx);
      const long i = idx[0] + s;
      if (i < 1 || i > n - 2) {
        lost += w;
        continue;
      }
      out[static_cast<Eigen::Index>(static_cast<long>(p) + s * static_cast<long>(st))] = c[p];
    }
    zero_boundary(g, out);
    c = std::move(out);
  }
  return total > 0.0 ? lost / total : 0.0;
}

GroundStateResult side_state(const SystemSpec& spec, const std::vector<int>& idx, const Grid& grid,
                             const MinimizeOptions& opts) {
  if (idx.empty()) throw InvalidInput("empty side");
  const SystemSpec sub = spec.subsystem(idx);
  try {
    return minimize(sub, ConstraintPartition::singletons(sub.k),
                    soliton_guess(sub, grid, std::vector<double>(idx.size(), 0.0)), opts);
  } catch (const ProjectionInfeasible&) {
    // repulsion inside the side too strong for co-located bumps: spread them out
    std::vector<double> c(idx.size());
    const double gap = 6.0 / std::sqrt(sub.lambda_min());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = (static_cast<double>(j) - 0.5 * (c.size() - 1.0)) * gap;
    return minimize(sub, ConstraintPartition::singletons(sub.k), soliton_guess(sub, grid, c), opts);
  }
}

SeparationCurve sweep_separation(const SystemSpec& spec, const std::vector<int>& left,
                                 const std::vector<int>& right, const std::vector<double>& R_grid,
                                 const GroundStateResult& left_state,
                                 const GroundStateResult& right_state) {
  if (left.empty() || right.empty()) throw InvalidInput("both sides of a split must be nonempty");
  if (left_state.fields.k() != static_cast<int>(left.size()) ||
      right_state.fields.k() != static_cast<int>(right.size()))
    throw InvalidInput("side states do not match the split");
  if (!(left_state.fields.grid == right_state.fields.grid))
    throw InvalidInput("side states live on different grids");
  for (std::size_t a = 1; a < R_grid.size(); ++a)
    if (!(R_grid[a] > R_grid[a - 1])) throw InvalidInput("separation grid must be increasing");

  std::vector<int> all = left;
  all.insert(all.end(), right.begin(), right.end());
  const SystemSpec sub = spec.subsystem(all);
  const Grid& g = left_state.fields.grid;
  const double h = g.spacing();

  SeparationCurve c;
  c.left = left;
  c.right = right;
  c.left_energy = left_state.energy;
  c.right_energy = right_state.energy;
  c.limit = c.left_energy + c.right_energy;

  for (double R : R_grid) {
    const long S = std::lround(R / h);
    const long sl = S / 2, sr = S - sl;
    FieldVector L = left_state.fields, Rf = right_state.fields;
    const double lost = std::max(shift_fields(L, -sl), shift_fields(Rf, sr));
    if (lost > 1e-8) {
      c.skipped.push_back(S * h);
      continue;
    }
    FieldVector u(g, sub.k);
    for (int j = 0; j < L.k(); ++j) u[j] = L[j];
    for (int j = 0; j < Rf.k(); ++j) u[L.k() + j] = Rf[j];
    try {
      const ProjectionResult p = project_nehari(sub, u, ConstraintPartition::singletons(sub.k));
      c.R.push_back(S * h);
      c.energy.push_back(energy(sub, p.fields));
      c.multipliers.push_back(p.t);
    } catch (const ProjectionInfeasible&) {
      c.skipped.push_back(S * h);
    }
  }
  if (c.energy.empty()) throw ProjectionInfeasible("no separation in the grid admitted a projection");

  const auto it = std::min_element(c.energy.begin(), c.energy.end());
  const std::size_t a = static_cast<std::size_t>(it - c.energy.begin());
  c.min_energy = *it;
  c.argmin_R = c.R[a];
  c.below_limit = c.min_energy < c.limit - 1e-12 * std::abs(c.limit);
  c.interior = c.below_limit && a > 0 && a + 1 < c.energy.size();
  return c;
}

}  // namespace cnls
