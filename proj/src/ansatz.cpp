#include "cnls/overlap.hpp"
#include "cnls/solver.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace cnls {

namespace {

struct PairTables {
  double hq = 0.0;
  std::map<std::pair<int, int>, std::vector<double>> table;

  double at(int i, int j, long steps) const {
    const auto& t = table.at({std::min(i, j), std::max(i, j)});
    steps = std::labs(steps);
    return steps < static_cast<long>(t.size()) ? t[steps] : 0.0;
  }
};

}  // namespace

AnsatzResult translate_ansatz(const SystemSpec& spec, const ConstraintPartition& partition,
                              const std::vector<double>& init_centers, const AnsatzOptions& opts) {
  partition.validate(spec.k);
  if (static_cast<int>(init_centers.size()) != spec.k) throw InvalidInput("need one centre per component");
  if (!(opts.spacing > 0.0)) throw InvalidInput("ansatz spacing must be positive");
  const double hq = opts.spacing;
  const double R_max = opts.R_max > 0.0 ? opts.R_max : 16.0 / std::sqrt(spec.lambda_min());
  const long n_R = static_cast<long>(std::ceil(R_max / hq));

  // shapes long enough that shifted tails stay inside the tables
  const double reach = n_R * hq + 20.0 / std::sqrt(spec.lambda_min());
  std::vector<ScalarSoliton> shapes;
  for (int j = 0; j < spec.k; ++j)
    shapes.push_back(solve_scalar(spec.lambda(j), spec.mu(j), spec.dim,
                                  Grid::make(1, hq * std::ceil(reach / hq), hq)));

  AnsatzResult res;
  res.gram.norms.resize(spec.k);
  for (int j = 0; j < spec.k; ++j) res.gram.norms(j) = shapes[j].lambda_norm_sq();

  PairTables tabs;
  tabs.hq = hq;
  std::vector<double> Rg(n_R + 1);
  for (long a = 0; a <= n_R; ++a) Rg[a] = a * hq;
  OverlapOptions oo;
  oo.spacing = hq;
  for (int i = 0; i < spec.k; ++i)
    for (int j = i; j < spec.k; ++j) {
      if (i != j && spec.beta(i, j) == 0.0) {
        tabs.table[{i, j}] = {};
        continue;
      }
      std::vector<double> t;
      if (i == j) {
        t.push_back(shapes[i].l4_pow4);
      } else {
        for (const SweepPoint& s : decay_sweep(shapes[i].profile, shapes[j].profile, Rg, oo))
          t.push_back(s.overlap);
      }
      tabs.table[{i, j}] = std::move(t);
    }

  std::vector<long> pos(spec.k);
  for (int j = 0; j < spec.k; ++j) pos[j] = std::lround(init_centers[j] / hq);

  auto evaluate = [&](const std::vector<long>& p, Multipliers* out) {
    ++res.evaluations;
    GramData d;
    d.norms = res.gram.norms;
    d.quartic = Eigen::MatrixXd::Zero(spec.k, spec.k);
    for (int i = 0; i < spec.k; ++i) {
      d.quartic(i, i) = shapes[i].l4_pow4;
      for (int j = 0; j < i; ++j) d.quartic(i, j) = d.quartic(j, i) = tabs.at(i, j, p[i] - p[j]);
    }
    try {
      const Multipliers m = solve_multipliers(spec, d, partition);
      double e = 0.0;
      for (std::size_t g = 0; g < partition.groups.size(); ++g)
        for (int j : partition.groups[g]) e += 0.25 * m.t[g] * m.t[g] * d.norms(j);
      if (out) {
        *out = m;
        res.gram = d;
      }
      return e;
    } catch (const ProjectionInfeasible&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double E = evaluate(pos, nullptr);
  if (!std::isfinite(E)) throw ProjectionInfeasible("initial centres admit no projection");
  // pattern search, component 0 pinned
  int iters = 0;
  for (long step = 64; step >= 1; step /= 2) {
    bool improved = true;
    while (improved && iters < opts.max_iter) {
      improved = false;
      ++iters;
      for (int j = 1; j < spec.k; ++j)
        for (long dir : {-step, step}) {
          std::vector<long> trial = pos;
          trial[j] += dir;
          const double e = evaluate(trial, nullptr);
          if (e < E - 1e-15 * std::abs(E)) {
            E = e;
            pos = std::move(trial);
            improved = true;
          }
        }
    }
  }

  Multipliers m;
  res.energy = evaluate(pos, &m);
  res.t = m.t;
  res.condition = m.condition;
  for (long p : pos) res.centers.push_back(p * hq);
  double widest = 0.0;
  for (int i = 0; i < spec.k; ++i)
    for (int j = 0; j < i; ++j)
      if (spec.beta(i, j) != 0.0) widest = std::max(widest, std::abs(res.centers[i] - res.centers[j]));
  std::ostringstream note;
  if (iters >= opts.max_iter) {
    res.diagnosis = Diagnosis::MaxIterations;
    note << "pattern search hit the iteration limit";
  } else if (widest >= R_max - hq) {
    res.diagnosis = Diagnosis::SplittingDetected;
    note << "coupled centres drifted to the table edge " << R_max
         << "; this is a numerical diagnosis, not a proof of nonexistence";
  } else {
    res.diagnosis = Diagnosis::Attained;
    note << "shapes fixed to scalar solitons; only centres and amplitudes optimized";
  }
  res.note = note.str();
  return res;
}

}  // namespace cnls
