#include "cnls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace cnls {

Grid analysis_grid(const SystemSpec& spec, const AnalysisOptions& opts) {
  const double h = opts.spacing;
  const double L = opts.extent > 0.0 ? opts.extent : std::max(20.0, 24.0 / std::sqrt(spec.lambda_min()));
  return Grid::make(1, h * std::ceil(L / h), h);
}

namespace {

// Zero-padded on both sides so shifted copies stay inside the table.
LineProfile padded(const Grid& g, const Eigen::VectorXd& v, double pad) {
  const long extra = static_cast<long>(std::ceil(pad / g.spacing())) + 1;
  LineProfile p;
  p.h = g.spacing();
  p.x0 = g.coord(0) - extra * p.h;
  p.values = Eigen::VectorXd::Zero(v.size() + 2 * extra);
  p.values.segment(extra, v.size()) = v.cwiseAbs();
  return p;
}

GroundStateResult best_side(const SystemSpec& spec, const std::vector<int>& idx, const Grid& grid,
                            const MinimizeOptions& opts) {
  const SystemSpec sub = spec.subsystem(idx);
  if (sub.k == 1) return side_state(spec, idx, grid, opts);
  const OptimalDecompositions opt = optimal_decompositions(sub.beta);
  std::optional<GroundStateResult> best;
  for (const auto& dec : opt.decompositions) {
    GroundStateResult r = minimize(sub, ConstraintPartition::singletons(sub.k),
                                   soliton_guess(sub, grid, suggest_centers(sub, dec)), opts);
    if (!best || r.energy < best->energy) best = std::move(r);
  }
  return *best;
}

MinimizeOptions side_options(MinimizeOptions o) {
  o.split_limits.clear();
  return o;
}

}  // namespace

std::vector<Profile> block_states(const SystemSpec& spec, const BlockDecomposition& dec,
                                  const AnalysisOptions& opts) {
  std::vector<Profile> out(spec.k);
  const double pad = 24.0 / std::sqrt(spec.lambda_min());
  if (spec.dim == 1) {
    const Grid g = analysis_grid(spec, opts);
    for (const auto& blk : dec.blocks) {
      const GroundStateResult r = side_state(spec, blk, g, side_options(opts.minimize));
      for (std::size_t a = 0; a < blk.size(); ++a) out[blk[a]] = padded(g, r.fields[static_cast<int>(a)], pad);
    }
    return out;
  }
  // radial solitons scaled by the co-located multipliers of their block
  for (const auto& blk : dec.blocks) {
    const SystemSpec sub = spec.subsystem(blk);
    std::vector<ScalarSoliton> sol;
    for (int j = 0; j < sub.k; ++j)
      sol.push_back(solve_scalar(sub.lambda(j), sub.mu(j), spec.dim,
                                 profile_mesh(sub.lambda(j), opts.overlap.spacing, pad)));
    GramData d;
    d.norms.resize(sub.k);
    d.quartic.resize(sub.k, sub.k);
    for (int i = 0; i < sub.k; ++i) {
      d.norms(i) = sol[i].lambda_norm_sq();
      for (int j = 0; j <= i; ++j)
        d.quartic(i, j) = d.quartic(j, i) =
            i == j ? sol[i].l4_pow4 : overlap_integral(sol[i].profile, sol[j].profile, 0.0, opts.overlap).value;
    }
    const Multipliers m = solve_multipliers(sub, d, ConstraintPartition::singletons(sub.k));
    for (int j = 0; j < sub.k; ++j) out[blk[j]] = sol[j].profile.scaled(m.t[j]);
  }
  return out;
}

BlockAnalysis analyze_blocks(const SystemSpec& spec, const AnalysisOptions& opts) {
  BlockAnalysis an;
  an.optimal = optimal_decompositions(spec.beta);
  an.cls = classify_couplings(spec.beta, an.optimal);
  an.R_grid = default_force_grid(spec, opts.force_points);
  an.eventual_complete = true;
  bool any = false;
  for (const auto& dec : an.optimal.decompositions) {
    std::vector<ForceEstimate> forces;
    std::map<std::pair<int, int>, std::size_t> at;
    if (dec.degree() > 1) {
      const std::vector<Profile> states = block_states(spec, dec, opts);
      for (int s = 0; s < dec.degree(); ++s)
        for (int t = s + 1; t < dec.degree(); ++t) {
          at[{s, t}] = forces.size();
          forces.push_back(interaction_force(spec, dec.blocks[s], dec.blocks[t], states, an.R_grid, opts.overlap));
        }
    }
    an.forces.push_back(forces);
    const ForceOracle oracle = [&](int s, int t) { return forces[at.at({std::min(s, t), std::max(s, t)})]; };
    try {
      EventualAnalysis ev = eventual_decomposition(spec, dec, oracle, opts.max_trees);
      if (!any || ev.min_m < an.min_m) an.min_m = ev.min_m;
      if (!any || ev.max_m > an.max_m) an.max_m = ev.max_m;
      any = true;
      an.eventual.push_back(std::move(ev));
    } catch (const ForceIndeterminate&) {
      an.indeterminate.push_back(blocks_str(dec.blocks));
      an.eventual_complete = false;
      EventualAnalysis empty;
      empty.start = dec;
      an.eventual.push_back(std::move(empty));
    }
  }
  return an;
}

std::vector<double> suggest_centers(const SystemSpec& spec, const BlockDecomposition& dec) {
  std::vector<double> c(spec.k, 0.0);
  const double gap = 6.0 / std::sqrt(spec.lambda_min());
  const int d = dec.degree();
  for (int s = 0; s < d; ++s)
    for (int j : dec.blocks[s]) c[j] = (s - 0.5 * (d - 1)) * gap;
  return c;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> decomposition_splits(const OptimalDecompositions& opt) {
  std::set<std::vector<int>> seen;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  for (const auto& dec : opt.decompositions) {
    const int d = dec.degree();
    if (d < 2 || d > 20) continue;
    // subsets containing block 0, proper
    for (unsigned mask = 1; mask < (1u << d) - 1; mask += 2) {
      std::vector<int> left, right;
      for (int s = 0; s < d; ++s)
        for (int j : dec.blocks[s]) ((mask >> s) & 1u ? left : right).push_back(j);
      std::sort(left.begin(), left.end());
      std::sort(right.begin(), right.end());
      if (seen.insert(left).second) out.emplace_back(left, right);
    }
  }
  return out;
}

GroundStateRun run_ground_state(const SystemSpec& spec, const GroundStateOptions& opts) {
  GroundStateRun run;
  const AnalysisOptions& ao = opts.analysis;
  const ConstraintPartition partition = opts.partition ? *opts.partition : ConstraintPartition::singletons(spec.k);
  partition.validate(spec.k);
  const OptimalDecompositions opt = optimal_decompositions(spec.beta);

  std::vector<std::pair<std::string, std::vector<double>>> starts;
  if (!opts.centers.empty()) {
    if (static_cast<int>(opts.centers.size()) != spec.k) throw InvalidInput("need one centre per component");
    starts.emplace_back("user", opts.centers);
  } else {
    for (const auto& dec : opt.decompositions) starts.emplace_back(blocks_str(dec.blocks), suggest_centers(spec, dec));
  }

  if (spec.dim != 1) {
    AnsatzOptions an;
    an.spacing = ao.overlap.spacing > 0.0 ? std::max(ao.overlap.spacing, 0.05) : 0.05;
    for (const auto& [name, c] : starts) {
      AnsatzResult r = translate_ansatz(spec, partition, c, an);
      if (!run.ansatz || r.energy < run.ansatz->energy) {
        run.start = name;
        run.start_centers = c;
        run.ansatz = std::move(r);
      }
    }
    run.result.partition = partition;
    run.result.energy = run.ansatz->energy;
    run.result.diagnosis = run.ansatz->diagnosis;
    run.result.centroids = run.ansatz->centers;
    run.result.condition = run.ansatz->condition;
    run.result.note = run.ansatz->note;
    run.attainment.diagnosis = run.ansatz->diagnosis;
    run.attainment.energy = run.ansatz->energy;
    run.attainment.tol_split = ao.minimize.tol_split;
    run.attainment.note = run.ansatz->note;
    run.notes.push_back("translate ansatz: separation sweeps and Morse index need a full grid and are skipped");
    return run;
  }

  const Grid g = analysis_grid(spec, ao);
  const auto splits = decomposition_splits(opt);
  std::map<std::vector<int>, GroundStateResult> sides;
  auto side = [&](const std::vector<int>& idx) -> const GroundStateResult& {
    auto it = sides.find(idx);
    if (it == sides.end()) it = sides.emplace(idx, best_side(spec, idx, g, side_options(ao.minimize))).first;
    return it->second;
  };

  MinimizeOptions mo = ao.minimize;
  if (opts.sweeps && spec.k > 1)
    for (const auto& [l, r] : splits) mo.split_limits.push_back(side(l).energy + side(r).energy);

  std::optional<GroundStateResult> best;
  for (const auto& [name, c] : starts) {
    GroundStateResult r = minimize(spec, partition, soliton_guess(spec, g, c), mo);
    if (!best || r.energy < best->energy) {
      run.start = name;
      run.start_centers = c;
      best = std::move(r);
    }
  }
  run.result = std::move(*best);

  if (opts.sweeps && spec.k > 1) {
    std::vector<double> R = opts.R_grid;
    if (R.empty()) {
      const double dl = 1.0 / std::sqrt(spec.lambda_min());
      R = linspace(0.5 * dl, std::min(16.0 * dl, g.extent() - 10.0 * dl), 32);
    }
    for (const auto& [l, r] : splits) run.sweeps.push_back(sweep_separation(spec, l, r, R, side(l), side(r)));
  }
  run.attainment = check_attainment(spec, run.result, run.sweeps, mo.tol_split);

  if (opts.morse && run.result.diagnosis == Diagnosis::Attained) {
    try {
      run.morse = morse_index(spec, run.result.fields, opts.morse_options);
      run.result.morse_index = run.morse->index;
      run.result.zero_modes = run.morse->zero_modes;
    } catch (const SolverError& e) {
      run.notes.push_back(std::string("Morse index skipped: ") + e.what());
    }
  }
  return run;
}

}  // namespace cnls
