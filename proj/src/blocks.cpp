#include "cnls/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace cnls {

std::string to_string(CouplingClass c) {
  switch (c) {
    case CouplingClass::PurelyAttractive: return "PurelyAttractive";
    case CouplingClass::PurelyRepulsive: return "PurelyRepulsive";
    case CouplingClass::RepulsiveMixed: return "RepulsiveMixed";
    case CouplingClass::TotalMixed: return "TotalMixed";
  }
  return "?";
}

std::string to_string(ForceSign s) {
  switch (s) {
    case ForceSign::Attractive: return "attractive";
    case ForceSign::Repulsive: return "repulsive";
    case ForceSign::Indeterminate: return "indeterminate";
  }
  return "?";
}

std::string blocks_str(const Blocks& b) {
  std::ostringstream os;
  for (std::size_t g = 0; g < b.size(); ++g) {
    if (g) os << '|';
    os << '{';
    for (std::size_t a = 0; a < b[g].size(); ++a) os << (a ? "," : "") << b[g][a] + 1;
    os << '}';
  }
  return os.str();
}

BlockDecomposition BlockDecomposition::canonical(Blocks b) {
  for (auto& blk : b) std::sort(blk.begin(), blk.end());
  std::sort(b.begin(), b.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return {std::move(b)};
}

std::vector<int> BlockDecomposition::permutation() const {
  std::vector<int> p;
  for (const auto& b : blocks) p.insert(p.end(), b.begin(), b.end());
  return p;
}

std::vector<int> BlockDecomposition::cuts() const {
  std::vector<int> c{0};
  for (const auto& b : blocks) c.push_back(c.back() + static_cast<int>(b.size()));
  return c;
}

// ---------------------------------------------------------------------------
// Minimum clique cover of the positive-coupling graph

namespace {

struct CoverSearch {
  int k;
  std::vector<std::vector<char>> pos;
  int best;
  Blocks current;
  std::vector<Blocks> found;

  bool fits(const std::vector<int>& blk, int v) const {
    for (int u : blk)
      if (!pos[u][v]) return false;
    return true;
  }

  // Elements are placed in index order, so every partition is produced once in
  // restricted-growth form, which is already canonical.
  void run(int v) {
    if (static_cast<int>(current.size()) > best) return;
    if (v == k) {
      const int d = static_cast<int>(current.size());
      if (d < best) {
        best = d;
        found.clear();
      }
      found.push_back(current);
      return;
    }
    for (std::size_t b = 0; b < current.size(); ++b)
      if (fits(current[b], v)) {
        current[b].push_back(v);
        run(v + 1);
        current[b].pop_back();
      }
    if (static_cast<int>(current.size()) + 1 <= best) {
      current.push_back({v});
      run(v + 1);
      current.pop_back();
    }
  }
};

Blocks greedy_cover(const std::vector<std::vector<char>>& pos) {
  const int k = static_cast<int>(pos.size());
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  // most constrained (fewest positive neighbours) first
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto deg = [&](int v) { return std::count(pos[v].begin(), pos[v].end(), 1); };
    return deg(a) < deg(b) || (deg(a) == deg(b) && a < b);
  });
  Blocks out;
  for (int v : order) {
    bool placed = false;
    for (auto& blk : out) {
      bool ok = true;
      for (int u : blk) ok = ok && pos[u][v];
      if (ok) {
        blk.push_back(v);
        placed = true;
        break;
      }
    }
    if (!placed) out.push_back({v});
  }
  return out;
}

}  // namespace

OptimalDecompositions optimal_decompositions(const Eigen::MatrixXd& beta) {
  const int k = static_cast<int>(beta.rows());
  if (beta.cols() != k) throw InvalidInput("coupling matrix must be square");
  std::vector<std::vector<char>> pos(k, std::vector<char>(k, 0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) pos[i][j] = (i != j && beta(i, j) > 0.0) ? 1 : 0;

  OptimalDecompositions out;
  if (k > 12) {
    out.exact = false;
    out.warning = "k > 12: greedy clique cover, degree is an upper bound";
    out.decompositions.push_back(BlockDecomposition::canonical(greedy_cover(pos)));
    out.degree = out.decompositions.front().degree();
    return out;
  }
  CoverSearch s{k, pos, k, {}, {}};
  s.run(0);
  out.degree = s.best;
  for (auto& b : s.found) out.decompositions.push_back(BlockDecomposition::canonical(b));
  std::sort(out.decompositions.begin(), out.decompositions.end(),
            [](const auto& a, const auto& b) { return a.blocks < b.blocks; });
  return out;
}

CouplingClass classify_couplings(const Eigen::MatrixXd& beta) {
  return classify_couplings(beta, optimal_decompositions(beta));
}

CouplingClass classify_couplings(const Eigen::MatrixXd& beta, const OptimalDecompositions& opt) {
  const int k = static_cast<int>(beta.rows());
  bool all_pos = true, all_neg = true;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      all_pos = all_pos && beta(i, j) > 0.0;
      all_neg = all_neg && beta(i, j) < 0.0;
    }
  if (all_pos) return CouplingClass::PurelyAttractive;
  if (all_neg) return CouplingClass::PurelyRepulsive;
  for (const auto& d : opt.decompositions)
    for (const auto& blk : d.blocks) {
      bool repelled = true;
      for (int i : blk)
        for (int j = 0; j < k; ++j)
          if (std::find(blk.begin(), blk.end(), j) == blk.end() && !(beta(i, j) < 0.0)) repelled = false;
      if (repelled) return CouplingClass::RepulsiveMixed;
    }
  return CouplingClass::TotalMixed;
}

// ---------------------------------------------------------------------------
// Forces

std::vector<double> default_force_grid(const SystemSpec& spec, int n) {
  const double len = 1.0 / std::sqrt(spec.lambda_min());
  return geomspace(4.0 * len, 20.0 * len, n);
}

ForceEstimate interaction_force(const SystemSpec& spec, const std::vector<int>& left,
                                const std::vector<int>& right, const std::vector<Profile>& states,
                                const std::vector<double>& R_grid, const OverlapOptions& opts) {
  if (static_cast<int>(states.size()) != spec.k) throw InvalidInput("need one profile per component");
  if (R_grid.empty()) throw InvalidInput("empty separation grid");
  ForceEstimate f;
  f.left = left;
  f.right = right;
  struct Pair {
    int i, j;
    std::vector<SweepPoint> sweep;
  };
  std::vector<Pair> pairs;
  for (int i : left)
    for (int j : right) {
      if (std::find(left.begin(), left.end(), j) != left.end())
        throw InvalidInput("force blocks must be disjoint");
      pairs.push_back({i, j, decay_sweep(states[i], states[j], R_grid, opts)});
    }
  const std::size_t nR = R_grid.size();
  bool resolved = false;
  std::size_t best = 0;
  for (std::size_t r = 0; r < nR; ++r) {
    double s = 0.0, scale = 0.0;
    for (const auto& p : pairs) {
      const double t = spec.beta(p.i, p.j) * p.sweep[r].overlap;
      s += t;
      scale += std::abs(t);
    }
    f.R.push_back(pairs.empty() ? R_grid[r] : pairs.front().sweep[r].R);
    f.curve.push_back(s);
    if (scale > 0.0 && std::abs(s) > 1e-12 * scale) resolved = true;
    if (s > f.curve[best]) best = r;
  }
  f.value = f.curve[best];
  f.argmax_R = f.R[best];
  for (const auto& p : pairs) f.terms.push_back({p.i, p.j, spec.beta(p.i, p.j), p.sweep[best].overlap});
  if (!resolved)
    f.sign = ForceSign::Indeterminate;
  else
    f.sign = f.value > 0.0 ? ForceSign::Attractive : ForceSign::Repulsive;
  return f;
}

// ---------------------------------------------------------------------------
// Eventual decompositions

namespace {

struct Enumerator {
  const Eigen::MatrixXd& F0;
  const std::vector<std::vector<char>>& indeterminate;
  const Blocks& start;
  int max_trees;
  std::vector<EventualDecomposition> trees;

  Eigen::MatrixXd composite(const std::vector<std::vector<int>>& groups) const {
    const int n = static_cast<int>(groups.size());
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        double s = 0.0;
        for (int x : groups[a])
          for (int y : groups[b]) {
            if (indeterminate[x][y])
              throw ForceIndeterminate("force between start blocks " + std::to_string(x + 1) + " and " +
                                       std::to_string(y + 1) + " is indeterminate");
            s += F0(x, y);
          }
        F(a, b) = s;
      }
    return F;
  }

  GroupingLevel level(const std::vector<std::vector<int>>& groups) const {
    GroupingLevel L;
    L.groups = groups;
    for (const auto& g : groups) {
      std::vector<int> comp;
      for (int b : g) comp.insert(comp.end(), start[b].begin(), start[b].end());
      std::sort(comp.begin(), comp.end());
      L.components.push_back(comp);
    }
    L.forces = composite(groups);
    return L;
  }

  // All partitions of {0..n-1} into cliques of the positive graph that are
  // maximal: no two parts can be united into a clique.
  static void merges(const std::vector<std::vector<char>>& pos, int v, std::vector<std::vector<int>>& cur,
                     std::vector<std::vector<std::vector<int>>>& out) {
    const int n = static_cast<int>(pos.size());
    if (v == n) {
      for (std::size_t a = 0; a < cur.size(); ++a)
        for (std::size_t b = a + 1; b < cur.size(); ++b) {
          bool clique = true;
          for (int x : cur[a])
            for (int y : cur[b]) clique = clique && pos[x][y];
          if (clique) return;
        }
      out.push_back(cur);
      return;
    }
    for (std::size_t p = 0; p < cur.size(); ++p) {
      bool ok = true;
      for (int x : cur[p]) ok = ok && pos[x][v];
      if (ok) {
        cur[p].push_back(v);
        merges(pos, v + 1, cur, out);
        cur[p].pop_back();
      }
    }
    cur.push_back({v});
    merges(pos, v + 1, cur, out);
    cur.pop_back();
  }

  void grow(std::vector<GroupingLevel>& path) {
    if (static_cast<int>(trees.size()) >= max_trees) return;
    const GroupingLevel L = path.back();
    const int n = static_cast<int>(L.groups.size());
    std::vector<std::vector<char>> pos(n, std::vector<char>(n, 0));
    bool any = false;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b && L.forces(a, b) > 0.0) pos[a][b] = 1, any = true;
    if (!any) {
      trees.push_back({path, n});
      return;
    }
    std::vector<std::vector<int>> cur;
    std::vector<std::vector<std::vector<int>>> options;
    merges(pos, 0, cur, options);
    for (const auto& opt : options) {
      std::vector<std::vector<int>> groups;
      for (const auto& part : opt) {
        std::vector<int> g;
        for (int a : part) g.insert(g.end(), L.groups[a].begin(), L.groups[a].end());
        std::sort(g.begin(), g.end());
        groups.push_back(g);
      }
      path.push_back(level(groups));
      grow(path);
      path.pop_back();
    }
  }
};

}  // namespace

EventualAnalysis eventual_decomposition(const SystemSpec& spec, const BlockDecomposition& start,
                                        const ForceOracle& oracle, int max_trees) {
  (void)spec;
  const int d = start.degree();
  EventualAnalysis out;
  out.start = start;
  Eigen::MatrixXd F0 = Eigen::MatrixXd::Zero(d, d);
  std::vector<std::vector<char>> indet(d, std::vector<char>(d, 0));
  for (int s = 0; s < d; ++s)
    for (int t = s + 1; t < d; ++t) {
      const ForceEstimate f = oracle(s, t);
      F0(s, t) = F0(t, s) = f.value;
      if (f.sign == ForceSign::Indeterminate) indet[s][t] = indet[t][s] = 1;
    }
  out.base_forces = F0;
  Enumerator e{F0, indet, start.blocks, max_trees, {}};
  std::vector<std::vector<int>> groups;
  for (int s = 0; s < d; ++s) groups.push_back({s});
  std::vector<GroupingLevel> path{e.level(groups)};
  e.grow(path);
  out.trees = std::move(e.trees);
  out.min_m = d;
  out.max_m = 0;
  for (const auto& t : out.trees) {
    out.min_m = std::min(out.min_m, t.m);
    out.max_m = std::max(out.max_m, t.m);
  }
  return out;
}

}  // namespace cnls
