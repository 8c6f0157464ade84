#include "cnls/analysis.hpp"
#include "cnls/line_operator.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace cnls {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Exists: return "Exists";
    case Verdict::NotExists: return "NotExists";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

std::vector<std::string> predictor_rules() {
  return {"positive-definite-repulsion",
          "three-component-heavy-hub-dominant-repulsion",
          "four-component-H-light-pair-scaling",
          "scaled-total-mixed-weak-repulsion",
          "three-component-light-hub",
          "four-component-H-dominant-attraction",
          "single-eventual-block"};
}

Eigen::MatrixXd pair_thresholds(const SystemSpec& spec) {
  const double h = 0.05;
  const double L = h * std::ceil(24.0 / std::sqrt(spec.lambda_min()) / h);
  const LineOperator op = spec.dim == 1 ? LineOperator::cartesian(Grid::make(1, L, h))
                                        : LineOperator::radial(spec.dim, h, static_cast<int>(std::lround(L / h)));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.k, spec.k);
  for (int i = 0; i < spec.k; ++i)
    for (int j = 0; j < i; ++j)
      out(i, j) = out(j, i) = beta_bar(op, spec.lambda(i), spec.mu(i), spec.lambda(j), spec.mu(j));
  return out;
}

namespace {

std::string pair_str(int i, int j) {
  return "beta_" + std::to_string(i + 1) + std::to_string(j + 1);
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

struct Ctx {
  const SystemSpec& spec;
  const BlockAnalysis& an;
  const std::optional<DeltaScaling>& sc;
  double small = 0.0;
  Eigen::MatrixXd large;
  PredictThresholds th;
  std::vector<std::string> unmet;

  double b(int i, int j) const { return spec.beta(i, j); }
  double t(int i, int j) const { return sc->exponent(i, j); }
  void fail(const std::string& rule, const std::string& why) { unmet.push_back(rule + ": " + why); }

  // Every Exists verdict needs a complete eventual analysis with m = 1.
  bool single_eventual(const std::string& rule) {
    if (!an.eventual_complete) {
      fail(rule, "eventual decompositions unavailable (force sign indeterminate)");
      return false;
    }
    if (an.max_m > 1) {
      fail(rule, "an eventual decomposition has m = " + std::to_string(an.max_m));
      return false;
    }
    return true;
  }

  bool delta_small(const std::string& rule) {
    if (!sc) {
      fail(rule, "no delta scaling given");
      return false;
    }
    if (!(sc->delta > 0.0 && sc->delta <= th.delta_small)) {
      fail(rule, "delta " + fmt(sc->delta) + " not in (0, " + fmt(th.delta_small) + "]");
      return false;
    }
    return true;
  }
};

bool positive_definite(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

// k = 3, one repulsive pair (b, c), hub a attracting both.
bool hub_pattern(const Ctx& c, int& a, int& b, int& d) {
  if (c.spec.k != 3) return false;
  for (a = 0; a < 3; ++a) {
    b = (a + 1) % 3;
    d = (a + 2) % 3;
    if (c.b(a, b) > 0.0 && c.b(a, d) > 0.0 && c.b(b, d) < 0.0) return true;
  }
  return false;
}

// Permutation p with the sign pattern
//   + + -
//     - +
//       -
// on (p0p1, p0p2, p0p3 / p1p2, p1p3 / p2p3).
std::vector<std::array<int, 4>> pattern_h(const SystemSpec& s) {
  std::vector<std::array<int, 4>> out;
  if (s.k != 4) return out;
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    const auto B = [&](int x, int y) { return s.beta(p[x], p[y]); };
    if (B(0, 1) > 0 && B(0, 2) > 0 && B(0, 3) < 0 && B(1, 2) < 0 && B(1, 3) > 0 && B(2, 3) < 0) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::string perm_str(const std::array<int, 4>& p) {
  std::string s = "(";
  for (int a = 0; a < 4; ++a) s += (a ? "," : "") + std::to_string(p[a] + 1);
  return s + ")";
}

// Strong pairs (beta above the pair threshold) must form disjoint complete
// cliques inside blocks, at most one of them a proper subset of its block.
// The covered count n fixes the index gamma = k - n + 1.
std::optional<int> grouping_index(Ctx& c, const BlockDecomposition& dec, std::vector<std::string>& why) {
  const int k = c.spec.k;
  std::vector<int> block_of(k);
  for (int s = 0; s < dec.degree(); ++s)
    for (int j : dec.blocks[s]) block_of[j] = s;

  std::vector<std::vector<int>> adj(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j && c.b(i, j) > c.large(i, j)) adj[i].push_back(j);

  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double v = c.b(i, j);
      if (v > c.large(i, j)) {
        if (block_of[i] != block_of[j]) why.push_back(pair_str(i, j) + " is strong but joins two blocks");
      } else if (!(v < c.small)) {
        why.push_back(pair_str(i, j) + " = " + fmt(v) + " is neither below " + fmt(c.small) +
                      " nor above " + fmt(c.large(i, j)));
      }
    }
  if (!why.empty()) return std::nullopt;

  std::vector<int> seen(k, 0);
  int covered = 0, partial = 0;
  std::vector<std::vector<int>> cliques;
  for (int i = 0; i < k; ++i) {
    if (seen[i] || adj[i].empty()) continue;
    std::vector<int> cl{i};
    for (std::size_t a = 0; a < cl.size(); ++a)
      for (int j : adj[cl[a]])
        if (std::find(cl.begin(), cl.end(), j) == cl.end()) cl.push_back(j);
    for (int j : cl) seen[j] = 1;
    for (int x : cl)
      for (int y : cl)
        if (x != y && std::find(adj[x].begin(), adj[x].end(), y) == adj[x].end())
          why.push_back("strong pairs around component " + std::to_string(x + 1) + " do not form a clique");
    if (cl.size() != dec.blocks[block_of[i]].size()) ++partial;
    covered += static_cast<int>(cl.size());
    cliques.push_back(cl);
  }
  if (partial > 1) why.push_back("strong pairs cover proper parts of more than one block");

  for (const auto& cl : cliques) {
    // beta_ij and beta_il sharing an index must be close
    for (int i : cl)
      for (int j : cl)
        for (int l : cl)
          if (i != j && i != l && j < l && !near(c.b(i, j), c.b(i, l), c.th.near_equal))
            why.push_back(pair_str(i, j) + " and " + pair_str(i, l) + " not near-equal");
    // lambda near-equality for full blocks of three or more and partial groups of four or more
    const bool full = cl.size() == dec.blocks[block_of[cl[0]]].size();
    if ((full && cl.size() >= 3) || (!full && cl.size() >= 4))
      for (int i : cl)
        for (int j : cl)
          if (i < j && !near(c.spec.lambda(i), c.spec.lambda(j), c.th.near_equal))
            why.push_back("lambda_" + std::to_string(i + 1) + " and lambda_" + std::to_string(j + 1) +
                          " not near-equal");
  }
  if (!why.empty()) return std::nullopt;
  const int n = std::max(1, covered);
  const int gamma = k - n + 1;
  if (gamma < dec.degree()) {
    why.push_back("index " + std::to_string(gamma) + " below the degree " + std::to_string(dec.degree()));
    return std::nullopt;
  }
  return gamma;
}

}  // namespace

ExistencePrediction predict_existence(const SystemSpec& spec, const BlockAnalysis& an,
                                      const PredictThresholds& th,
                                      const std::optional<DeltaScaling>& scaling) {
  Ctx c{spec, an, scaling, 0.0, {}, th, {}};
  const int k = spec.k;
  if (th.beta_small >= 0.0) {
    c.small = th.beta_small;
  } else {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < i; ++j) m = std::min(m, std::sqrt(spec.mu(i) * spec.mu(j)));
    c.small = k > 1 ? 0.1 * m : 0.0;
  }
  c.large = th.beta_large >= 0.0 ? Eigen::MatrixXd::Constant(k, k, th.beta_large) : pair_thresholds(spec);

  ExistencePrediction out;
  out.beta_small = c.small;
  out.beta_large = c.large;
  auto done = [&](Verdict v, const std::string& rule, std::optional<std::pair<int, int>> range = std::nullopt) {
    out.verdict = v;
    out.matched_rule = rule;
    out.morse_index_range = range;
    out.unmet_hypotheses = c.unmet;
    return out;
  };

  if (k < 2) {
    out.notes.push_back("a single component always has its soliton as ground state");
    return done(Verdict::Exists, "single-component", std::make_pair(1, 1));
  }

  if (scaling) {
    if (scaling->exponent.rows() != k || scaling->exponent.cols() != k || scaling->beta_hat.rows() != k ||
        scaling->beta_hat.cols() != k)
      throw InvalidInput("delta scaling needs k x k exponent and beta_hat matrices");
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < i; ++j) {
        const double want = std::pow(scaling->delta, scaling->exponent(i, j)) * scaling->beta_hat(i, j);
        if (!near(spec.beta(i, j), want, 1e-9))
          out.notes.push_back(pair_str(i, j) + " = " + fmt(spec.beta(i, j)) +
                              " differs from delta^t beta_hat = " + fmt(want));
      }
  }
  const bool scaled_ok = scaling && std::none_of(out.notes.begin(), out.notes.end(), [](const std::string& s) {
                           return s.find("differs") != std::string::npos;
                         });

  // -- nonexistence -------------------------------------------------------
  {
    const std::string rule = "positive-definite-repulsion";
    if (an.cls == CouplingClass::PurelyRepulsive || an.cls == CouplingClass::RepulsiveMixed) {
      if (positive_definite(spec.beta)) return done(Verdict::NotExists, rule);
      c.fail(rule, "coupling matrix is not positive definite");
    }
  }

  int a = 0, b = 0, d = 0;
  const bool hub = hub_pattern(c, a, b, d);
  if (hub && scaling) {
    const std::string rule = "three-component-heavy-hub-dominant-repulsion";
    bool ok = scaled_ok && c.delta_small(rule);
    if (!scaled_ok) c.fail(rule, "couplings do not follow the delta scaling");
    if (!(spec.lambda(a) >= std::min(spec.lambda(b), spec.lambda(d)))) {
      ok = false;
      c.fail(rule, "hub lambda_" + std::to_string(a + 1) + " is below both others");
    }
    const double tr = c.t(b, d);
    if (!(tr > 0.0 && tr < std::min(c.t(a, b), c.t(a, d)))) {
      ok = false;
      c.fail(rule, "repulsive exponent " + fmt(tr) + " not in (0, min of attractive exponents)");
    }
    if (ok) return done(Verdict::NotExists, rule);
  }

  const auto hperms = pattern_h(spec);
  if (!hperms.empty() && scaling) {
    const std::string rule = "four-component-H-light-pair-scaling";
    bool any = false;
    std::vector<std::string> local;
    for (const auto& p : hperms) {
      const auto T = [&](int x, int y) { return c.t(p[x], p[y]); };
      const auto L = [&](int x) { return spec.lambda(p[x]); };
      const bool lam = std::min(L(2), L(3)) < std::min(L(0), L(1));
      const double tmax = std::max({T(1, 2), T(0, 3), T(2, 3)});
      const bool ord = tmax < T(0, 1) && T(0, 1) < std::min(T(0, 2), T(1, 3));
      if (lam && ord) any = true;
      if (!lam) local.push_back("ordering " + perm_str(p) + ": lambda of the repelled pair is not the smallest");
      if (!ord) local.push_back("ordering " + perm_str(p) + ": exponents out of order");
    }
    if (!scaled_ok) c.fail(rule, "couplings do not follow the delta scaling");
    if (any && scaled_ok && c.delta_small(rule)) return done(Verdict::NotExists, rule);
    if (!any)
      for (const auto& s : local) c.fail(rule, s);
  }

  if (an.cls == CouplingClass::TotalMixed && scaling) {
    const std::string rule = "scaled-total-mixed-weak-repulsion";
    bool ok = scaled_ok && c.delta_small(rule);
    if (!scaled_ok) c.fail(rule, "couplings do not follow the delta scaling");
    const Eigen::MatrixXd& H = scaling->beta_hat;
    double tmin_pos = std::numeric_limits<double>::infinity(), tmax_neg = -tmin_pos;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < i; ++j) {
        if (H(i, j) > 0) tmin_pos = std::min(tmin_pos, c.t(i, j));
        if (H(i, j) < 0) tmax_neg = std::max(tmax_neg, c.t(i, j));
      }
    if (!(tmax_neg < tmin_pos)) {
      ok = false;
      c.fail(rule, "largest repulsive exponent " + fmt(tmax_neg) + " not below smallest attractive " + fmt(tmin_pos));
    }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < i; ++j)
        for (int x = 0; x < k; ++x)
          for (int y = 0; y < x; ++y)
            if (spec.beta(i, j) > 0 && spec.beta(x, y) < 0 &&
                std::min(spec.lambda(i), spec.lambda(j)) < std::min(spec.lambda(x), spec.lambda(y))) {
              if (ok)
                c.fail(rule, "attractive " + pair_str(i, j) + " decays slower than repulsive " + pair_str(x, y));
              ok = false;
            }
    // some optimal decomposition with a common inner exponent below the attractive inter exponents
    bool dec_ok = false;
    for (const auto& dec : an.optimal.decompositions) {
      std::set<double> inner;
      double tmin_int = std::numeric_limits<double>::infinity();
      std::vector<int> block_of(k);
      for (int s = 0; s < dec.degree(); ++s)
        for (int j : dec.blocks[s]) block_of[j] = s;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < i; ++j) {
          if (block_of[i] == block_of[j])
            inner.insert(c.t(i, j));
          else if (H(i, j) > 0)
            tmin_int = std::min(tmin_int, c.t(i, j));
        }
      if (inner.size() <= 1 && (inner.empty() || *inner.begin() < tmin_int)) dec_ok = true;
    }
    if (!dec_ok) {
      ok = false;
      c.fail(rule, "no optimal decomposition has a common inner exponent below the attractive inter exponents");
    }
    if (ok) return done(Verdict::NotExists, rule);
  }

  // -- existence ----------------------------------------------------------
  if (hub && an.cls == CouplingClass::TotalMixed) {
    const std::string rule = "three-component-light-hub";
    std::vector<std::string> why;
    if (!(spec.lambda(a) < std::min(spec.lambda(b), spec.lambda(d))))
      why.push_back("hub lambda_" + std::to_string(a + 1) + " is not the smallest");
    const bool wb = c.b(a, b) < c.small, wd = c.b(a, d) < c.small;
    const bool sb = c.b(a, b) > c.large(a, b), sd = c.b(a, d) > c.large(a, d);
    int gamma = 0;
    if (wb && wd)
      gamma = 3;
    else if ((sb && wd) || (wb && sd))
      gamma = 2;
    else
      why.push_back("hub couplings " + fmt(c.b(a, b)) + ", " + fmt(c.b(a, d)) +
                    " are neither both weak nor one strong and one weak");
    if (why.empty() && c.single_eventual(rule)) return done(Verdict::Exists, rule, std::make_pair(gamma, gamma));
    for (const auto& w : why) c.fail(rule, w);
  }

  if (!hperms.empty()) {
    const std::string rule = "four-component-H-dominant-attraction";
    std::vector<std::string> why;
    int gamma = 0;
    for (const auto& p : hperms) {
      const auto B = [&](int x, int y) { return spec.beta(p[x], p[y]); };
      const auto L = [&](int x) { return spec.lambda(p[x]); };
      std::vector<std::string> w;
      if (!(near(L(0), L(1), th.near_equal) && std::max(L(0), L(1)) < std::min(L(2), L(3))))
        w.push_back(perm_str(p) + ": the attracting pair is not the lightest near-equal pair");
      const double neg = std::max({-B(0, 3), -B(1, 2), -B(2, 3)});
      const double pos = std::min({B(0, 1), B(0, 2), B(1, 3)});
      if (!(neg <= th.dominance * pos)) w.push_back(perm_str(p) + ": repulsion not dominated by attraction");
      int g = 0;
      if (B(0, 2) < c.small) {
        if (B(0, 1) < c.small)
          g = 4;
        else if (B(0, 1) > c.large(p[0], p[1]))
          g = 3;
      }
      if (!g) w.push_back(perm_str(p) + ": couplings of the first component are neither weak nor strong-weak");
      if (w.empty()) {
        gamma = g;
        break;
      }
      why.insert(why.end(), w.begin(), w.end());
    }
    if (gamma && c.single_eventual(rule)) return done(Verdict::Exists, rule, std::make_pair(gamma, gamma));
    if (!gamma)
      for (const auto& w : why) c.fail(rule, w);
  }

  {
    const std::string rule = "single-eventual-block";
    if (c.single_eventual(rule)) {
      std::vector<std::string> why_all;
      for (const auto& dec : an.optimal.decompositions) {
        std::vector<std::string> why;
        if (auto g = grouping_index(c, dec, why)) {
          out.notes.push_back("grouping taken from " + blocks_str(dec.blocks));
          return done(Verdict::Exists, rule, std::make_pair(*g, *g));
        }
        for (const auto& w : why) why_all.push_back(blocks_str(dec.blocks) + ": " + w);
      }
      for (const auto& w : why_all) c.fail(rule, w);
      out.notes.push_back("all eventual decompositions have m = 1; if attained the index lies in [" +
                          std::to_string(an.optimal.degree) + ", " + std::to_string(k) + "]");
    }
  }
  return done(Verdict::Indeterminate, "");
}

}  // namespace cnls
