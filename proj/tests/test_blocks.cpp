#include "doctest.h"

#include "cnls/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cnls;

namespace {

Eigen::MatrixXd signs(int k, std::initializer_list<double> upper) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(k, k);
  auto it = upper.begin();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) b(i, j) = b(j, i) = *it++;
  return b;
}

// beta12, beta13, beta14, beta23, beta24, beta34
Eigen::MatrixXd case_h() { return signs(4, {1, 1, -1, -1, 1, -1}); }

SystemSpec spec_from(const Eigen::MatrixXd& beta, std::vector<double> lambda) {
  SystemConfig c;
  c.k = static_cast<int>(beta.rows());
  c.lambda = lambda;
  c.mu.assign(c.k, 1.0);
  for (int i = 0; i < c.k; ++i) {
    c.beta.emplace_back();
    for (int j = 0; j < c.k; ++j) c.beta.back().push_back(beta(i, j));
  }
  return build_system(c);
}

std::vector<Profile> soliton_states(const SystemSpec& s) {
  std::vector<Profile> out;
  for (int j = 0; j < s.k; ++j)
    out.push_back(LineProfile::from_radial(solve_scalar(s.lambda(j), s.mu(j), 1, Grid::make(1, 40.0, 0.02)).profile));
  return out;
}

ForceEstimate fixed(double v) {
  ForceEstimate f;
  f.value = v;
  f.sign = v > 0 ? ForceSign::Attractive : ForceSign::Repulsive;
  return f;
}

ForceOracle table(Eigen::MatrixXd F) {
  return [F](int s, int t) { return fixed(F(s, t)); };
}

}  // namespace

TEST_CASE("optimal decompositions: attractive, repulsive and mixed") {
  const auto a = optimal_decompositions(signs(3, {1, 1, 1}));
  CHECK(a.degree == 1);
  REQUIRE(a.decompositions.size() == 1);
  CHECK(a.decompositions[0].blocks == Blocks{{0, 1, 2}});

  const auto r = optimal_decompositions(signs(3, {-1, -1, -1}));
  CHECK(r.degree == 3);
  CHECK(r.decompositions.size() == 1);

  const auto d = optimal_decompositions(signs(3, {1, 1, -1}));
  CHECK(d.degree == 2);
  REQUIRE(d.decompositions.size() == 2);
  CHECK(blocks_str(d.decompositions[0].blocks) == "{1,2}|{3}");
  CHECK(blocks_str(d.decompositions[1].blocks) == "{1,3}|{2}");
  CHECK(d.decompositions[0].cuts() == std::vector<int>{0, 2, 3});
  CHECK(d.decompositions[1].permutation() == std::vector<int>{0, 2, 1});
}

TEST_CASE("the four-component pattern with 1-2, 1-3, 2-4 attractive is covered by two blocks") {
  // {1,3} and {2,4} are both attractive pairs, so two blocks suffice.
  const auto h = optimal_decompositions(case_h());
  CHECK(h.degree == 2);
  REQUIRE(h.decompositions.size() == 1);
  CHECK(blocks_str(h.decompositions[0].blocks) == "{1,3}|{2,4}");
}

TEST_CASE("classification labels") {
  CHECK(classify_couplings(signs(3, {1, 1, 1})) == CouplingClass::PurelyAttractive);
  CHECK(classify_couplings(signs(3, {-1, -1, -1})) == CouplingClass::PurelyRepulsive);
  CHECK(classify_couplings(signs(3, {1, -1, -1})) == CouplingClass::RepulsiveMixed);
  CHECK(classify_couplings(signs(3, {1, 1, -1})) == CouplingClass::TotalMixed);
  CHECK(classify_couplings(signs(2, {-1})) == CouplingClass::PurelyRepulsive);
  CHECK(classify_couplings(case_h()) == CouplingClass::TotalMixed);
}

TEST_CASE("decompositions are canonical under simultaneous permutation") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 6;
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) b(i, j) = b(j, i) = (rng() % 2) ? 1.0 : -1.0;
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd pb(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) pb(i, j) = b(perm[i], perm[j]);
    const auto o = optimal_decompositions(b);
    const auto p = optimal_decompositions(pb);
    CHECK(o.degree == p.degree);
    CHECK(o.decompositions.size() == p.decompositions.size());
    // map p's blocks back to original labels
    std::vector<BlockDecomposition> mapped;
    for (const auto& d : p.decompositions) {
      Blocks bl = d.blocks;
      for (auto& blk : bl)
        for (auto& v : blk) v = perm[v];
      mapped.push_back(BlockDecomposition::canonical(bl));
    }
    std::sort(mapped.begin(), mapped.end(), [](const auto& x, const auto& y) { return x.blocks < y.blocks; });
    CHECK(mapped == o.decompositions);
    CHECK(classify_couplings(b) == classify_couplings(pb));
    for (const auto& d : o.decompositions)
      for (const auto& blk : d.blocks)
        for (int x : blk)
          for (int y : blk)
            if (x != y) CHECK(b(x, y) > 0);
    CHECK((o.degree == 1) == (classify_couplings(b) == CouplingClass::PurelyAttractive));
  }
}

TEST_CASE("greedy fallback above twelve components") {
  const int k = 14;
  Eigen::MatrixXd b = -Eigen::MatrixXd::Ones(k, k);
  for (int i = 0; i < k; i += 2) b(i, i + 1) = b(i + 1, i) = 1.0;
  const auto o = optimal_decompositions(b);
  CHECK_FALSE(o.exact);
  CHECK(o.degree == 7);
  CHECK_FALSE(o.warning.empty());
}

TEST_CASE("interaction forces") {
  const SystemSpec h = spec_from(case_h() * 0.05 + Eigen::MatrixXd::Identity(4, 4) * 0.95,
                                 {1.0, 1.0, 1.0, 1.0});
  const auto states = soliton_states(h);
  const auto R = default_force_grid(h);
  CHECK(R.size() == 64);
  CHECK(R.front() == doctest::Approx(4.0));
  CHECK(R.back() == doctest::Approx(20.0));
  const ForceEstimate f34 = interaction_force(h, {2}, {3}, states, R);
  CHECK(f34.sign == ForceSign::Repulsive);
  for (double c : f34.curve) CHECK(c < 0.0);

  const SystemSpec a = spec_from(signs(3, {0.05, 0.05, 0.05}) - Eigen::MatrixXd::Identity(3, 3) * 0.0,
                                 {1.0, 2.0, 2.5});
  const auto sa = soliton_states(a);
  const ForceEstimate fa = interaction_force(a, {0, 1}, {2}, sa, R);
  CHECK(fa.sign == ForceSign::Attractive);
  CHECK(fa.terms.size() == 2);
  // symmetric in the two sides
  const ForceEstimate fb = interaction_force(a, {2}, {0, 1}, sa, R);
  CHECK(fb.value == doctest::Approx(fa.value).epsilon(1e-12));

  // slower tail wins: beta13 = +0.05 decays like e^{-2R}, beta23 = -0.05 like e^{-4R}
  const SystemSpec m = spec_from(signs(3, {0.05, 0.05, -0.05}), {1.0, 4.0, 4.0});
  const ForceEstimate fm = interaction_force(m, {0, 1}, {2}, soliton_states(m), default_force_grid(m));
  CHECK(fm.sign == ForceSign::Attractive);
  CHECK(fm.value > 0.0);

  // linear in a single coupling
  SystemSpec m2 = m;
  m2.beta(0, 2) = m2.beta(2, 0) = 0.1;
  const auto st = soliton_states(m);
  const ForceEstimate g1 = interaction_force(m, {0}, {2}, st, R);
  const ForceEstimate g2 = interaction_force(m2, {0}, {2}, st, R);
  CHECK(g2.value == doctest::Approx(2.0 * g1.value).epsilon(1e-12));
}

TEST_CASE("decoupled blocks give an indeterminate force") {
  SystemConfig c;
  c.k = 2;
  c.lambda = {1, 1};
  c.mu = {1, 1};
  c.allow_zero_coupling = true;
  const SystemSpec s = build_system(c);
  const ForceEstimate f = interaction_force(s, {0}, {1}, soliton_states(s), default_force_grid(s));
  CHECK(f.sign == ForceSign::Indeterminate);
}

TEST_CASE("eventual decompositions from synthetic forces") {
  const SystemSpec h = spec_from(case_h(), {1, 1, 1, 1});
  const auto start = BlockDecomposition::canonical({{0, 1}, {2}, {3}});

  Eigen::MatrixXd F(3, 3);
  F << 0, 1.0, 0.8, 1.0, 0, -0.5, 0.8, -0.5, 0;
  const EventualAnalysis one = eventual_decomposition(h, start, table(F));
  CHECK(one.min_m == 1);
  CHECK(one.trees.size() == 2);
  for (const auto& t : one.trees) {
    CHECK(t.levels.size() == 3);
    CHECK(t.levels[1].groups.size() == 2);
    CHECK(t.m == 1);
  }
  // composite force at level one is the sum of level-zero forces
  const auto& t0 = one.trees[0];
  CHECK(std::abs(t0.levels[1].forces(0, 1)) > 0.0);

  F << 0, -1.0, -0.3, -1.0, 0, -0.5, -0.3, -0.5, 0;
  const EventualAnalysis three = eventual_decomposition(h, start, table(F));
  CHECK(three.min_m == 3);
  REQUIRE(three.trees.size() == 1);
  CHECK(three.trees[0].levels.size() == 1);

  F << 0, 1.0, -0.7, 1.0, 0, -0.5, -0.7, -0.5, 0;
  const EventualAnalysis two = eventual_decomposition(h, start, table(F));
  CHECK(two.min_m == 2);

  F << 0, 1.0, 0.1, 1.0, 0, 0.2, 0.1, 0.2, 0;
  const EventualAnalysis all = eventual_decomposition(h, start, table(F));
  CHECK(all.trees.size() == 1);  // the only maximal merge is everything at once
  CHECK(all.trees[0].levels.size() == 2);
  CHECK(all.min_m == 1);

  ForceOracle bad = [](int, int) { return ForceEstimate{}; };
  CHECK_THROWS_AS(eventual_decomposition(h, start, bad), ForceIndeterminate);
}

TEST_CASE("degrees are ordered: 1 <= m <= d <= k, repulsive blocks never fully merge") {
  // Equal lambda: every pair overlaps identically, so the level-zero force
  // between blocks carries the sign of the summed cross couplings.
  SystemConfig one;
  one.k = 1;
  one.lambda = {1};
  one.mu = {1};
  const SystemSpec s1 = build_system(one);
  const auto w = LineProfile::from_radial(solve_scalar(1, 1, 1, Grid::make(1, 40.0, 0.02)).profile);
  const auto curve = decay_sweep(w, w, default_force_grid(s1));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> mag(0.2, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + trial % 5;
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) b(i, j) = b(j, i) = ((rng() % 2) ? 1.0 : -1.0) * mag(rng);
    const auto opt = optimal_decompositions(b);
    const CouplingClass cls = classify_couplings(b, opt);
    for (const auto& d : opt.decompositions) {
      ForceOracle oracle = [&](int s, int t) {
        double sum = 0.0;
        for (int i : d.blocks[s])
          for (int j : d.blocks[t]) sum += b(i, j);
        ForceEstimate f;
        f.value = -1e300;
        for (const auto& p : curve) f.value = std::max(f.value, sum * p.overlap);
        f.sign = f.value > 0 ? ForceSign::Attractive : ForceSign::Repulsive;
        return f;
      };
      const EventualAnalysis e = eventual_decomposition(spec_from(b, std::vector<double>(k, 1.0)), d, oracle);
      CHECK(1 <= e.min_m);
      CHECK(e.max_m <= opt.degree);
      CHECK(opt.degree <= k);
      if (cls == CouplingClass::PurelyRepulsive) CHECK(e.min_m == k);
      if (cls == CouplingClass::RepulsiveMixed || cls == CouplingClass::PurelyRepulsive) CHECK(e.min_m > 1);
    }
  }
}
