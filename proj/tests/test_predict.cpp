#include "doctest.h"

#include "cnls/analysis.hpp"

#include <cmath>
#include <random>

using namespace cnls;

namespace {

SystemSpec make(std::vector<double> lambda, std::vector<Coupling> c) {
  SystemConfig cfg;
  cfg.dim = 1;
  cfg.k = static_cast<int>(lambda.size());
  cfg.mu = std::vector<double>(lambda.size(), 1.0);
  cfg.lambda = std::move(lambda);
  cfg.couplings = std::move(c);
  return build_system(cfg);
}

DeltaScaling scaling3(double delta, double t12, double t13, double t23, double s12, double s13, double s23) {
  DeltaScaling sc;
  sc.delta = delta;
  sc.exponent = Eigen::MatrixXd::Zero(3, 3);
  sc.beta_hat = Eigen::MatrixXd::Zero(3, 3);
  sc.exponent(0, 1) = sc.exponent(1, 0) = t12;
  sc.exponent(0, 2) = sc.exponent(2, 0) = t13;
  sc.exponent(1, 2) = sc.exponent(2, 1) = t23;
  sc.beta_hat(0, 1) = sc.beta_hat(1, 0) = s12;
  sc.beta_hat(0, 2) = sc.beta_hat(2, 0) = s13;
  sc.beta_hat(1, 2) = sc.beta_hat(2, 1) = s23;
  return sc;
}

SystemSpec from_scaling(std::vector<double> lambda, const DeltaScaling& sc) {
  std::vector<Coupling> c;
  const int k = static_cast<int>(lambda.size());
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      c.push_back({i, j, std::pow(sc.delta, sc.exponent(i, j)) * sc.beta_hat(i, j)});
  return make(std::move(lambda), c);
}

}  // namespace

TEST_CASE("light hub with weak links: exists with index 3") {
  const SystemSpec s = make({1, 2, 2.5}, {{0, 1, 0.05}, {0, 2, 0.05}, {1, 2, -0.05}});
  const BlockAnalysis an = analyze_blocks(s);
  CHECK(an.cls == CouplingClass::TotalMixed);
  CHECK(an.optimal.degree == 2);
  CHECK(an.eventual_complete);
  CHECK(an.max_m == 1);
  const ExistencePrediction p = predict_existence(s, an);
  CHECK(p.verdict == Verdict::Exists);
  CHECK(p.matched_rule == "three-component-light-hub");
  REQUIRE(p.morse_index_range);
  CHECK(p.morse_index_range->first == 3);
  CHECK(p.beta_small == doctest::Approx(0.1));
}

TEST_CASE("heavy hub with dominant repulsion under delta scaling: no ground state") {
  const DeltaScaling sc = scaling3(1e-2, 1.0, 2.0, 0.5, 1, 1, -1);
  const SystemSpec s = from_scaling({2, 1, 1}, sc);
  const BlockAnalysis an = analyze_blocks(s);
  const ExistencePrediction p = predict_existence(s, an, {}, sc);
  CHECK(p.verdict == Verdict::NotExists);
  CHECK(p.matched_rule == "three-component-heavy-hub-dominant-repulsion");

  // delta too large for the threshold
  PredictThresholds th;
  th.delta_small = 1e-3;
  CHECK(predict_existence(s, an, th, sc).verdict != Verdict::NotExists);

  // repulsive exponent not the smallest
  const DeltaScaling bad = scaling3(1e-2, 1.0, 2.0, 1.5, 1, 1, -1);
  const SystemSpec sb = from_scaling({2, 1, 1}, bad);
  const ExistencePrediction pb = predict_existence(sb, analyze_blocks(sb), {}, bad);
  CHECK(pb.matched_rule != "three-component-heavy-hub-dominant-repulsion");
  CHECK(pb.verdict != Verdict::Exists);
}

TEST_CASE("scaling that does not reproduce the couplings is reported") {
  const DeltaScaling sc = scaling3(1e-2, 1.0, 2.0, 0.5, 1, 1, -1);
  const SystemSpec s = make({2, 1, 1}, {{0, 1, 0.02}, {0, 2, 1e-4}, {1, 2, -0.1}});
  const ExistencePrediction p = predict_existence(s, analyze_blocks(s), {}, sc);
  CHECK(p.verdict != Verdict::NotExists);
  CHECK_FALSE(p.notes.empty());
}

TEST_CASE("repulsive-mixed with a positive definite coupling matrix: no ground state") {
  const SystemSpec s = make({1, 1, 1}, {{0, 1, 0.5}, {0, 2, -0.2}, {1, 2, -0.2}});
  const BlockAnalysis an = analyze_blocks(s);
  CHECK(an.cls == CouplingClass::RepulsiveMixed);
  CHECK(an.min_m > 1);
  const ExistencePrediction p = predict_existence(s, an);
  CHECK(p.verdict == Verdict::NotExists);
  CHECK(p.matched_rule == "positive-definite-repulsion");
}

TEST_CASE("strongly repulsive, not positive definite: indeterminate with reasons") {
  const SystemSpec s = make({1, 1, 1}, {{0, 1, -2}, {0, 2, -2}, {1, 2, -2}});
  const BlockAnalysis an = analyze_blocks(s);
  CHECK(an.cls == CouplingClass::PurelyRepulsive);
  CHECK(an.min_m == 3);
  const ExistencePrediction p = predict_existence(s, an);
  CHECK(p.verdict == Verdict::Indeterminate);
  CHECK(p.unmet_hypotheses.size() >= 2);
}

TEST_CASE("purely attractive groupings fix the index") {
  const SystemSpec weak = make({1, 1, 1}, {{0, 1, 0.05}, {0, 2, 0.05}, {1, 2, 0.05}});
  const ExistencePrediction p3 = predict_existence(weak, analyze_blocks(weak));
  CHECK(p3.verdict == Verdict::Exists);
  CHECK(p3.morse_index_range->first == 3);

  const SystemSpec one = make({1, 1, 2}, {{0, 1, 3}, {0, 2, 0.05}, {1, 2, 0.05}});
  const ExistencePrediction p2 = predict_existence(one, analyze_blocks(one));
  CHECK(p2.verdict == Verdict::Exists);
  CHECK(p2.morse_index_range->first == 2);

  const SystemSpec all = make({1, 1, 1}, {{0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  const ExistencePrediction p1 = predict_existence(all, analyze_blocks(all));
  CHECK(p1.verdict == Verdict::Exists);
  CHECK(p1.morse_index_range->first == 1);

  // all strong but lambdas far apart
  const SystemSpec spread = make({1, 2, 3}, {{0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  CHECK(predict_existence(spread, analyze_blocks(spread)).verdict == Verdict::Indeterminate);

  // a coupling between the thresholds
  const SystemSpec mid = make({1, 1, 1}, {{0, 1, 0.5}, {0, 2, 0.05}, {1, 2, 0.05}});
  CHECK(predict_existence(mid, analyze_blocks(mid)).verdict == Verdict::Indeterminate);
}

TEST_CASE("four-component pattern with dominant attraction") {
  const SystemSpec s =
      make({1, 1, 2, 2}, {{0, 1, 0.05}, {0, 2, 0.05}, {0, 3, -0.001}, {1, 2, -0.001}, {1, 3, 0.05}, {2, 3, -0.001}});
  const BlockAnalysis an = analyze_blocks(s);
  CHECK(an.cls == CouplingClass::TotalMixed);
  const ExistencePrediction p = predict_existence(s, an);
  CHECK(p.verdict == Verdict::Exists);
  CHECK(p.matched_rule == "four-component-H-dominant-attraction");
  CHECK(p.morse_index_range->first == 4);

  // relabelled copy gives the same verdict
  const SystemSpec q = s.permuted({2, 0, 3, 1});
  const ExistencePrediction pq = predict_existence(q, analyze_blocks(q));
  CHECK(pq.verdict == Verdict::Exists);
  CHECK(pq.morse_index_range->first == 4);
}

TEST_CASE("never Exists when an eventual decomposition keeps more than one block") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 3 + trial % 2;
    std::vector<Coupling> c;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        double v = 0.2 * U(rng);
        if (v == 0.0) v = 0.01;
        c.push_back({i, j, v});
      }
    std::vector<double> lambda;
    for (int i = 0; i < k; ++i) lambda.push_back(1.0 + 0.5 * (U(rng) + 1.0));
    const SystemSpec s = make(lambda, c);
    BlockAnalysis an;
    an.optimal = optimal_decompositions(s.beta);
    an.cls = classify_couplings(s.beta, an.optimal);
    an.eventual_complete = true;
    an.min_m = 1;
    an.max_m = 2;
    PredictThresholds th;
    th.beta_large = 1.0;
    CHECK(predict_existence(s, an, th).verdict != Verdict::Exists);
    an.eventual_complete = false;
    an.max_m = 1;
    CHECK(predict_existence(s, an, th).verdict != Verdict::Exists);
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("pair thresholds match the two-component quotient and are symmetric") {
  const SystemSpec s = make({1, 2, 1}, {{0, 1, 0.1}, {0, 2, 0.1}, {1, 2, 0.1}});
  const Eigen::MatrixXd t = pair_thresholds(s);
  CHECK((t - t.transpose()).norm() == 0.0);
  CHECK(t(0, 2) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(t(0, 1) > 1.0);
}

TEST_CASE("suggested centres and splits") {
  const SystemSpec s = make({1, 2, 2.5}, {{0, 1, 0.05}, {0, 2, 0.05}, {1, 2, -0.05}});
  const OptimalDecompositions opt = optimal_decompositions(s.beta);
  for (const auto& dec : opt.decompositions) {
    const std::vector<double> c = suggest_centers(s, dec);
    for (const auto& blk : dec.blocks)
      for (int j : blk) CHECK(c[j] == c[blk.front()]);
    CHECK(max_separation(c) == doctest::Approx(6.0));
  }
  const auto splits = decomposition_splits(opt);
  CHECK(splits.size() == 2);
  for (const auto& [l, r] : splits) CHECK(l.size() + r.size() == 3);
}

TEST_CASE("ground-state pipeline on an attractive pair") {
  const SystemSpec s = make({1, 1}, {{0, 1, 0.5}});
  GroundStateOptions o;
  o.analysis.extent = 16.0;
  o.analysis.spacing = 0.05;
  const GroundStateRun r = run_ground_state(s, o);
  CHECK(r.result.diagnosis == Diagnosis::Attained);
  CHECK(r.attainment.diagnosis == Diagnosis::Attained);
  // co-located synchronized state: t^2 = 1 / (1 + beta) for each soliton
  CHECK(r.result.energy == doctest::Approx(2.0 * (4.0 / 3.0) / 1.5).epsilon(1e-3));
  REQUIRE(r.morse);
  CHECK(r.morse->zero_modes == 1);
  CHECK(r.sweeps.empty());  // one block, nothing to split
}

TEST_CASE("analysis survives blocks whose side states lose a component") {
  // strong attraction between unequal frequencies inside a block
  const SystemSpec s = make({1.08456, 1.11542, 1.97851, 1.64221, 1.97866, 1.43254},
                            {{0, 1, 0.472925}, {0, 2, 0.444484}, {0, 3, -0.154508}, {0, 4, 0.330192},
                             {0, 5, -0.127013}, {1, 2, -0.420826}, {1, 3, 0.23272}, {1, 4, -0.439786},
                             {1, 5, -0.369525}, {2, 3, 0.480496}, {2, 4, 0.0502978}, {2, 5, 0.154305},
                             {3, 4, 0.261122}, {3, 5, 0.4508}, {4, 5, -0.469033}});
  AnalysisOptions ao;
  ao.force_points = 16;
  BlockAnalysis an;
  CHECK_NOTHROW(an = analyze_blocks(s, ao));
  CHECK(an.optimal.degree == 3);
}
