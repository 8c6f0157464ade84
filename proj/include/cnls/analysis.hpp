// Block-level analysis (decompositions, forces, eventual groupings), the
// rule-based existence predictor and the N = 1 ground-state pipeline.
#pragma once

#include "cnls/blocks.hpp"
#include "cnls/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cnls {

struct AnalysisOptions {
  double extent = 0.0;   // box half-width; 0: max(20, 24 / sqrt(lambda_min))
  double spacing = 0.05;
  int force_points = 64;
  OverlapOptions overlap;
  MinimizeOptions minimize;
  int max_trees = 4096;
};

Grid analysis_grid(const SystemSpec& spec, const AnalysisOptions& opts);

struct BlockAnalysis {
  CouplingClass cls = CouplingClass::PurelyAttractive;
  OptimalDecompositions optimal;
  std::vector<EventualAnalysis> eventual;           // per optimal decomposition
  std::vector<std::vector<ForceEstimate>> forces;   // per decomposition, block pairs s < t
  std::vector<std::string> indeterminate;           // decompositions whose forces could not be signed
  int min_m = 0, max_m = 0;                         // over all decompositions with a signed tree
  bool eventual_complete = false;                   // every decomposition produced trees
  std::vector<double> R_grid;
};

// Block ground states are computed on the analysis grid (N = 1) or taken as
// scaled scalar solitons (N = 2, 3).
BlockAnalysis analyze_blocks(const SystemSpec& spec, const AnalysisOptions& opts = {});

// Profiles of the ground state of each block, one per component.
std::vector<Profile> block_states(const SystemSpec& spec, const BlockDecomposition& dec,
                                  const AnalysisOptions& opts);

// ---------------------------------------------------------------------------
// Predictor

enum class Verdict { Exists, NotExists, Indeterminate };
std::string to_string(Verdict v);

// beta_ij = delta^{t_ij} * beta_hat_ij (beta_hat signed, off-diagonal).
struct DeltaScaling {
  double delta = 0.0;
  Eigen::MatrixXd exponent;
  Eigen::MatrixXd beta_hat;
};

struct PredictThresholds {
  double beta_small = -1.0;  // < 0: 0.1 min sqrt(mu_i mu_j)
  double beta_large = -1.0;  // < 0: two-component attainment threshold per pair
  double near_equal = 0.05;  // "|x - y| << 1"
  double dominance = 0.1;    // "|negative| << positive" as a ratio
  double delta_small = 0.05; // "delta sufficiently small"
};

struct ExistencePrediction {
  Verdict verdict = Verdict::Indeterminate;
  std::optional<std::pair<int, int>> morse_index_range;
  std::string matched_rule;
  std::vector<std::string> unmet_hypotheses;
  double beta_small = 0.0;
  Eigen::MatrixXd beta_large;  // per pair
  std::vector<std::string> notes;
};

// Per-pair two-component thresholds on the radial (N = 2, 3) or Cartesian
// (N = 1) line operator.
Eigen::MatrixXd pair_thresholds(const SystemSpec& spec);

ExistencePrediction predict_existence(const SystemSpec& spec, const BlockAnalysis& analysis,
                                      const PredictThresholds& th = {},
                                      const std::optional<DeltaScaling>& scaling = std::nullopt);

// Names of the rules in evaluation order.
std::vector<std::string> predictor_rules();

// ---------------------------------------------------------------------------
// Ground-state pipeline (N = 1 full grid; N = 2, 3 translate ansatz)

// Attractive blocks co-located, consecutive blocks 6 decay lengths apart.
std::vector<double> suggest_centers(const SystemSpec& spec, const BlockDecomposition& dec);

// Two-sided splits made of unions of blocks, over every optimal decomposition.
std::vector<std::pair<std::vector<int>, std::vector<int>>> decomposition_splits(
    const OptimalDecompositions& opt);

struct GroundStateRun {
  GroundStateResult result;
  std::string start;  // decomposition that seeded the winning run
  std::vector<double> start_centers;
  std::vector<SeparationCurve> sweeps;
  AttainmentReport attainment;
  std::optional<MorseResult> morse;
  std::optional<AnsatzResult> ansatz;  // N = 2, 3
  std::vector<std::string> notes;
};

struct GroundStateOptions {
  AnalysisOptions analysis;
  std::optional<ConstraintPartition> partition;  // default: singletons
  std::vector<double> centers;                   // overrides the suggestion
  std::vector<double> R_grid;                    // default: 32 points over [0.5, 16] decay lengths
  bool sweeps = true;
  bool morse = true;
  MorseOptions morse_options;
};

GroundStateRun run_ground_state(const SystemSpec& spec, const GroundStateOptions& opts = {});

}  // namespace cnls
