// Sign structure of the coupling matrix: optimal block decompositions,
// coupling classes, interaction forces between blocks and eventual
// (force-driven) groupings.
#pragma once

#include "cnls/model.hpp"
#include "cnls/overlap.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnls {

enum class CouplingClass { PurelyAttractive, PurelyRepulsive, RepulsiveMixed, TotalMixed };
std::string to_string(CouplingClass c);

using Blocks = std::vector<std::vector<int>>;  // zero-based component indices
std::string blocks_str(const Blocks& b);      // 1-based, e.g. "{1,2}|{3}"

struct BlockDecomposition {
  Blocks blocks;  // canonical: sorted inside, ordered by least element

  int degree() const { return static_cast<int>(blocks.size()); }
  std::vector<int> permutation() const;  // blocks concatenated
  std::vector<int> cuts() const;         // 0 = a_0 < a_1 < ... < a_d = k
  static BlockDecomposition canonical(Blocks b);
  bool operator==(const BlockDecomposition& o) const { return blocks == o.blocks; }
};

struct OptimalDecompositions {
  int degree = 0;
  std::vector<BlockDecomposition> decompositions;
  bool exact = true;  // false when the greedy fallback was used (k > 12)
  std::string warning;
};

OptimalDecompositions optimal_decompositions(const Eigen::MatrixXd& beta);
CouplingClass classify_couplings(const Eigen::MatrixXd& beta);
CouplingClass classify_couplings(const Eigen::MatrixXd& beta, const OptimalDecompositions& opt);

enum class ForceSign { Attractive, Repulsive, Indeterminate };
std::string to_string(ForceSign s);

struct ForceTerm {
  int i = 0, j = 0;
  double beta = 0.0;
  double overlap = 0.0;  // at argmax_R
};

struct ForceEstimate {
  std::vector<int> left, right;
  double value = 0.0;
  double argmax_R = 0.0;
  ForceSign sign = ForceSign::Indeterminate;
  std::vector<ForceTerm> terms;
  std::vector<double> R;       // sampled separations (rounded)
  std::vector<double> curve;   // summed cross interaction at each R
};

// Geometric grid of n points over [4, 20] decay lengths of the slowest
// component.
std::vector<double> default_force_grid(const SystemSpec& spec, int n = 64);

// states[j] is a positive profile for component j (its block ground state).
ForceEstimate interaction_force(const SystemSpec& spec, const std::vector<int>& left,
                                const std::vector<int>& right, const std::vector<Profile>& states,
                                const std::vector<double>& R_grid,
                                const OverlapOptions& opts = {});

class ForceIndeterminate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Level-0 force between start blocks s and t.
using ForceOracle = std::function<ForceEstimate(int s, int t)>;

struct GroupingLevel {
  std::vector<std::vector<int>> groups;  // indices of start blocks
  Blocks components;                      // the same groups as component sets
  Eigen::MatrixXd forces;                 // composite forces between groups
};

struct EventualDecomposition {
  std::vector<GroupingLevel> levels;  // levels[0] is the start decomposition
  int m = 0;
};

struct EventualAnalysis {
  BlockDecomposition start;
  std::vector<EventualDecomposition> trees;
  int min_m = 0;
  int max_m = 0;
  Eigen::MatrixXd base_forces;  // level-0 force values between start blocks
};

EventualAnalysis eventual_decomposition(const SystemSpec& spec, const BlockDecomposition& start,
                                        const ForceOracle& oracle, int max_trees = 4096);

}  // namespace cnls
