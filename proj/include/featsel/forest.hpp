#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "featsel/dataset.hpp"
#include "featsel/ranking.hpp"

namespace featsel {

struct ForestSpec {
  std::size_t n_trees = 100;
  /// Candidate features per split; 0 means ceil(sqrt(p)).
  std::size_t max_features = 0;
  std::size_t min_samples_leaf = 1;
  /// 0 means unlimited.
  std::size_t max_depth = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct TreeNode {
  /// -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  /// In-bag samples (with multiplicity) reaching the node.
  std::uint32_t positives = 0;
  std::uint32_t total = 0;
  double probability = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Binary classification tree; rows go left when x[feature] <= threshold.
class DecisionTree {
 public:
  DecisionTree() = default;
  /// Node 0 is the root. Throws ConfigError on dangling child links.
  explicit DecisionTree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  bool uses(std::size_t feature) const {
    return feature < used_.size() && used_[feature];
  }
  std::size_t depth() const;

  /// `value(j)` returns feature j of the row being classified.
  template <typename Row>
  double predict(const Row& value) const {
    std::uint32_t k = 0;
    while (!nodes_[k].is_leaf()) {
      const TreeNode& n = nodes_[k];
      k = value(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes_[k].probability;
  }

 private:
  std::vector<TreeNode> nodes_;
  std::vector<bool> used_;
};

struct ForestModel {
  std::vector<std::string> feature_names;
  std::vector<DecisionTree> trees;
  /// Per tree: in-bag sample indices with multiplicity, sorted.
  std::vector<std::vector<std::uint32_t>> in_bag;
  /// Per tree: training rows not drawn into the bootstrap, sorted.
  std::vector<std::vector<std::uint32_t>> out_of_bag;
};

/// Grows n_trees trees, each on its own bootstrap and RNG stream derived
/// from (seed, tree index). Splits maximize Gini gain over midpoints of
/// consecutive distinct values; ties go to the feature drawn first at the
/// node, then the lower threshold.
ForestModel fit_forest(const Dataset& d, const ForestSpec& spec);

/// Mean of per-tree leaf probabilities for every row of `x`.
std::vector<double> predict_proba(const ForestModel& m, const FeatureMatrix& x, unsigned workers = 1);

/// Fraction of each tree's out-of-bag rows it classifies correctly
/// (probability > 0.5 predicts 1), averaged over trees with OOB rows.
double oob_accuracy(const ForestModel& m, const Dataset& d);

struct ImportanceReport {
  std::vector<std::string> features;
  std::vector<double> pai_mean;
  std::vector<double> pai_std;
  std::size_t repeats = 0;
  std::size_t trees_scored = 0;
};

/// Permutation accuracy importance on out-of-bag rows: per tree and
/// feature, OOB accuracy minus the mean accuracy over `repeats` shuffles of
/// the feature's OOB values. Trees with no OOB rows are skipped.
ImportanceReport permutation_importance(const ForestModel& m, const Dataset& d, std::size_t repeats = 5,
                                        std::uint64_t seed = 0, unsigned workers = 1);

/// CSV columns: feature,pai_mean,pai_std
void write_importance_csv(const ImportanceReport& r, const std::filesystem::path& path);

struct RfPaiOptions {
  ForestSpec forest;
  std::size_t repeats = 5;
  /// Selected when pai_mean > min_relative * max(pai_mean) and > 0.
  double min_relative = 0.05;
};

struct RfPaiResult {
  FeatureRanking ranking;
  ImportanceReport importance;
};

RfPaiResult rank_rf_pai(const Dataset& d, const RfPaiOptions& options);

}  // namespace featsel
