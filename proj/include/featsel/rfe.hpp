#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "featsel/dataset.hpp"
#include "featsel/forest.hpp"
#include "featsel/ranking.hpp"

namespace featsel {

enum class RfeChoice {
  /// Highest validation AUC; equal AUCs favour the smaller subset.
  max_auc,
  /// Smallest subset whose AUC is within one standard error of the best
  /// and no worse than the full set's.
  within_one_se,
};

struct RfeOptions {
  ForestSpec forest;
  std::size_t repeats = 5;  // permutation repeats per importance pass
  std::size_t min_subset = 1;
  RfeChoice choice = RfeChoice::within_one_se;
};

struct RfeStep {
  std::vector<std::size_t> subset;  // dataset columns, ascending
  double validation_auc = 0.0;
  double auc_se = 0.0;
  /// Column dropped after this step; empty for the last step.
  std::optional<std::size_t> eliminated;
};

struct RfeRanking {
  std::vector<std::string> features;
  /// 1 for every member of the chosen subset; eliminated features get
  /// 2, 3, ... from the last eliminated backwards.
  std::vector<std::size_t> rank;
  /// Columns eliminated before the chosen step, in elimination order.
  std::vector<std::size_t> elimination_order;
  std::vector<RfeStep> steps;
  std::size_t best_step = 0;

  FeatureRanking as_ranking() const;
};

/// Backward elimination with a random forest: at each step fit on the
/// training rows of the current subset, score validation AUC, and drop the
/// feature with the lowest permutation importance (ties drop the higher
/// column). The answer is picked from the per-step validation AUCs as
/// `options.choice` says.
RfeRanking rfe(const Dataset& d, const SplitIndices& split, const RfeOptions& options);

/// CSV columns: feature,rank,eliminated_at_step,step_auc
void write_rfe_csv(const RfeRanking& r, const std::filesystem::path& path);

}  // namespace featsel
