#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "featsel/dataset.hpp"
#include "featsel/linear.hpp"
#include "featsel/ranking.hpp"

namespace featsel {

struct BootstrapSample {
  std::vector<std::size_t> indices;  // N draws with replacement
  std::uint64_t seed = 0;
};

/// The `index`-th bootstrap of N rows under `master_seed`.
BootstrapSample bootstrap_sample(std::size_t n, std::uint64_t master_seed, std::size_t index);

struct BolassoResult {
  /// score = fraction of bootstraps whose support holds the feature;
  /// selected = present in every support.
  FeatureRanking ranking;
  std::vector<std::vector<std::size_t>> supports;
  double lambda = 0.0;
  bool empty = false;
};

/// LASSO at one fixed penalty on each of B bootstraps; keeps the features in
/// the intersection of the supports. A relative penalty is resolved once on
/// the full data.
BolassoResult bolasso_select(const Dataset& d, const PenaltySpec& penalty, std::size_t bootstraps,
                             std::uint64_t seed, unsigned workers = 1);

/// Per-feature credit earned along one regularization path.
struct PathCredit {
  std::string name;
  std::function<std::vector<double>(const RegularizationPath&)> credit;
};

/// Each breakpoint pays 1/k to every feature of its active set of size k.
PathCredit inverse_active_size_credit();

struct FeaLectOptions {
  std::size_t bootstraps = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// A run fails when more than this fraction of bootstrap paths fail.
  double max_dropped_fraction = 0.2;
  PathCredit rule = inverse_active_size_credit();
};

struct FeaLectScore {
  std::vector<std::string> features;
  std::vector<double> score;      // mean credit over kept bootstraps
  std::vector<double> log_score;  // log(1 + score)
  std::size_t bootstraps = 0;
  std::size_t dropped = 0;
};

FeaLectScore fealect_score(const Dataset& d, const FeaLectOptions& options = {});

enum class FeatureClass { informative, redundant, irrelevant };
const char* class_name(FeatureClass c);

struct FeatureClassification {
  std::vector<FeatureClass> per_feature;  // in feature order
  std::vector<std::string> informative;
  std::vector<std::string> redundant;
  std::vector<std::string> irrelevant;
  /// Set when fewer than three distinct scores left no gap structure.
  bool fallback = false;
};

/// Log-score cut points; a feature is informative at or above the first,
/// redundant at or above the second, irrelevant otherwise.
struct ClassThresholds {
  double informative = 0.0;
  double redundant = 0.0;
};

/// Splits features at the two widest gaps of the descending log-score
/// sequence unless explicit thresholds are given. Zero scores are always
/// irrelevant.
FeatureClassification classify_features(const FeaLectScore& s,
                                        const std::optional<ClassThresholds>& thresholds = std::nullopt);

/// CSV columns: feature,score,log_score,class
void write_fealect_csv(const FeaLectScore& s, const FeatureClassification& c,
                       const std::filesystem::path& path);

/// Ranking by score. Informative features are selected, plus redundant
/// ones when `keep_redundant` is set.
FeatureRanking fealect_ranking(const FeaLectScore& s, const FeatureClassification& c, bool keep_redundant);

}  // namespace featsel
