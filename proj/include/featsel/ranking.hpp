#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace featsel {

struct RankedFeature {
  std::string name;
  std::size_t column = 0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  bool selected = false;
  std::string excluded_reason;  // empty unless the feature could not be scored
};

/// Per-feature scores for one method, stored in rank order.
struct FeatureRanking {
  std::string method;
  std::vector<RankedFeature> entries;

  std::vector<std::string> selected_names() const;
  /// Selected column indices in ascending column order.
  std::vector<std::size_t> selected_columns() const;
  const RankedFeature* find(const std::string& name) const;
};

/// Sorts `entries` by descending score, ties by column, excluded features
/// last; then assigns ranks 1..p.
void assign_ranks(std::vector<RankedFeature>& entries);

/// CSV columns: feature,score,rank,excluded_reason,selected
std::string ranking_csv(const FeatureRanking& r);
void write_ranking_csv(const FeatureRanking& r, const std::filesystem::path& path);

}  // namespace featsel
