#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "featsel/dataset.hpp"
#include "featsel/filters.hpp"
#include "featsel/forest.hpp"
#include "featsel/linear.hpp"
#include "featsel/ranking.hpp"

namespace featsel {

enum class Method { pearson, cfs, lasso, ridge, ols, rf_pai, rfe, fealect, bolasso };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);
/// Every method name, comma separated.
std::string method_list();
/// The six methods compared by default.
std::vector<Method> default_methods();

/// Tunables of every selection method.
struct MethodParams {
  PearsonOptions pearson;
  std::size_t cfs_bins = 10;
  /// LASSO and Bolasso penalty. The benchmark default is relative because
  /// an absolute 0.3 zeroes every weight for a 0/1 target on [0,1] features.
  PenaltySpec lasso{PenaltyKind::lasso, 0.1, true};
  double ridge_lambda = 1.0;
  /// OLS and ridge select features whose |w| reaches this fraction of max |w|.
  double weight_min_relative = 0.1;
  std::size_t pai_repeats = 5;
  double pai_min_relative = 0.05;
  std::size_t rfe_min_subset = 1;
  /// Held out of the training rows to score RFE steps.
  double rfe_inner_fraction = 0.25;
  std::size_t fealect_bootstraps = 100;
  /// Select the redundant class too. The informative class alone is often
  /// one or two features, which costs far more AUC than it saves.
  bool fealect_keep_redundant = true;
  std::size_t bolasso_bootstraps = 32;
};

struct BenchmarkConfig {
  std::vector<Method> methods = default_methods();
  ForestSpec forest;
  MethodParams params;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Runs one selection method on training data only.
FeatureRanking select_features(Method method, const Dataset& train, const BenchmarkConfig& config);

struct MethodRow {
  std::string method;
  FeatureRanking ranking;
  std::vector<std::string> selected;
  std::optional<double> train_auc;
  std::optional<double> validation_auc;
  /// No features were selected; no model was fitted.
  bool degenerate = false;
  /// Set when the method threw, with the exit code of its error class.
  std::string error;
  int exit_code = 0;
};

struct BenchmarkReport {
  std::vector<std::string> features;
  MethodRow baseline;
  std::vector<MethodRow> rows;
  /// Ordered run metadata: seeds, forest spec, dataset fingerprint.
  std::vector<std::pair<std::string, std::string>> metadata;

  const MethodRow* find(const std::string& method) const;
  bool any_failed() const;
};

/// Baseline forest on all features, then for each method: select on the
/// training rows, refit a forest on the chosen columns, score train and
/// validation AUC. A failing or empty method is recorded and the run
/// continues.
BenchmarkReport run_benchmark(const Dataset& d, const SplitIndices& split, const BenchmarkConfig& config);

enum class ReportFormat { csv, markdown };

/// CSV columns: method,feature,score,rank,selected,train_auc,validation_auc.
/// Per-feature rows leave the AUC cells empty; one summary row per method
/// (baseline first) leaves the feature cells empty. Missing AUCs are NA.
std::string emit_report(const BenchmarkReport& r, ReportFormat format);

/// Inverse of the CSV form (metadata is not part of it).
BenchmarkReport parse_report_csv(const std::string& text);

}  // namespace featsel
