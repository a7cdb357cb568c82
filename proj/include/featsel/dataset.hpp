#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace featsel {

/// N x p real matrix stored column-major, with one unique name per column.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// `columns[j]` holds feature j. Throws DataError when the invariants
  /// (N >= 2, p >= 1, equal column lengths, unique names, finite values)
  /// do not hold.
  FeatureMatrix(std::vector<std::vector<double>> columns, std::vector<std::string> names);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * rows_, rows_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[j * rows_ + i]; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t j) const { return names_[j]; }
  /// Column index for `name`, or cols() when absent.
  std::size_t find(const std::string& name) const;

 private:
  std::size_t rows_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

enum class TargetKind { continuous, binary };

struct TargetVector {
  TargetKind kind = TargetKind::continuous;
  std::vector<double> values;

  std::size_t positives() const;
  bool has_both_labels() const;
};

/// Builds a binary target, rejecting values outside {0, 1}.
TargetVector binary_target(std::vector<double> values);
TargetVector continuous_target(std::vector<double> values);

/// Feature matrix plus target. Immutable once built; every transformation
/// returns a new Dataset.
class Dataset {
 public:
  Dataset(FeatureMatrix features, TargetVector target, bool scaled = false);

  const FeatureMatrix& features() const noexcept { return features_; }
  const TargetVector& target() const noexcept { return target_; }
  bool scaled() const noexcept { return scaled_; }
  std::size_t n_samples() const noexcept { return features_.rows(); }
  std::size_t n_features() const noexcept { return features_.cols(); }
  std::span<const double> column(std::size_t j) const { return features_.column(j); }
  std::span<const double> y() const { return target_.values; }
  const std::vector<std::string>& names() const noexcept { return features_.names(); }

  /// Rows in the given order (duplicates allowed, as for bootstraps).
  Dataset select_rows(std::span<const std::size_t> rows) const;
  /// Columns in the given order; names follow their columns.
  Dataset select_columns(std::span<const std::size_t> cols) const;
  Dataset with_target(TargetVector target) const;

  /// Order-sensitive hash of names, values, and target, printed as 16 hex digits.
  std::string fingerprint() const;

 private:
  FeatureMatrix features_;
  TargetVector target_;
  bool scaled_;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column);

/// Writes features followed by the target column, in the shortest
/// round-trip decimal form.
void write_csv(const Dataset& d, const std::filesystem::path& path,
               const std::string& target_column);

/// Maps every column to [0, 1] by (x - min) / (max - min); constant columns
/// become zeros. Throws ConfigError on a dataset that is already scaled.
Dataset minmax_scale(const Dataset& d);

/// Percentile by linear interpolation between order statistics.
double percentile(std::span<const double> values, double pct);

struct HotspotLabels {
  TargetVector labels;
  double threshold = 0.0;
  /// Set when no value exceeds the threshold (e.g. all values equal).
  bool no_positives = false;
};

/// Label 1 iff the value is strictly above the `pct` percentile.
HotspotLabels label_hotspots(const TargetVector& stress, double pct = 90.0);

/// Random train/validation split, stratified by label for binary targets.
/// |validation| = round(fraction * N). Both sides keep both labels
/// whenever a class has at least two members.
SplitIndices split(const Dataset& d, double validation_fraction, std::uint64_t seed);

enum class FeatureRole { relevant, redundant, noise };
const char* role_name(FeatureRole role);

struct SynthSpec {
  std::size_t n_samples = 5000;
  std::size_t n_relevant = 5;
  std::size_t n_redundant = 10;
  std::size_t n_noise = 19;
  double noise_sd = 0.1;
  std::uint64_t seed = 7;
};

struct ColumnRole {
  std::string column;
  FeatureRole role;
  std::string parent;  // empty unless redundant
};

struct SyntheticData {
  Dataset data;
  std::vector<ColumnRole> roles;
  /// Coefficient of each relevant column in the target, in column order.
  std::vector<double> coefficients;
};

/// Generator coefficient of the k-th relevant column.
double synth_coefficient(std::size_t k);

/// Synthetic regression data with known column roles. Relevant columns are
/// U(0,1); the target is sum_k c_k x_k plus Gaussian noise whose standard
/// deviation is noise_sd times the signal's; redundant columns are
/// a * (x_parent + e) + b with e ~ N(0, noise_sd^2); noise columns are U(0,1).
/// With exactly 34 columns the names follow the hotspot feature table.
SyntheticData synthesize(const SynthSpec& spec);

void write_roles_csv(const std::vector<ColumnRole>& roles, const std::filesystem::path& path);

}  // namespace featsel
