#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "featsel/common.hpp"
#include "featsel/dataset.hpp"
#include "featsel/ranking.hpp"

namespace featsel {

struct WeightVector {
  std::vector<std::string> names;
  std::vector<double> weights;
  double intercept = 0.0;
  /// OLS only: the design was rank deficient and the minimum-norm
  /// solution was returned.
  bool degenerate = false;
};

enum class PenaltyKind { none, ridge, lasso };

/// Penalty strength. With `relative` set, `lambda` is a fraction of the
/// smallest LASSO penalty that zeroes every weight on the fitted data.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::lasso;
  double lambda = 0.3;
  bool relative = false;
};

/// Least squares on centered data via a complete orthogonal decomposition.
WeightVector ols_fit(const Dataset& d);

/// Minimizes ||y - Xw||^2 + lambda2 ||w||^2 on centered data.
WeightVector ridge_fit(const Dataset& d, double lambda2);

/// Smallest lambda giving an all-zero LASSO solution: max_j |x_j' y| / N
/// over centered columns.
double lambda_max(const Dataset& d);

struct LassoOptions {
  double tolerance = 1e-6;       // sup-norm coefficient change per sweep
  std::size_t max_sweeps = 10000;
};

struct LassoFit {
  WeightVector w;
  double lambda = 0.0;
  std::size_t sweeps = 0;
  /// Objective after each sweep, starting with the all-zero start.
  std::vector<double> objective;
};

/// Thrown when coordinate descent hits its sweep cap.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, LassoFit last)
      : NumericalError(what), last_(std::move(last)) {}
  const LassoFit& last_iterate() const noexcept { return last_; }

 private:
  LassoFit last_;
};

/// Cyclic coordinate descent with soft-thresholding for
/// (1/2N) ||y - Xw||^2 + lambda ||w||_1 on centered data. Throws
/// NumericalError if the objective ever increases across a sweep.
LassoFit lasso_fit(const Dataset& d, double lambda, const LassoOptions& options = {});

/// Resolves a relative penalty against `d` and fits.
LassoFit lasso_fit(const Dataset& d, const PenaltySpec& penalty, const LassoOptions& options = {});

/// Value of the LASSO objective for `w` on `d`.
double lasso_objective(const Dataset& d, const WeightVector& w, double lambda);

enum class PathEvent { enter, drop, end };

struct RegularizationPath {
  std::vector<std::string> names;
  /// Penalty at each breakpoint, non-increasing.
  std::vector<double> lambdas;
  /// Features active on the segment that ends at each breakpoint; empty
  /// for the first breakpoint.
  std::vector<std::vector<std::size_t>> active_sets;
  std::vector<std::vector<double>> coefs;
  std::vector<double> intercepts;
  /// What happened at each breakpoint and to which feature.
  std::vector<PathEvent> events;
  std::vector<std::size_t> event_features;

  struct Withheld {
    std::size_t breakpoint;
    std::size_t feature;
  };
  /// Features kept out because they lie in the span of the active set.
  std::vector<Withheld> withheld;
  /// Constant columns, never eligible.
  std::vector<std::size_t> constant;

  std::size_t size() const noexcept { return lambdas.size(); }
  /// Coefficients at any lambda by linear interpolation between breakpoints.
  std::vector<double> coefficients_at(double lambda) const;
};

/// LASSO-modified least angle regression from lambda_max down to 0.
RegularizationPath lars_path(const Dataset& d);

/// CSV columns: breakpoint,lambda,feature,coefficient
void write_path_csv(const RegularizationPath& path, const std::filesystem::path& file);

/// Descending |weight|; exact zeros rank last and are not selected.
FeatureRanking rank_by_weights(const WeightVector& w, const std::string& method);

}  // namespace featsel
