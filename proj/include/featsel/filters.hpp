#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "featsel/common.hpp"
#include "featsel/dataset.hpp"
#include "featsel/ranking.hpp"

namespace featsel {

/// Raised when either argument of a correlation has zero variance.
class UndefinedCorrelation : public NumericalError {
 public:
  enum class Side { x, y };
  UndefinedCorrelation(Side side)
      : NumericalError(side == Side::x ? "correlation undefined: x has zero variance"
                                       : "correlation undefined: y has zero variance"),
        side_(side) {}
  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

/// Sample Pearson correlation, clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

struct AssociationScore {
  std::string feature;
  double rho = 0.0;
  double abs_rho = 0.0;
};

struct PearsonOptions {
  /// Features with |rho| at or above this are marked selected.
  double min_abs_rho = 0.05;
};

/// Ranks features by |rho| with the target. Zero-variance features are
/// ranked last with an exclusion reason.
FeatureRanking rank_pearson(const Dataset& d, const PearsonOptions& options = {});

/// Signed correlations in column order; excluded features are omitted.
std::vector<AssociationScore> pearson_scores(const Dataset& d);

struct DiscretizedColumn {
  std::vector<double> bin_edges;      // upper edges of all bins but the last
  std::vector<std::size_t> counts;    // samples per bin
  std::vector<std::size_t> codes;     // bin of each sample
  bool degenerate = false;            // fewer than two distinct values

  std::size_t bins() const noexcept { return counts.size(); }
};

/// Equal-frequency binning. Bin edges are the order statistics at ranks
/// ceil(k N / bins); equal edges merge, and a value goes to the first bin
/// whose edge is >= the value.
DiscretizedColumn discretize(std::span<const double> x, std::size_t bins = 10);

/// One bin per distinct value (for class labels).
DiscretizedColumn categorical(std::span<const double> labels);

/// Joint counts, row-major with x bins as rows.
struct ContingencyTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> counts;

  std::size_t at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
  std::size_t total() const;
};

ContingencyTable joint_counts(const DiscretizedColumn& x, const DiscretizedColumn& y);

struct EntropyReport {
  double h_x = 0.0;  // bits
  double h_y = 0.0;
  double ig = 0.0;
  double su = 0.0;
};

/// Entropies from the table marginals; ig = H(X) + H(Y) - H(X,Y) and
/// su = 2 ig / (H(X) + H(Y)), or 0 when both entropies vanish.
EntropyReport symmetrical_uncertainty(const ContingencyTable& table);
EntropyReport symmetrical_uncertainty(const DiscretizedColumn& x, const DiscretizedColumn& y);

/// Dense symmetric p x p table of feature-feature SU.
struct SuMatrix {
  std::size_t p = 0;
  std::vector<double> values;

  SuMatrix() = default;
  explicit SuMatrix(std::size_t n) : p(n), values(n * n, 0.0) {}
  double operator()(std::size_t i, std::size_t j) const { return values[i * p + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * p + j]; }
};

struct MeritResult {
  std::vector<std::size_t> subset;
  std::size_t k = 0;
  double r_cf_bar = 0.0;
  double r_ff_bar = 0.0;
  double merit = 0.0;
};

/// CFS merit k r_cf / sqrt(k + k (k - 1) r_ff). Throws ConfigError on an
/// empty subset.
MeritResult cfs_merit(std::span<const std::size_t> subset, std::span<const double> su_target,
                      const SuMatrix& su_pairs);

enum class StopReason { budget, plateau, exhausted };
const char* stop_reason_name(StopReason reason);

struct VisitedSubset {
  std::vector<std::size_t> subset;
  double merit = 0.0;
};

struct SearchTrace {
  std::vector<VisitedSubset> visited;  // in evaluation order
  std::size_t expansions = 0;
  StopReason stop_reason = StopReason::exhausted;
};

struct CfsOptions {
  std::size_t bins = 10;
  std::size_t plateau = 5;
  /// Node budget is budget_factor * p expansions.
  std::size_t budget_factor = 10;
  unsigned workers = 1;
};

struct CfsSearchResult {
  MeritResult best;
  SearchTrace trace;
};

/// Best-first search over feature subsets of the candidates. Starts from
/// the empty set, expands by single-feature additions, and stops after
/// `plateau` consecutive expansions that do not improve the best merit or
/// when the expansion budget runs out.
CfsSearchResult cfs_search(std::span<const double> su_target, const SuMatrix& su_pairs,
                           std::span<const std::size_t> candidates, const CfsOptions& options = {});

struct CfsResult {
  FeatureRanking ranking;  // score = SU with the target; selected = best subset
  CfsSearchResult search;
  std::vector<double> su_target;
  SuMatrix su_pairs;
};

/// Full CFS on a binary-target dataset.
CfsResult cfs_select(const Dataset& d, const CfsOptions& options = {});

}  // namespace featsel
