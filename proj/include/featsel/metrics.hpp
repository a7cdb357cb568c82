#pragma once

#include <cstddef>
#include <span>

namespace featsel {

struct AucResult {
  double value = 0.5;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Area under the ROC curve in Mann-Whitney form: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counting one half. Midranks make it O(N log N). Throws DataError unless
/// both labels are present.
AucResult auc(std::span<const double> scores, std::span<const double> labels);

/// Hanley-McNeil standard error of an AUC estimate.
double auc_standard_error(const AucResult& a);

}  // namespace featsel
