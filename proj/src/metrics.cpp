#include "featsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "featsel/common.hpp"

namespace featsel {

AucResult auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ConfigError("auc: scores and labels differ in length");
  AucResult r;
  for (double l : labels) {
    if (l == 1.0)
      ++r.positives;
    else if (l == 0.0)
      ++r.negatives;
    else
      throw DataError("auc: labels must be 0 or 1");
  }
  if (r.positives == 0 || r.negatives == 0) throw DataError("auc: need both labels");

  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive midranks (1-based), kept doubled to stay integral.
  std::size_t doubled_rank_sum = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    std::size_t pos_in_group = 0;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) pos_in_group += labels[order[hi++]] == 1.0;
    doubled_rank_sum += pos_in_group * (lo + 1 + hi);
    lo = hi;
  }
  const double np = static_cast<double>(r.positives), nn = static_cast<double>(r.negatives);
  const double u = static_cast<double>(doubled_rank_sum) / 2.0 - np * (np + 1.0) / 2.0;
  r.value = u / (np * nn);
  return r;
}

double auc_standard_error(const AucResult& a) {
  const double A = a.value;
  const double np = static_cast<double>(a.positives), nn = static_cast<double>(a.negatives);
  const double q1 = A / (2.0 - A), q2 = 2.0 * A * A / (1.0 + A);
  const double var = (A * (1.0 - A) + (np - 1.0) * (q1 - A * A) + (nn - 1.0) * (q2 - A * A)) / (np * nn);
  return std::sqrt(std::max(var, 0.0));
}

}  // namespace featsel
