#include "featsel/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace featsel {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("pearson: length mismatch");
  if (x.size() < 2) throw ConfigError("pearson: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw UndefinedCorrelation(UndefinedCorrelation::Side::x);
  if (!(syy > 0.0)) throw UndefinedCorrelation(UndefinedCorrelation::Side::y);
  // The (N - 1) normalizations of covariance and both deviations cancel.
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<AssociationScore> pearson_scores(const Dataset& d) {
  std::vector<AssociationScore> out;
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    try {
      double rho = pearson(d.column(j), d.y());
      out.push_back({d.names()[j], rho, std::abs(rho)});
    } catch (const UndefinedCorrelation&) {
    }
  }
  return out;
}

FeatureRanking rank_pearson(const Dataset& d, const PearsonOptions& options) {
  FeatureRanking r{"pearson", {}};
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    RankedFeature e;
    e.name = d.names()[j];
    e.column = j;
    try {
      e.score = std::abs(pearson(d.column(j), d.y()));
      e.selected = e.score >= options.min_abs_rho;
    } catch (const UndefinedCorrelation& err) {
      if (err.side() == UndefinedCorrelation::Side::y) throw DataError("pearson ranking: target is constant");
      e.excluded_reason = "zero variance";
    }
    r.entries.push_back(std::move(e));
  }
  assign_ranks(r.entries);
  return r;
}

DiscretizedColumn discretize(std::span<const double> x, std::size_t bins) {
  if (bins < 2) throw ConfigError("discretize: need at least two bins");
  DiscretizedColumn out;
  const std::size_t n = x.size();
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (n == 0 || sorted.front() == sorted.back()) {
    out.degenerate = true;
    out.counts = {n};
    out.codes.assign(n, 0);
    return out;
  }
  for (std::size_t k = 1; k < bins; ++k) {
    const std::size_t rank = (k * n + bins - 1) / bins;  // ceil(k n / bins), 1-based
    const double edge = sorted[std::max<std::size_t>(rank, 1) - 1];
    // An edge at the maximum would leave the last bin empty.
    if (edge >= sorted.back()) break;
    if (out.bin_edges.empty() || edge > out.bin_edges.back()) out.bin_edges.push_back(edge);
  }
  out.counts.assign(out.bin_edges.size() + 1, 0);
  out.codes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::lower_bound(out.bin_edges.begin(), out.bin_edges.end(), x[i]);
    out.codes[i] = static_cast<std::size_t>(it - out.bin_edges.begin());
    ++out.counts[out.codes[i]];
  }
  return out;
}

DiscretizedColumn categorical(std::span<const double> labels) {
  DiscretizedColumn out;
  std::map<double, std::size_t> index;
  for (double v : labels) index.emplace(v, 0);
  std::size_t k = 0;
  for (auto& [value, code] : index) {
    code = k++;
    if (code > 0) out.bin_edges.push_back(value);
  }
  out.counts.assign(std::max<std::size_t>(index.size(), 1), 0);
  out.codes.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.codes[i] = index[labels[i]];
    ++out.counts[out.codes[i]];
  }
  out.degenerate = index.size() < 2;
  return out;
}

std::size_t ContingencyTable::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ContingencyTable joint_counts(const DiscretizedColumn& x, const DiscretizedColumn& y) {
  if (x.codes.size() != y.codes.size()) throw ConfigError("joint_counts: length mismatch");
  ContingencyTable t{x.bins(), y.bins(), std::vector<std::size_t>(x.bins() * y.bins(), 0)};
  for (std::size_t i = 0; i < x.codes.size(); ++i) ++t.counts[x.codes[i] * t.cols + y.codes[i]];
  return t;
}

namespace {

// H = log2(N) - (1/N) sum c log2 c over non-empty cells.
double entropy_bits(std::span<const std::size_t> counts, double n) {
  double acc = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double cd = static_cast<double>(c);
    acc += cd * std::log2(cd);
  }
  return std::max(0.0, std::log2(n) - acc / n);
}

}  // namespace

EntropyReport symmetrical_uncertainty(const ContingencyTable& table) {
  EntropyReport r;
  const std::size_t total = table.total();
  if (total == 0) return r;
  std::vector<std::size_t> row(table.rows, 0), col(table.cols, 0);
  for (std::size_t a = 0; a < table.rows; ++a)
    for (std::size_t b = 0; b < table.cols; ++b) {
      row[a] += table.at(a, b);
      col[b] += table.at(a, b);
    }
  const double n = static_cast<double>(total);
  r.h_x = entropy_bits(row, n);
  r.h_y = entropy_bits(col, n);
  const double h_xy = entropy_bits(table.counts, n);
  r.ig = std::clamp(r.h_x + r.h_y - h_xy, 0.0, std::min(r.h_x, r.h_y));
  // Independent tables leave a few ulps of cancellation error; without this
  // CFS would grow subsets on pure rounding noise.
  if (r.ig <= 64 * std::numeric_limits<double>::epsilon() * (r.h_x + r.h_y)) r.ig = 0.0;
  const double denom = r.h_x + r.h_y;
  r.su = denom > 0.0 ? std::clamp(2.0 * r.ig / denom, 0.0, 1.0) : 0.0;
  return r;
}

EntropyReport symmetrical_uncertainty(const DiscretizedColumn& x, const DiscretizedColumn& y) {
  if (x.degenerate || y.degenerate) {
    EntropyReport r = symmetrical_uncertainty(joint_counts(x, y));
    r.ig = 0.0;
    r.su = 0.0;
    return r;
  }
  return symmetrical_uncertainty(joint_counts(x, y));
}

MeritResult cfs_merit(std::span<const std::size_t> subset, std::span<const double> su_target,
                      const SuMatrix& su_pairs) {
  if (subset.empty()) throw ConfigError("cfs_merit: empty subset");
  MeritResult m;
  m.subset.assign(subset.begin(), subset.end());
  std::sort(m.subset.begin(), m.subset.end());
  m.k = m.subset.size();
  // Sums run in sorted order so the merit does not depend on how the
  // subset was listed.
  double cf = 0.0;
  for (std::size_t f : m.subset) cf += su_target[f];
  double ff = 0.0;
  for (std::size_t a = 0; a < m.k; ++a)
    for (std::size_t b = a + 1; b < m.k; ++b) ff += su_pairs(m.subset[a], m.subset[b]);
  const double k = static_cast<double>(m.k);
  m.r_cf_bar = cf / k;
  m.r_ff_bar = m.k > 1 ? ff / (k * (k - 1.0) / 2.0) : 0.0;
  m.merit = k * m.r_cf_bar / std::sqrt(k + k * (k - 1.0) * m.r_ff_bar);
  return m;
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::budget: return "budget";
    case StopReason::plateau: return "plateau";
    case StopReason::exhausted: return "exhausted";
  }
  return "?";
}

namespace {

struct OpenNode {
  double merit;
  std::vector<std::size_t> subset;
};

// Max-heap on merit; among equal merits the lexicographically smaller
// subset (earlier columns) is expanded first.
struct OpenOrder {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.merit != b.merit) return a.merit < b.merit;
    return a.subset > b.subset;
  }
};

}  // namespace

CfsSearchResult cfs_search(std::span<const double> su_target, const SuMatrix& su_pairs,
                           std::span<const std::size_t> candidates, const CfsOptions& options) {
  CfsSearchResult out;
  if (candidates.empty()) return out;
  std::vector<std::size_t> cand(candidates.begin(), candidates.end());
  std::sort(cand.begin(), cand.end());
  const std::size_t budget = std::max<std::size_t>(1, options.budget_factor * cand.size());

  std::priority_queue<OpenNode, std::vector<OpenNode>, OpenOrder> open;
  std::set<std::vector<std::size_t>> seen;
  open.push({0.0, {}});
  seen.insert({});
  bool have_best = false;
  std::size_t fails = 0;
  out.trace.stop_reason = StopReason::exhausted;

  while (!open.empty()) {
    if (out.trace.expansions >= budget) {
      out.trace.stop_reason = StopReason::budget;
      break;
    }
    OpenNode node = open.top();
    open.pop();
    ++out.trace.expansions;
    bool improved = false;
    for (std::size_t f : cand) {
      if (std::binary_search(node.subset.begin(), node.subset.end(), f)) continue;
      std::vector<std::size_t> child = node.subset;
      child.insert(std::upper_bound(child.begin(), child.end(), f), f);
      if (!seen.insert(child).second) continue;
      MeritResult m = cfs_merit(child, su_target, su_pairs);
      out.trace.visited.push_back({child, m.merit});
      if (!have_best || m.merit > out.best.merit) {
        out.best = m;
        have_best = true;
        improved = true;
      }
      open.push({m.merit, std::move(child)});
    }
    fails = improved ? 0 : fails + 1;
    if (fails >= options.plateau) {
      out.trace.stop_reason = StopReason::plateau;
      break;
    }
  }
  return out;
}

CfsResult cfs_select(const Dataset& d, const CfsOptions& options) {
  if (!d.target().has_both_labels()) throw DataError("CFS needs a binary target with both labels");
  const std::size_t p = d.n_features();
  CfsResult out;
  out.su_target.assign(p, 0.0);
  out.su_pairs = SuMatrix(p);

  std::vector<DiscretizedColumn> disc(p);
  parallel_for(p, options.workers, [&](std::size_t j) { disc[j] = discretize(d.column(j), options.bins); });
  const DiscretizedColumn label = categorical(d.y());

  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < p; ++j) {
    if (disc[j].degenerate) continue;
    out.su_target[j] = symmetrical_uncertainty(disc[j], label).su;
    candidates.push_back(j);
  }

  // Each pair is written to its own two cells.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < candidates.size(); ++a)
    for (std::size_t b = a + 1; b < candidates.size(); ++b) pairs.emplace_back(candidates[a], candidates[b]);
  parallel_for(pairs.size(), options.workers, [&](std::size_t k) {
    auto [a, b] = pairs[k];
    const double su = symmetrical_uncertainty(disc[a], disc[b]).su;
    out.su_pairs(a, b) = su;
    out.su_pairs(b, a) = su;
  });
  for (std::size_t j = 0; j < p; ++j) out.su_pairs(j, j) = disc[j].degenerate ? 0.0 : 1.0;

  out.search = cfs_search(out.su_target, out.su_pairs, candidates, options);

  out.ranking.method = "cfs";
  for (std::size_t j = 0; j < p; ++j) {
    RankedFeature e;
    e.name = d.names()[j];
    e.column = j;
    e.score = out.su_target[j];
    e.selected = std::binary_search(out.search.best.subset.begin(), out.search.best.subset.end(), j);
    if (disc[j].degenerate) e.excluded_reason = "single bin";
    out.ranking.entries.push_back(std::move(e));
  }
  // Members of the chosen subset come first, then the rest by SU.
  std::stable_sort(out.ranking.entries.begin(), out.ranking.entries.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.selected > b.selected; });
  auto mid = std::partition_point(out.ranking.entries.begin(), out.ranking.entries.end(),
                                  [](const RankedFeature& e) { return e.selected; });
  std::vector<RankedFeature> head(out.ranking.entries.begin(), mid), tail(mid, out.ranking.entries.end());
  assign_ranks(head);
  assign_ranks(tail);
  out.ranking.entries = std::move(head);
  for (auto& e : tail) {
    e.rank += out.ranking.entries.size();
    out.ranking.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace featsel
