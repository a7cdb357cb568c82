#include "featsel/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "featsel/common.hpp"

namespace featsel {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ConfigError("a tree needs at least one node");
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    if (n.left >= nodes_.size() || n.right >= nodes_.size())
      throw ConfigError("tree node links to a missing child");
    const auto f = static_cast<std::size_t>(n.feature);
    if (f >= used_.size()) used_.resize(f + 1, false);
    used_[f] = true;
  }
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [k, dep] = stack.back();
    stack.pop_back();
    best = std::max(best, dep);
    if (!nodes_[k].is_leaf()) {
      stack.push_back({nodes_[k].left, dep + 1});
      stack.push_back({nodes_[k].right, dep + 1});
    }
  }
  return best;
}

namespace {

// Each feature as dense ranks into its sorted distinct values.
struct Prepared {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<std::vector<std::uint32_t>> codes;
  std::vector<std::vector<double>> distinct;
  std::vector<std::uint8_t> labels;
};

Prepared prepare(const Dataset& d, unsigned workers) {
  Prepared prep;
  prep.n = d.n_samples();
  prep.p = d.n_features();
  prep.codes.resize(prep.p);
  prep.distinct.resize(prep.p);
  parallel_for(prep.p, workers, [&](std::size_t j) {
    auto col = d.column(j);
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    auto& codes = prep.codes[j];
    codes.resize(prep.n);
    for (std::size_t i = 0; i < prep.n; ++i)
      codes[i] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), col[i]) - sorted.begin());
    prep.distinct[j] = std::move(sorted);
  });
  prep.labels.resize(prep.n);
  for (std::size_t i = 0; i < prep.n; ++i) prep.labels[i] = d.y()[i] == 1.0 ? 1 : 0;
  return prep;
}

struct Split {
  double gain = 0.0;
  std::size_t feature = 0;
  std::uint32_t code = 0;  // rows with code <= this go left
  double threshold = 0.0;
  bool found = false;
};

// Twice the Gini impurity mass of a node: n * gini = 2 pos neg / n.
inline double impurity_mass(double pos, double n) { return n > 0.0 ? 2.0 * pos * (n - pos) / n : 0.0; }

class TreeBuilder {
 public:
  TreeBuilder(const Prepared& prep, const ForestSpec& spec, std::size_t mtry, std::uint64_t seed)
      : prep_(prep), spec_(spec), mtry_(mtry), rng_(seed), features_(prep.p) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  // Draws the bootstrap and grows the tree.
  DecisionTree grow(std::vector<std::uint32_t>& in_bag, std::vector<std::uint32_t>& oob) {
    const std::size_t n = prep_.n;
    samples_.resize(n);
    std::vector<std::uint8_t> drawn(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      samples_[k] = static_cast<std::uint32_t>(rng_.index(n));
      drawn[samples_[k]] = 1;
    }
    in_bag = samples_;
    std::sort(in_bag.begin(), in_bag.end());
    oob.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (!drawn[i]) oob.push_back(static_cast<std::uint32_t>(i));

    struct Pending {
      std::uint32_t node;
      std::size_t begin, end, depth;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<Pending> stack{{0, 0, n, 0}};
    while (!stack.empty()) {
      Pending job = stack.back();
      stack.pop_back();
      std::uint32_t pos = 0;
      for (std::size_t k = job.begin; k < job.end; ++k) pos += prep_.labels[samples_[k]];
      TreeNode& node = nodes[job.node];
      node.positives = pos;
      node.total = static_cast<std::uint32_t>(job.end - job.begin);
      node.probability = static_cast<double>(pos) / static_cast<double>(node.total);

      const std::size_t count = job.end - job.begin;
      const bool pure = pos == 0 || pos == count;
      const bool too_small = count < 2 * spec_.min_samples_leaf;
      const bool too_deep = spec_.max_depth != 0 && job.depth >= spec_.max_depth;
      if (pure || too_small || too_deep) continue;

      Split split = best_split(job.begin, job.end, pos);
      if (!split.found) continue;

      auto first = samples_.begin() + static_cast<std::ptrdiff_t>(job.begin);
      auto last = samples_.begin() + static_cast<std::ptrdiff_t>(job.end);
      const auto& codes = prep_.codes[split.feature];
      auto mid = std::stable_partition(first, last, [&](std::uint32_t i) { return codes[i] <= split.code; });
      const std::size_t cut = static_cast<std::size_t>(mid - samples_.begin());

      const auto left = static_cast<std::uint32_t>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      TreeNode& parent = nodes[job.node];
      parent.feature = static_cast<std::int32_t>(split.feature);
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({left + 1, cut, job.end, job.depth + 1});
      stack.push_back({left, job.begin, cut, job.depth + 1});
    }
    return DecisionTree(std::move(nodes));
  }

 private:
  Split best_split(std::size_t begin, std::size_t end, std::uint32_t pos) {
    const std::size_t count = end - begin;
    const double n = static_cast<double>(count);
    const double parent = impurity_mass(pos, n);
    const std::size_t leaf = spec_.min_samples_leaf;
    Split best;

    // Features are drawn without replacement; past mtry the draw continues
    // only until some split with positive gain exists.
    for (std::size_t drawn = 0; drawn < prep_.p; ++drawn) {
      if (drawn >= mtry_ && best.found) break;
      std::swap(features_[drawn], features_[drawn + rng_.index(prep_.p - drawn)]);
      const std::size_t f = features_[drawn];
      const auto& codes = prep_.codes[f];

      const auto& values = prep_.distinct[f];
      auto consider = [&](std::size_t left_n, std::uint32_t left_pos, std::uint32_t code, std::uint32_t next) {
        const std::size_t right_n = count - left_n;
        if (left_n < leaf || right_n < leaf) return;
        const double children = impurity_mass(left_pos, static_cast<double>(left_n)) +
                                impurity_mass(pos - left_pos, static_cast<double>(right_n));
        const double gain = (parent - children) / (2.0 * n);
        if (!(gain > 1e-12)) return;
        const double lo = values[code], hi = values[next];
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;
        // Equal gains across features go to the earlier draw, so an exact
        // copy wins as often as its original; a fixed column order would
        // hand every tie to the original.
        const bool better = !best.found || gain > best.gain ||
                            (gain == best.gain && f == best.feature && threshold < best.threshold);
        if (better) best = {gain, f, code, threshold, true};
      };

      // Large nodes count per code; small ones sort. Both visit the same
      // candidate cuts in ascending code order.
      if (count * 4 >= values.size()) {
        hist_total_.assign(values.size(), 0);
        hist_pos_.assign(values.size(), 0);
        for (std::size_t k = begin; k < end; ++k) {
          const std::uint32_t i = samples_[k];
          ++hist_total_[codes[i]];
          hist_pos_[codes[i]] += prep_.labels[i];
        }
        std::size_t left_n = 0;
        std::uint32_t left_pos = 0;
        std::uint32_t prev = 0;
        bool have_prev = false;
        for (std::uint32_t c = 0; c < values.size(); ++c) {
          if (hist_total_[c] == 0) continue;
          if (have_prev) consider(left_n, left_pos, prev, c);
          left_n += hist_total_[c];
          left_pos += hist_pos_[c];
          prev = c;
          have_prev = true;
        }
        continue;
      }

      keys_.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        const std::uint32_t i = samples_[begin + k];
        keys_[k] = (static_cast<std::uint64_t>(codes[i]) << 1) | prep_.labels[i];
      }
      std::sort(keys_.begin(), keys_.end());
      if ((keys_.front() >> 1) == (keys_.back() >> 1)) continue;

      std::uint32_t left_pos = 0;
      for (std::size_t k = 0; k + 1 < count; ++k) {
        left_pos += static_cast<std::uint32_t>(keys_[k] & 1u);
        const auto code = static_cast<std::uint32_t>(keys_[k] >> 1), next = static_cast<std::uint32_t>(keys_[k + 1] >> 1);
        if (code != next) consider(k + 1, left_pos, code, next);
      }
    }
    return best;
  }

  const Prepared& prep_;
  const ForestSpec& spec_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> hist_total_, hist_pos_;
};

}  // namespace

ForestModel fit_forest(const Dataset& d, const ForestSpec& spec) {
  if (!d.target().has_both_labels()) throw DataError("random forest needs a binary target with both labels");
  if (spec.n_trees < 1) throw ConfigError("forest needs at least one tree");
  if (spec.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  const std::size_t p = d.n_features();
  std::size_t mtry = spec.max_features;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  if (mtry > p) throw ConfigError("max_features exceeds the feature count");

  const Prepared prep = prepare(d, spec.workers);
  ForestModel m;
  m.feature_names = d.names();
  m.trees.resize(spec.n_trees);
  m.in_bag.resize(spec.n_trees);
  m.out_of_bag.resize(spec.n_trees);
  parallel_for(spec.n_trees, spec.workers, [&](std::size_t t) {
    TreeBuilder builder(prep, spec, mtry, derive_seed(spec.seed, "tree", t));
    m.trees[t] = builder.grow(m.in_bag[t], m.out_of_bag[t]);
  });
  return m;
}

std::vector<double> predict_proba(const ForestModel& m, const FeatureMatrix& x, unsigned workers) {
  if (x.cols() != m.feature_names.size())
    throw ConfigError("model expects " + std::to_string(m.feature_names.size()) + " features, got " +
                      std::to_string(x.cols()));
  if (m.trees.empty()) throw ConfigError("model has no trees");
  const std::size_t n = x.rows();
  std::vector<double> out(n, 0.0);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto row = [&](std::size_t j) { return x.at(i, j); };
      double s = 0.0;
      for (const auto& tree : m.trees) s += tree.predict(row);
      out[i] = s / static_cast<double>(m.trees.size());
    }
  });
  return out;
}

double oob_accuracy(const ForestModel& m, const Dataset& d) {
  double total = 0.0;
  std::size_t scored = 0;
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const auto& oob = m.out_of_bag[t];
    if (oob.empty()) continue;
    std::size_t correct = 0;
    for (std::uint32_t i : oob) {
      auto row = [&](std::size_t j) { return d.features().at(i, j); };
      const double label = m.trees[t].predict(row) > 0.5 ? 1.0 : 0.0;
      correct += label == d.y()[i];
    }
    total += static_cast<double>(correct) / static_cast<double>(oob.size());
    ++scored;
  }
  if (scored == 0) throw NumericalError("no tree has out-of-bag rows");
  return total / static_cast<double>(scored);
}

ImportanceReport permutation_importance(const ForestModel& m, const Dataset& d, std::size_t repeats,
                                        std::uint64_t seed, unsigned workers) {
  if (d.n_features() != m.feature_names.size()) throw ConfigError("dataset does not match the model");
  if (repeats < 1) throw ConfigError("permutation importance needs at least one repeat");
  const std::size_t p = d.n_features();
  const std::size_t trees = m.trees.size();
  std::vector<std::vector<double>> per_tree(trees);
  std::vector<char> scored(trees, 0);

  parallel_for(trees, workers, [&](std::size_t t) {
    const auto& oob = m.out_of_bag[t];
    if (oob.empty()) return;
    const DecisionTree& tree = m.trees[t];
    const auto& x = d.features();
    auto y = d.y();
    Rng rng(derive_seed(seed, "permutation", t));

    std::size_t base_correct = 0;
    for (std::uint32_t i : oob) {
      auto row = [&](std::size_t j) { return x.at(i, j); };
      base_correct += (tree.predict(row) > 0.5 ? 1.0 : 0.0) == y[i];
    }
    const double m_oob = static_cast<double>(oob.size());
    const double base = static_cast<double>(base_correct) / m_oob;

    std::vector<double> pai(p, 0.0);
    std::vector<double> shuffled(oob.size());
    for (std::size_t f = 0; f < p; ++f) {
      if (!tree.uses(f)) continue;  // predictions cannot change
      double permuted = 0.0;
      for (std::size_t r = 0; r < repeats; ++r) {
        for (std::size_t k = 0; k < oob.size(); ++k) shuffled[k] = x.at(oob[k], f);
        rng.shuffle(shuffled);
        std::size_t correct = 0;
        for (std::size_t k = 0; k < oob.size(); ++k) {
          const std::uint32_t i = oob[k];
          auto row = [&](std::size_t j) { return j == f ? shuffled[k] : x.at(i, j); };
          correct += (tree.predict(row) > 0.5 ? 1.0 : 0.0) == y[i];
        }
        permuted += static_cast<double>(correct) / m_oob;
      }
      pai[f] = base - permuted / static_cast<double>(repeats);
    }
    per_tree[t] = std::move(pai);
    scored[t] = 1;
  });

  ImportanceReport report;
  report.features = d.names();
  report.repeats = repeats;
  report.pai_mean.assign(p, 0.0);
  report.pai_std.assign(p, 0.0);
  for (std::size_t t = 0; t < trees; ++t) {
    if (!scored[t]) continue;
    ++report.trees_scored;
    for (std::size_t f = 0; f < p; ++f) report.pai_mean[f] += per_tree[t][f];
  }
  if (report.trees_scored == 0) throw NumericalError("no tree has out-of-bag rows to permute");
  const double count = static_cast<double>(report.trees_scored);
  for (auto& v : report.pai_mean) v /= count;
  if (report.trees_scored > 1) {
    for (std::size_t t = 0; t < trees; ++t) {
      if (!scored[t]) continue;
      for (std::size_t f = 0; f < p; ++f) {
        const double dev = per_tree[t][f] - report.pai_mean[f];
        report.pai_std[f] += dev * dev;
      }
    }
    for (auto& v : report.pai_std) v = std::sqrt(v / (count - 1.0));
  }
  return report;
}

void write_importance_csv(const ImportanceReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "feature,pai_mean,pai_std\n";
  for (std::size_t f = 0; f < r.features.size(); ++f)
    out << r.features[f] << ',' << format_double(r.pai_mean[f]) << ',' << format_double(r.pai_std[f]) << '\n';
}

RfPaiResult rank_rf_pai(const Dataset& d, const RfPaiOptions& options) {
  RfPaiResult out;
  const ForestModel model = fit_forest(d, options.forest);
  out.importance = permutation_importance(model, d, options.repeats,
                                          derive_seed(options.forest.seed, "rf-pai"), options.forest.workers);
  const auto& mean = out.importance.pai_mean;
  const double top = *std::max_element(mean.begin(), mean.end());
  out.ranking.method = "rf-pai";
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    RankedFeature e;
    e.name = d.names()[j];
    e.column = j;
    e.score = mean[j];
    e.selected = mean[j] > 0.0 && mean[j] > options.min_relative * top;
    out.ranking.entries.push_back(std::move(e));
  }
  assign_ranks(out.ranking.entries);
  return out;
}

}  // namespace featsel
