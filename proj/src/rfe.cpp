#include "featsel/rfe.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "featsel/common.hpp"
#include "featsel/metrics.hpp"

namespace featsel {

RfeRanking rfe(const Dataset& d, const SplitIndices& split, const RfeOptions& options) {
  const std::size_t p = d.n_features();
  if (options.min_subset < 1) throw ConfigError("RFE min_subset must be at least 1");
  const Dataset train_all = d.select_rows(split.train);
  const Dataset valid_all = d.select_rows(split.validation);
  if (!valid_all.target().has_both_labels()) throw DataError("RFE validation rows need both labels");

  RfeRanking out;
  out.features = d.names();
  std::vector<std::size_t> subset(p);
  std::iota(subset.begin(), subset.end(), std::size_t{0});

  for (std::size_t step = 0;; ++step) {
    const Dataset train = train_all.select_columns(subset);
    const Dataset valid = valid_all.select_columns(subset);
    ForestSpec spec = options.forest;
    spec.seed = derive_seed(options.forest.seed, "rfe-step", step);
    const ForestModel model = fit_forest(train, spec);
    const std::vector<double> prob = predict_proba(model, valid.features(), spec.workers);

    RfeStep record;
    record.subset = subset;
    const AucResult a = auc(prob, valid.y());
    record.validation_auc = a.value;
    record.auc_se = auc_standard_error(a);

    if (subset.size() <= options.min_subset || subset.size() == 1) {
      out.steps.push_back(std::move(record));
      break;
    }
    const ImportanceReport imp = permutation_importance(model, train, options.repeats,
                                                        derive_seed(options.forest.seed, "rfe-pai", step), spec.workers);
    // Lowest importance goes; among ties the higher column index goes first.
    std::size_t worst = 0;
    for (std::size_t k = 1; k < subset.size(); ++k)
      if (imp.pai_mean[k] <= imp.pai_mean[worst]) worst = k;
    record.eliminated = subset[worst];
    out.steps.push_back(std::move(record));
    subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(worst));
  }

  std::size_t top = 0;
  for (std::size_t s = 1; s < out.steps.size(); ++s)
    if (out.steps[s].validation_auc >= out.steps[top].validation_auc) top = s;
  out.best_step = top;
  if (options.choice == RfeChoice::within_one_se) {
    // Later steps hold smaller subsets.
    const double floor =
        std::max(out.steps[top].validation_auc - out.steps[top].auc_se, out.steps[0].validation_auc);
    for (std::size_t s = out.steps.size(); s-- > top;)
      if (out.steps[s].validation_auc >= floor) {
        out.best_step = s;
        break;
      }
  }

  out.rank.assign(p, 1);
  for (std::size_t s = 0; s < out.best_step; ++s) out.elimination_order.push_back(*out.steps[s].eliminated);
  const std::size_t m = out.elimination_order.size();
  for (std::size_t i = 0; i < m; ++i) out.rank[out.elimination_order[i]] = m - i + 1;
  return out;
}

FeatureRanking RfeRanking::as_ranking() const {
  FeatureRanking r{"rfe", {}};
  for (std::size_t j = 0; j < features.size(); ++j) {
    RankedFeature e;
    e.name = features[j];
    e.column = j;
    e.score = static_cast<double>(rank[j]);
    e.rank = rank[j];
    e.selected = rank[j] == 1;
    r.entries.push_back(std::move(e));
  }
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.rank < b.rank; });
  return r;
}

void write_rfe_csv(const RfeRanking& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  std::vector<std::optional<std::size_t>> at_step(r.features.size());
  for (std::size_t s = 0; s < r.best_step; ++s) at_step[*r.steps[s].eliminated] = s;
  out << "feature,rank,eliminated_at_step,step_auc\n";
  for (std::size_t j = 0; j < r.features.size(); ++j) {
    const std::size_t s = at_step[j] ? *at_step[j] : r.best_step;
    out << r.features[j] << ',' << r.rank[j] << ',' << (at_step[j] ? std::to_string(*at_step[j]) : "") << ','
        << format_double(r.steps[s].validation_auc) << '\n';
  }
}

}  // namespace featsel
