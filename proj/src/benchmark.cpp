#include "featsel/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "featsel/common.hpp"
#include "featsel/fealect.hpp"
#include "featsel/metrics.hpp"
#include "featsel/rfe.hpp"

namespace featsel {

namespace {

constexpr Method kAllMethods[] = {Method::pearson, Method::cfs,    Method::lasso,   Method::ridge,  Method::ols,
                                  Method::rf_pai,  Method::rfe,    Method::fealect, Method::bolasso};

FeatureRanking select_by_relative_weight(const WeightVector& w, const std::string& method, double min_relative) {
  FeatureRanking r = rank_by_weights(w, method);
  double top = 0.0;
  for (const auto& e : r.entries) top = std::max(top, e.score);
  for (auto& e : r.entries) e.selected = e.score > 0.0 && e.score >= min_relative * top;
  return r;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::pearson: return "pearson";
    case Method::cfs: return "cfs";
    case Method::lasso: return "lasso";
    case Method::ridge: return "ridge";
    case Method::ols: return "ols";
    case Method::rf_pai: return "rf-pai";
    case Method::rfe: return "rfe";
    case Method::fealect: return "fealect";
    case Method::bolasso: return "bolasso";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : kAllMethods)
    if (name == method_name(m)) return m;
  return std::nullopt;
}

std::string method_list() {
  std::string out;
  for (Method m : kAllMethods) {
    if (!out.empty()) out += ", ";
    out += method_name(m);
  }
  return out;
}

std::vector<Method> default_methods() {
  return {Method::pearson, Method::cfs, Method::lasso, Method::rf_pai, Method::rfe, Method::fealect};
}

FeatureRanking select_features(Method method, const Dataset& train, const BenchmarkConfig& config) {
  const MethodParams& params = config.params;
  const std::uint64_t seed = derive_seed(config.seed, method_name(method));
  ForestSpec forest = config.forest;
  forest.workers = config.workers;
  forest.seed = seed;

  switch (method) {
    case Method::pearson:
      return rank_pearson(train, params.pearson);
    case Method::cfs: {
      CfsOptions options;
      options.bins = params.cfs_bins;
      options.workers = config.workers;
      return cfs_select(train, options).ranking;
    }
    case Method::lasso:
      return rank_by_weights(lasso_fit(train, params.lasso).w, "lasso");
    case Method::ridge:
      return select_by_relative_weight(ridge_fit(train, params.ridge_lambda), "ridge", params.weight_min_relative);
    case Method::ols:
      return select_by_relative_weight(ols_fit(train), "ols", params.weight_min_relative);
    case Method::rf_pai: {
      RfPaiOptions options;
      options.forest = forest;
      options.repeats = params.pai_repeats;
      options.min_relative = params.pai_min_relative;
      return rank_rf_pai(train, options).ranking;
    }
    case Method::rfe: {
      RfeOptions options;
      options.forest = forest;
      options.repeats = params.pai_repeats;
      options.min_subset = params.rfe_min_subset;
      const SplitIndices inner = split(train, params.rfe_inner_fraction, derive_seed(seed, "inner-split"));
      return rfe(train, inner, options).as_ranking();
    }
    case Method::fealect: {
      FeaLectOptions options;
      options.bootstraps = params.fealect_bootstraps;
      options.seed = seed;
      options.workers = config.workers;
      const FeaLectScore score = fealect_score(train, options);
      return fealect_ranking(score, classify_features(score), params.fealect_keep_redundant);
    }
    case Method::bolasso:
      return bolasso_select(train, params.lasso, params.bolasso_bootstraps, seed, config.workers).ranking;
  }
  throw ConfigError("unknown method");
}

const MethodRow* BenchmarkReport::find(const std::string& method) const {
  if (method == baseline.method) return &baseline;
  for (const auto& r : rows)
    if (r.method == method) return &r;
  return nullptr;
}

bool BenchmarkReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const MethodRow& r) { return !r.error.empty(); });
}

BenchmarkReport run_benchmark(const Dataset& d, const SplitIndices& split, const BenchmarkConfig& config) {
  if (!d.target().has_both_labels()) throw DataError("benchmark needs a binary target with both labels");
  const Dataset train = d.select_rows(split.train);
  const Dataset valid = d.select_rows(split.validation);
  if (!train.target().has_both_labels() || !valid.target().has_both_labels())
    throw DataError("both sides of the split need both labels");

  ForestSpec forest = config.forest;
  forest.workers = config.workers;
  forest.seed = derive_seed(config.seed, "forest");

  auto score = [&](MethodRow& row, const std::vector<std::size_t>& cols) {
    const Dataset tr = train.select_columns(cols);
    const Dataset va = valid.select_columns(cols);
    const ForestModel model = fit_forest(tr, forest);
    row.train_auc = auc(predict_proba(model, tr.features(), config.workers), tr.y()).value;
    row.validation_auc = auc(predict_proba(model, va.features(), config.workers), va.y()).value;
  };

  BenchmarkReport report;
  report.features = d.names();
  report.baseline.method = "baseline";
  std::vector<std::size_t> all(d.n_features());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  report.baseline.selected = d.names();
  score(report.baseline, all);

  for (Method method : config.methods) {
    MethodRow row;
    row.method = method_name(method);
    try {
      row.ranking = select_features(method, train, config);
      row.selected = row.ranking.selected_names();
      const std::vector<std::size_t> cols = row.ranking.selected_columns();
      if (cols.empty())
        row.degenerate = true;
      else
        score(row, cols);
    } catch (const Error& e) {
      row.error = e.what();
      row.exit_code = e.exit_code();
    }
    report.rows.push_back(std::move(row));
  }

  auto& meta = report.metadata;
  meta.emplace_back("dataset_fingerprint", d.fingerprint());
  meta.emplace_back("n_samples", std::to_string(d.n_samples()));
  meta.emplace_back("n_features", std::to_string(d.n_features()));
  meta.emplace_back("n_train", std::to_string(split.train.size()));
  meta.emplace_back("n_validation", std::to_string(split.validation.size()));
  meta.emplace_back("master_seed", std::to_string(config.seed));
  meta.emplace_back("forest_seed", std::to_string(forest.seed));
  for (Method m : config.methods)
    meta.emplace_back(std::string("seed.") + method_name(m), std::to_string(derive_seed(config.seed, method_name(m))));
  meta.emplace_back("forest.n_trees", std::to_string(config.forest.n_trees));
  meta.emplace_back("forest.max_features", std::to_string(config.forest.max_features));
  meta.emplace_back("forest.min_samples_leaf", std::to_string(config.forest.min_samples_leaf));
  meta.emplace_back("forest.max_depth", std::to_string(config.forest.max_depth));
  return report;
}

namespace {

std::string auc_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::string percent(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void summary_line(std::ostringstream& out, const MethodRow& row) {
  out << row.method << ",,,,," << auc_cell(row.train_auc) << ',' << auc_cell(row.validation_auc) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_auc(const std::string& cell) {
  if (cell == "NA") return std::nullopt;
  double v;
  if (!parse_double(cell, v)) throw DataError("report: bad AUC cell '" + cell + "'");
  return v;
}

}  // namespace

std::string emit_report(const BenchmarkReport& r, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << "method,feature,score,rank,selected,train_auc,validation_auc\n";
    summary_line(out, r.baseline);
    for (const auto& row : r.rows) {
      for (const auto& e : row.ranking.entries)
        out << row.method << ',' << e.name << ',' << format_double(e.score) << ',' << e.rank << ','
            << (e.selected ? 1 : 0) << ",,\n";
      summary_line(out, row);
    }
    return out.str();
  }

  out << "| Feature |";
  for (const auto& row : r.rows) out << ' ' << row.method << " |";
  out << "\n|---|";
  for (std::size_t k = 0; k < r.rows.size(); ++k) out << "---|";
  out << '\n';
  for (const auto& feature : r.features) {
    out << "| " << feature << " |";
    for (const auto& row : r.rows) {
      const RankedFeature* e = row.ranking.find(feature);
      if (!e)
        out << "  |";
      else if (e->selected)
        out << " **" << short_number(e->score) << "** |";
      else
        out << ' ' << short_number(e->score) << " |";
    }
    out << '\n';
  }
  out << "| training AUC (%) |";
  for (const auto& row : r.rows) out << ' ' << (row.degenerate ? "degenerate" : percent(row.train_auc)) << " |";
  out << "\n| validation AUC (%) |";
  for (const auto& row : r.rows) out << ' ' << (row.degenerate ? "degenerate" : percent(row.validation_auc)) << " |";
  out << "\n\nRandom forest AUC without feature selection: training " << percent(r.baseline.train_auc)
      << "%, validation " << percent(r.baseline.validation_auc) << "%\n";
  out << "\nBold cells mark the features each method selected.\n";
  for (const auto& row : r.rows)
    if (!row.error.empty()) out << "\n" << row.method << " failed: " << row.error << '\n';
  return out.str();
}

BenchmarkReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "method,feature,score,rank,selected,train_auc,validation_auc")
    throw DataError("report: unexpected header");
  BenchmarkReport r;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw DataError("report: line " + std::to_string(line_no) + " has the wrong cell count");
    const std::string& method = cells[0];
    MethodRow* row;
    if (method == "baseline") {
      row = &r.baseline;
      row->method = method;
    } else {
      auto it = index.find(method);
      if (it == index.end()) {
        it = index.emplace(method, r.rows.size()).first;
        r.rows.emplace_back();
        r.rows.back().method = method;
        r.rows.back().ranking.method = method;
      }
      row = &r.rows[it->second];
    }
    if (cells[1].empty()) {
      row->train_auc = parse_auc(cells[5]);
      row->validation_auc = parse_auc(cells[6]);
      row->degenerate = !row->validation_auc && method != "baseline";
      continue;
    }
    RankedFeature e;
    e.name = cells[1];
    if (!parse_double(cells[2], e.score)) throw DataError("report: bad score on line " + std::to_string(line_no));
    e.rank = static_cast<std::size_t>(std::stoul(cells[3]));
    e.selected = cells[4] == "1";
    if (std::find(r.features.begin(), r.features.end(), e.name) == r.features.end()) r.features.push_back(e.name);
    if (e.selected) row->selected.push_back(e.name);
    row->ranking.entries.push_back(std::move(e));
  }
  // Column indices follow first appearance.
  for (auto& row : r.rows)
    for (auto& e : row.ranking.entries)
      e.column = static_cast<std::size_t>(std::find(r.features.begin(), r.features.end(), e.name) - r.features.begin());
  if (r.baseline.method.empty()) throw DataError("report: no baseline row");
  return r;
}

}  // namespace featsel
