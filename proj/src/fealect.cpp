#include "featsel/fealect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "featsel/common.hpp"

namespace featsel {

BootstrapSample bootstrap_sample(std::size_t n, std::uint64_t master_seed, std::size_t index) {
  BootstrapSample b;
  b.seed = derive_seed(master_seed, "bootstrap", index);
  Rng rng(b.seed);
  b.indices.resize(n);
  for (auto& i : b.indices) i = rng.index(n);
  return b;
}

BolassoResult bolasso_select(const Dataset& d, const PenaltySpec& penalty, std::size_t bootstraps,
                             std::uint64_t seed, unsigned workers) {
  if (bootstraps < 1) throw ConfigError("Bolasso needs at least one bootstrap");
  BolassoResult out;
  out.lambda = penalty.relative ? penalty.lambda * lambda_max(d) : penalty.lambda;
  out.supports.resize(bootstraps);
  parallel_for(bootstraps, workers, [&](std::size_t b) {
    const BootstrapSample sample = bootstrap_sample(d.n_samples(), seed, b);
    const LassoFit fit = lasso_fit(d.select_rows(sample.indices), out.lambda);
    for (std::size_t j = 0; j < fit.w.weights.size(); ++j)
      if (fit.w.weights[j] != 0.0) out.supports[b].push_back(j);
  });

  const std::size_t p = d.n_features();
  std::vector<std::size_t> hits(p, 0);
  for (const auto& s : out.supports)
    for (std::size_t j : s) ++hits[j];

  out.ranking.method = "bolasso";
  for (std::size_t j = 0; j < p; ++j) {
    RankedFeature e;
    e.name = d.names()[j];
    e.column = j;
    e.score = static_cast<double>(hits[j]) / static_cast<double>(bootstraps);
    e.selected = hits[j] == bootstraps;
    out.ranking.entries.push_back(std::move(e));
  }
  assign_ranks(out.ranking.entries);
  out.empty = out.ranking.selected_columns().empty();
  return out;
}

PathCredit inverse_active_size_credit() {
  return {"inverse-active-size", [](const RegularizationPath& path) {
            std::vector<double> credit(path.names.size(), 0.0);
            for (const auto& active : path.active_sets) {
              if (active.empty()) continue;
              const double share = 1.0 / static_cast<double>(active.size());
              for (std::size_t j : active) credit[j] += share;
            }
            return credit;
          }};
}

FeaLectScore fealect_score(const Dataset& d, const FeaLectOptions& options) {
  if (options.bootstraps < 2) throw ConfigError("FeaLect needs at least two bootstraps");
  const std::size_t p = d.n_features();
  std::vector<std::vector<double>> credits(options.bootstraps);
  std::vector<char> ok(options.bootstraps, 0);
  parallel_for(options.bootstraps, options.workers, [&](std::size_t b) {
    const BootstrapSample sample = bootstrap_sample(d.n_samples(), options.seed, b);
    try {
      credits[b] = options.rule.credit(lars_path(d.select_rows(sample.indices)));
      ok[b] = 1;
    } catch (const NumericalError&) {
    }
  });

  FeaLectScore s;
  s.features = d.names();
  s.bootstraps = options.bootstraps;
  s.score.assign(p, 0.0);
  std::size_t kept = 0;
  for (std::size_t b = 0; b < options.bootstraps; ++b) {
    if (!ok[b]) {
      ++s.dropped;
      continue;
    }
    ++kept;
    for (std::size_t j = 0; j < p; ++j) s.score[j] += credits[b][j];
  }
  if (static_cast<double>(s.dropped) > options.max_dropped_fraction * static_cast<double>(options.bootstraps) ||
      kept == 0)
    throw NumericalError("FeaLect: " + std::to_string(s.dropped) + " of " + std::to_string(options.bootstraps) +
                         " bootstrap paths failed");
  s.log_score.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    s.score[j] /= static_cast<double>(kept);
    s.log_score[j] = std::log1p(s.score[j]);
  }
  return s;
}

const char* class_name(FeatureClass c) {
  switch (c) {
    case FeatureClass::informative: return "informative";
    case FeatureClass::redundant: return "redundant";
    case FeatureClass::irrelevant: return "irrelevant";
  }
  return "?";
}

FeatureClassification classify_features(const FeaLectScore& s, const std::optional<ClassThresholds>& thresholds) {
  const std::size_t p = s.score.size();
  FeatureClassification c;
  c.per_feature.assign(p, FeatureClass::irrelevant);

  if (thresholds) {
    for (std::size_t j = 0; j < p; ++j) {
      if (s.score[j] == 0.0) continue;
      if (s.log_score[j] >= thresholds->informative)
        c.per_feature[j] = FeatureClass::informative;
      else if (s.log_score[j] >= thresholds->redundant)
        c.per_feature[j] = FeatureClass::redundant;
    }
  } else {
    std::set<double> distinct(s.score.begin(), s.score.end());
    if (distinct.size() < 3) {
      c.fallback = true;
      for (std::size_t j = 0; j < p; ++j)
        if (s.score[j] > 0.0) c.per_feature[j] = FeatureClass::informative;
    } else {
      std::vector<std::size_t> order(p);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.log_score[a] > s.log_score[b]; });
      // gap k sits between sorted positions k and k + 1.
      std::vector<std::size_t> gaps(p - 1);
      std::iota(gaps.begin(), gaps.end(), std::size_t{0});
      auto width = [&](std::size_t k) { return s.log_score[order[k]] - s.log_score[order[k + 1]]; };
      std::stable_sort(gaps.begin(), gaps.end(), [&](std::size_t a, std::size_t b) { return width(a) > width(b); });
      const std::size_t first = std::min(gaps[0], gaps[1]);
      const std::size_t second = std::max(gaps[0], gaps[1]);
      for (std::size_t k = 0; k < p; ++k) {
        const std::size_t j = order[k];
        if (s.score[j] == 0.0) continue;
        c.per_feature[j] = k <= first ? FeatureClass::informative
                           : k <= second ? FeatureClass::redundant
                                         : FeatureClass::irrelevant;
      }
    }
  }

  for (std::size_t j = 0; j < p; ++j) {
    switch (c.per_feature[j]) {
      case FeatureClass::informative: c.informative.push_back(s.features[j]); break;
      case FeatureClass::redundant: c.redundant.push_back(s.features[j]); break;
      case FeatureClass::irrelevant: c.irrelevant.push_back(s.features[j]); break;
    }
  }
  return c;
}

void write_fealect_csv(const FeaLectScore& s, const FeatureClassification& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "feature,score,log_score,class\n";
  for (std::size_t j = 0; j < s.features.size(); ++j)
    out << s.features[j] << ',' << format_double(s.score[j]) << ',' << format_double(s.log_score[j]) << ','
        << class_name(c.per_feature[j]) << '\n';
}

FeatureRanking fealect_ranking(const FeaLectScore& s, const FeatureClassification& c, bool keep_redundant) {
  FeatureRanking r{"fealect", {}};
  for (std::size_t j = 0; j < s.features.size(); ++j) {
    RankedFeature e;
    e.name = s.features[j];
    e.column = j;
    e.score = s.score[j];
    e.selected = c.per_feature[j] == FeatureClass::informative ||
                 (keep_redundant && c.per_feature[j] == FeatureClass::redundant);
    r.entries.push_back(std::move(e));
  }
  assign_ranks(r.entries);
  return r;
}

}  // namespace featsel
