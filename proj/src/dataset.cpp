#include "featsel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "featsel/common.hpp"

namespace featsel {

FeatureMatrix::FeatureMatrix(std::vector<std::vector<double>> columns,
                             std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) throw DataError("feature matrix needs at least one column");
  if (columns.size() != names_.size())
    throw DataError("feature matrix has " + std::to_string(columns.size()) + " columns but " +
                    std::to_string(names_.size()) + " names");
  rows_ = columns.front().size();
  if (rows_ < 2) throw DataError("feature matrix needs at least two rows");
  std::unordered_set<std::string> seen;
  values_.reserve(rows_ * names_.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (!seen.insert(names_[j]).second) throw DataError("duplicate feature name '" + names_[j] + "'");
    if (columns[j].size() != rows_)
      throw DataError("column '" + names_[j] + "' has " + std::to_string(columns[j].size()) +
                      " rows, expected " + std::to_string(rows_));
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!std::isfinite(columns[j][i]))
        throw DataError("non-finite value in column '" + names_[j] + "' at row " +
                        std::to_string(i));
    }
    values_.insert(values_.end(), columns[j].begin(), columns[j].end());
  }
}

std::size_t FeatureMatrix::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t TargetVector::positives() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), 1.0));
}

bool TargetVector::has_both_labels() const {
  std::size_t pos = positives();
  return kind == TargetKind::binary && pos > 0 && pos < values.size();
}

TargetVector binary_target(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0 && values[i] != 1.0)
      throw DataError("binary target holds " + format_double(values[i]) + " at row " +
                      std::to_string(i));
  }
  return TargetVector{TargetKind::binary, std::move(values)};
}

TargetVector continuous_target(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw DataError("non-finite target at row " + std::to_string(i));
  }
  return TargetVector{TargetKind::continuous, std::move(values)};
}

Dataset::Dataset(FeatureMatrix features, TargetVector target, bool scaled)
    : features_(std::move(features)), target_(std::move(target)), scaled_(scaled) {
  if (target_.values.size() != features_.rows())
    throw DataError("target has " + std::to_string(target_.values.size()) + " values for " +
                    std::to_string(features_.rows()) + " rows");
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(n_features(), std::vector<double>(rows.size()));
  std::vector<double> y(rows.size());
  for (std::size_t j = 0; j < n_features(); ++j) {
    auto src = column(j);
    for (std::size_t k = 0; k < rows.size(); ++k) cols[j][k] = src[rows[k]];
  }
  for (std::size_t k = 0; k < rows.size(); ++k) y[k] = target_.values[rows[k]];
  return Dataset(FeatureMatrix(std::move(cols), names()), TargetVector{target_.kind, std::move(y)},
                 scaled_);
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  std::vector<std::vector<double>> out;
  std::vector<std::string> out_names;
  out.reserve(cols.size());
  for (std::size_t j : cols) {
    auto c = column(j);
    out.emplace_back(c.begin(), c.end());
    out_names.push_back(features_.name(j));
  }
  return Dataset(FeatureMatrix(std::move(out), std::move(out_names)), target_, scaled_);
}

Dataset Dataset::with_target(TargetVector target) const {
  return Dataset(features_, std::move(target), scaled_);
}

std::string Dataset::fingerprint() const {
  std::uint64_t h = fnv1a("featsel-dataset");
  for (const auto& name : names()) h = fnv1a(name + '\n', h);
  auto hash_values = [&](std::span<const double> v) {
    h = fnv1a({reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)}, h);
  };
  for (std::size_t j = 0; j < n_features(); ++j) hash_values(column(j));
  hash_values(target_.values);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty())
      throw DataError(path.string() + ": header column " + std::to_string(c + 1) + " has no name");
    if (!seen.insert(header[c]).second)
      throw DataError(path.string() + ": duplicate header name '" + header[c] + "'");
  }
  auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end())
    throw DataError(path.string() + ": target column '" + target_column + "' not in header");
  const std::size_t target_idx = static_cast<std::size_t>(target_it - header.begin());

  std::vector<std::vector<double>> cols(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (!parse_double(cells[c], v) || !std::isfinite(v))
        throw DataError(path.string() + ": row " + std::to_string(line_no) + ", column '" +
                        header[c] + "': non-numeric value '" + trim(cells[c]) + "'");
      cols[c].push_back(v);
    }
  }

  std::vector<double> y = std::move(cols[target_idx]);
  std::vector<std::vector<double>> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == target_idx) continue;
    feature_cols.push_back(std::move(cols[c]));
    names.push_back(header[c]);
  }
  if (names.empty()) throw DataError(path.string() + ": no feature columns besides the target");
  if (y.size() < 2) throw DataError(path.string() + ": need at least two data rows");

  bool zero_one = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0 || v == 1.0; });
  TargetVector target = zero_one ? binary_target(std::move(y)) : continuous_target(std::move(y));
  return Dataset(FeatureMatrix(std::move(feature_cols), std::move(names)), std::move(target));
}

void write_csv(const Dataset& d, const std::filesystem::path& path,
               const std::string& target_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& name : d.names()) out << name << ',';
  out << target_column << '\n';
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    for (std::size_t j = 0; j < d.n_features(); ++j) out << format_double(d.features().at(i, j)) << ',';
    out << format_double(d.target().values[i]) << '\n';
  }
}

Dataset minmax_scale(const Dataset& d) {
  if (d.scaled()) throw ConfigError("dataset is already min-max scaled");
  std::vector<std::vector<double>> cols(d.n_features());
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    auto c = d.column(j);
    auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    const double min = *lo, range = *hi - *lo;
    cols[j].resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) cols[j][i] = range > 0.0 ? (c[i] - min) / range : 0.0;
  }
  return Dataset(FeatureMatrix(std::move(cols), d.names()), d.target(), true);
}

double percentile(std::span<const double> values, double pct) {
  if (values.empty()) throw DataError("percentile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * pct / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

HotspotLabels label_hotspots(const TargetVector& stress, double pct) {
  if (stress.kind != TargetKind::continuous)
    throw ConfigError("hotspot labeling needs a continuous target");
  if (!(pct > 0.0 && pct < 100.0)) throw ConfigError("percentile must lie in (0, 100)");
  HotspotLabels out;
  out.threshold = percentile(stress.values, pct);
  std::vector<double> labels(stress.values.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = stress.values[i] > out.threshold ? 1.0 : 0.0;
  out.labels = TargetVector{TargetKind::binary, std::move(labels)};
  out.no_positives = out.labels.positives() == 0;
  return out;
}

SplitIndices split(const Dataset& d, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation fraction must lie in (0, 1)");
  const std::size_t n = d.n_samples();
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n)
    throw ConfigError("validation fraction " + format_double(validation_fraction) + " leaves an empty side for N=" +
                      std::to_string(n));

  // Strata: one per label for binary targets, a single stratum otherwise.
  std::vector<std::vector<std::size_t>> strata(d.target().kind == TargetKind::binary ? 2 : 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t s = strata.size() == 2 ? static_cast<std::size_t>(d.target().values[i]) : 0;
    strata[s].push_back(i);
  }

  // Largest-remainder allocation of n_val across strata; ties go to the
  // lower stratum.
  std::vector<std::size_t> quota(strata.size());
  std::vector<double> remainder(strata.size());
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    double exact = static_cast<double>(n_val) * static_cast<double>(strata[s].size()) / static_cast<double>(n);
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    remainder[s] = exact - static_cast<double>(quota[s]);
    assigned += quota[s];
  }
  std::vector<std::size_t> order(strata.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n_val; ++k, ++assigned) ++quota[order[k % order.size()]];
  for (std::size_t s = 0; s < strata.size(); ++s) {
    if (strata[s].size() >= 2) quota[s] = std::clamp<std::size_t>(quota[s], 1, strata[s].size() - 1);
  }

  Rng rng(seed);
  SplitIndices out;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    rng.shuffle(strata[s]);
    out.validation.insert(out.validation.end(), strata[s].begin(), strata[s].begin() + static_cast<std::ptrdiff_t>(quota[s]));
    out.train.insert(out.train.end(), strata[s].begin() + static_cast<std::ptrdiff_t>(quota[s]), strata[s].end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  if (out.train.empty() || out.validation.empty())
    throw ConfigError("split produced an empty side");
  return out;
}

const char* role_name(FeatureRole role) {
  switch (role) {
    case FeatureRole::relevant: return "relevant";
    case FeatureRole::redundant: return "redundant";
    case FeatureRole::noise: return "noise";
  }
  return "?";
}

namespace {

// Column names of the 34 hotspot descriptors, in the order they are listed
// in the variable-importance table.
constexpr const char* kHotspotFeatureNames[34] = {
    "cos_phi",        "Schmid_1",    "EquivalentDiameters", "GBEuc",     "Schmid_4",
    "Neighborhoods",  "sin_theta",   "TJEuc",               "sin_phi",   "AvgMisorientations",
    "NumNeighbors",   "Schmid_3",    "Min_mis",             "AvgC_Axes_1", "Max_mis",
    "NumCells",       "Schmid_2",    "KernelAvg",           "010_IPF_1", "phi",
    "001_IPF_0",      "001_IPF_2",   "010_IPF_0",           "100_IPF_0", "001_IPF_1",
    "100_IPF_1",      "QPEuc",       "AvgC_Axes_0",         "theta",     "FeatureVolumes",
    "010_IPF_2",      "AvgC_Axes_2", "100_IPF_2",           "cos_theta"};

}  // namespace

double synth_coefficient(std::size_t k) {
  const double magnitude = 10.0 * (1.0 - 0.1 * static_cast<double>(k % 5));
  return k % 2 == 0 ? magnitude : -magnitude;
}

SyntheticData synthesize(const SynthSpec& spec) {
  if (spec.n_samples == 0) throw ConfigError("synthetic dataset needs at least one sample");
  if (spec.n_samples < 2) throw ConfigError("synthetic dataset needs at least two samples");
  if (spec.n_relevant < 1) throw ConfigError("synthetic dataset needs at least one relevant column");
  if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd))
    throw ConfigError("noise_sd must be a finite non-negative number");

  const std::size_t n = spec.n_samples;
  const std::size_t p = spec.n_relevant + spec.n_redundant + spec.n_noise;
  Rng rng(spec.seed);

  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = p == 34 ? kHotspotFeatureNames[j] : "x" + std::to_string(j);

  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  std::vector<ColumnRole> roles;
  std::vector<double> coefficients(spec.n_relevant);

  for (std::size_t k = 0; k < spec.n_relevant; ++k) {
    for (auto& v : cols[k]) v = rng.uniform();
    coefficients[k] = synth_coefficient(k);
    roles.push_back({names[k], FeatureRole::relevant, ""});
  }
  double signal_var = 0.0;
  for (double c : coefficients) signal_var += c * c / 12.0;
  const double target_sd = spec.noise_sd * std::sqrt(signal_var);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < spec.n_relevant; ++k) s += coefficients[k] * cols[k][i];
    y[i] = s + target_sd * rng.normal();
  }

  for (std::size_t r = 0; r < spec.n_redundant; ++r) {
    const std::size_t j = spec.n_relevant + r;
    const std::size_t parent = rng.index(spec.n_relevant);
    const double scale = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const double shift = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      cols[j][i] = scale * (cols[parent][i] + spec.noise_sd * rng.normal()) + shift;
    roles.push_back({names[j], FeatureRole::redundant, names[parent]});
  }

  for (std::size_t q = 0; q < spec.n_noise; ++q) {
    const std::size_t j = spec.n_relevant + spec.n_redundant + q;
    for (auto& v : cols[j]) v = rng.uniform();
    roles.push_back({names[j], FeatureRole::noise, ""});
  }

  return SyntheticData{Dataset(FeatureMatrix(std::move(cols), std::move(names)), continuous_target(std::move(y))),
                       std::move(roles), std::move(coefficients)};
}

void write_roles_csv(const std::vector<ColumnRole>& roles, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "column,role,parent\n";
  for (const auto& r : roles) out << r.column << ',' << role_name(r.role) << ',' << r.parent << '\n';
}

}  // namespace featsel
