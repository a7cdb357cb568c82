#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "featsel/common.hpp"
#include "featsel/dataset.hpp"

namespace fixtures {

using featsel::Dataset;

inline std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

inline Dataset make_data(std::vector<std::vector<double>> cols, std::vector<double> y, bool binary,
                         std::vector<std::string> names = {}) {
  if (names.empty()) names = default_names(cols.size());
  featsel::FeatureMatrix x(std::move(cols), std::move(names));
  auto target = binary ? featsel::binary_target(std::move(y)) : featsel::continuous_target(std::move(y));
  return Dataset(std::move(x), std::move(target));
}

inline std::vector<double> uniform_column(std::mt19937_64& gen, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

inline std::vector<double> normal_column(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(gen);
  return v;
}

struct Hotspots {
  Dataset data;
  std::vector<featsel::ColumnRole> roles;
};

// Synthetic data labelled at the 90th percentile and scaled, as the
// benchmark prepares it.
inline Hotspots hotspots(std::uint64_t seed, std::size_t n = 5000) {
  featsel::SynthSpec spec;
  spec.n_samples = n;
  spec.seed = featsel::derive_seed(seed, "synth");
  auto s = featsel::synthesize(spec);
  auto labels = featsel::label_hotspots(s.data.target(), 90.0);
  return {featsel::minmax_scale(s.data.with_target(labels.labels)), s.roles};
}

}  // namespace fixtures
