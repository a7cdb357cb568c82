// Acceptance checks. Prints one PASS/FAIL line per criterion; `--only N`
// runs a single one. Exit status is 0 only when every criterion run passed.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "featsel/benchmark.hpp"
#include "featsel/fealect.hpp"
#include "featsel/filters.hpp"
#include "featsel/forest.hpp"
#include "featsel/linear.hpp"
#include "featsel/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace featsel;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

Dataset random_regression(std::mt19937_64& gen, std::size_t n, std::size_t p) {
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < p; ++j) cols.push_back(fixtures::normal_column(gen, n));
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> beta(p);
  for (auto& b : beta) b = g(gen);
  auto e = fixtures::normal_column(gen, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = e[i];
    for (std::size_t j = 0; j < p; ++j) y[i] += beta[j] * cols[j][i];
  }
  return fixtures::make_data(cols, y, false);
}

// Centered design and response straight from the dataset.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> centered(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.n_samples()), p = static_cast<Eigen::Index>(d.n_features());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = d.features().at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  for (Eigen::Index i = 0; i < n; ++i) y(i) = d.y()[static_cast<std::size_t>(i)];
  x.rowwise() -= x.colwise().mean();
  y.array() -= y.mean();
  return {x, y};
}

Outcome oracle_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(101);
  double pearson_err = 0, su_err = 0, merit_err = 0, auc_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> size(3, 60);
    const std::size_t n = size(gen);
    auto x = fixtures::normal_column(gen, n);
    auto y = fixtures::normal_column(gen, n);
    for (std::size_t i = 0; i < n; ++i) y[i] += (trial % 7 - 3) * 0.3 * x[i];
    pearson_err = std::max(pearson_err, std::abs(pearson(x, y) - oracle::pearson(x, y)));

    std::uniform_int_distribution<std::size_t> dim(1, 6), cell(0, 30);
    std::vector<std::vector<std::size_t>> rows(dim(gen) + 1, std::vector<std::size_t>(dim(gen) + 1));
    for (auto& r : rows)
      for (auto& v : r) v = cell(gen);
    rows[0][0] += 1;
    ContingencyTable t;
    t.rows = rows.size();
    t.cols = rows[0].size();
    for (const auto& r : rows) t.counts.insert(t.counts.end(), r.begin(), r.end());
    su_err = std::max(su_err, std::abs(symmetrical_uncertainty(t).su - oracle::entropies(rows).su));

    const std::size_t p = dim(gen) + 2;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> target(p);
    for (auto& v : target) v = u(gen);
    SuMatrix pairs(p);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) pairs(a, b) = pairs(b, a) = a == b ? 1.0 : u(gen);
    std::vector<std::size_t> subset;
    for (std::size_t j = 0; j < p; ++j)
      if (u(gen) < 0.5) subset.push_back(j);
    if (subset.empty()) subset.push_back(0);
    merit_err = std::max(merit_err, std::abs(cfs_merit(subset, target, pairs).merit -
                                             oracle::merit(subset, target, pairs.values, p)));

    std::vector<double> scores(n), labels(n);
    std::uniform_int_distribution<int> coarse(0, 5);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = trial % 2 ? coarse(gen) : u(gen);
      labels[i] = u(gen) < 0.4 ? 1.0 : 0.0;
    }
    labels[0] = 1;
    labels[1] = 0;
    auc_err = std::max(auc_err, std::abs(auc(scores, labels).value - oracle::auc_pairs(scores, labels)));
  }
  const double secs = seconds_since(t0);
  const bool pass = pearson_err <= 1e-12 && auc_err <= 1e-12 && su_err <= 1e-9 && merit_err <= 1e-9 && secs < 10;
  return {pass, fmt("max error pearson %.2e, su %.2e, merit %.2e", pearson_err, su_err, merit_err) +
                    fmt(", auc %.2e; %.2f s", auc_err, secs)};
}

Outcome lasso_kkt() {
  std::mt19937_64 gen(202);
  double zero_sup = 0, soft_err = 0;
  std::size_t fits = 0, monotone = 0;
  auto count = [&](const LassoFit& f) {
    ++fits;
    bool ok = true;
    for (std::size_t s = 1; s < f.objective.size(); ++s)
      ok &= f.objective[s] <= f.objective[s - 1] * (1 + 1e-12);
    monotone += ok;
  };
  for (int trial = 0; trial < 50; ++trial) {
    Dataset d = random_regression(gen, 40, 6);
    const double top = lambda_max(d);
    for (double f : {1.0, 1.01, 3.0}) {
      LassoFit fit = lasso_fit(d, top * f);
      for (double w : fit.w.weights) zero_sup = std::max(zero_sup, std::abs(w));
      count(fit);
    }
    count(lasso_fit(d, top * 0.2));
  }
  // Orthonormal designs from a QR factorization, scaled so x_j'x_j = N.
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 30, p = 5;
    Eigen::MatrixXd raw(n, p);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) raw(i, j) = g(gen);
    raw.rowwise() -= raw.colwise().mean();
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() * Eigen::MatrixXd::Identity(n, p);
    q *= std::sqrt(static_cast<double>(n));
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = 3 + g(gen) * 0.5;
      for (Eigen::Index j = 0; j < p; ++j) {
        cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = q(i, j);
        y[static_cast<std::size_t>(i)] += (j - 2) * 0.4 * q(i, j);
      }
    }
    Dataset d = fixtures::make_data(cols, y, false);
    auto [x, yc] = centered(d);
    const Eigen::VectorXd ols = x.transpose() * yc / static_cast<double>(n);
    for (double lambda : {0.05, 0.2, 0.5}) {
      LassoFit fit = lasso_fit(d, lambda);
      count(fit);
      for (Eigen::Index j = 0; j < p; ++j)
        soft_err = std::max(soft_err, std::abs(fit.w.weights[static_cast<std::size_t>(j)] -
                                               oracle::soft_threshold(ols(j), lambda)));
    }
  }
  const bool pass = zero_sup < 1e-10 && soft_err <= 1e-6 && monotone == fits;
  return {pass, fmt("sup|w| at lambda_max %.1e, soft-threshold error %.2e, monotone objective on %.0f of %.0f fits",
                    zero_sup, soft_err, static_cast<double>(monotone), static_cast<double>(fits))};
}

Outcome path_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(303);
  std::uniform_int_distribution<std::size_t> pick_p(1, 8), pick_n(10, 60);
  double agree = 0, equal_corr = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = pick_p(gen);
    Dataset d = random_regression(gen, pick_n(gen), p);
    RegularizationPath path = lars_path(d);
    const double top = path.lambdas.front();
    for (int k = 1; k <= 20; ++k) {
      const double lambda = top * k / 21.0;
      const auto want = lasso_fit(d, lambda, {1e-10, 100000}).w.weights;
      const auto got = path.coefficients_at(lambda);
      for (std::size_t j = 0; j < p; ++j) agree = std::max(agree, std::abs(want[j] - got[j]));
    }
    auto [x, y] = centered(d);
    const double n = static_cast<double>(d.n_samples());
    for (std::size_t b = 1; b < path.size(); ++b) {
      if (path.lambdas[b] <= 0) continue;
      Eigen::VectorXd w(static_cast<Eigen::Index>(p));
      for (std::size_t j = 0; j < p; ++j) w(static_cast<Eigen::Index>(j)) = path.coefs[b][j];
      const Eigen::VectorXd c = x.transpose() * (y - x * w) / n;
      // Features active after the breakpoint, including one entering there.
      std::vector<std::size_t> active = path.active_sets[b];
      if (path.events[b] == PathEvent::enter) active.push_back(path.event_features[b]);
      if (path.events[b] == PathEvent::drop)
        active.erase(std::find(active.begin(), active.end(), path.event_features[b]));
      for (std::size_t j : active)
        equal_corr = std::max(equal_corr, std::abs(std::abs(c(static_cast<Eigen::Index>(j))) - path.lambdas[b]));
    }
  }
  const double secs = seconds_since(t0);
  return {agree <= 1e-5 && equal_corr <= 1e-8 && secs < 60,
          fmt("max |lars - cd| %.2e, max equal-correlation gap %.2e; %.1f s", agree, equal_corr, secs)};
}

Outcome cfs_optimality() {
  std::mt19937_64 gen(404);
  std::uniform_int_distribution<std::size_t> pick_p(2, 10);
  int optimal = 0, below_trace = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = pick_p(gen), n = 300;
    // A few informative columns, some noisy copies of them, and noise.
    std::vector<std::vector<double>> cols;
    auto base = fixtures::uniform_column(gen, n);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> score(n, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      auto c = fixtures::uniform_column(gen, n);
      const double kind = u(gen);
      if (kind < 0.3)
        for (std::size_t i = 0; i < n; ++i) c[i] = base[i] + 0.3 * g(gen);
      if (kind < 0.6)
        for (std::size_t i = 0; i < n; ++i) score[i] += c[i] * (0.5 + u(gen));
      cols.push_back(c);
    }
    std::vector<double> y(n);
    std::vector<double> sorted = score;
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[n * 3 / 4];
    for (std::size_t i = 0; i < n; ++i) y[i] = score[i] > cut ? 1.0 : 0.0;
    if (std::count(y.begin(), y.end(), 1.0) == 0) y[0] = 1.0;
    CfsResult r = cfs_select(fixtures::make_data(cols, y, true));
    const double best = oracle::best_subset(r.su_target, r.su_pairs.values, p).first;
    optimal += std::abs(r.search.best.merit - best) < 1e-12;
    for (const auto& v : r.search.trace.visited) below_trace += v.merit > r.search.best.merit;
  }
  return {optimal >= 95 && below_trace == 0,
          fmt("exhaustive optimum in %.0f of 100; %.0f trace entries beat the answer", optimal, below_trace)};
}

Outcome uniform_improvement() {
  const auto t0 = Clock::now();
  const std::size_t seeds = 20;
  const auto methods = default_methods();
  std::vector<double> noise_excluded(methods.size(), 0.0);
  double worst_gap = 1.0;
  std::string worst;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    auto h = fixtures::hotspots(seed, 5000);
    SplitIndices s = split(h.data, 0.25, derive_seed(seed, "split"));
    BenchmarkConfig c;
    c.seed = seed;
    BenchmarkReport r = run_benchmark(h.data, s, c);
    const double base = *r.baseline.validation_auc;
    std::size_t total_noise = 0;
    for (const auto& role : h.roles) total_noise += role.role == FeatureRole::noise;
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      const auto& row = r.rows[k];
      const double gap = row.validation_auc ? *row.validation_auc - (base - 0.01) : -1.0;
      if (gap < worst_gap) {
        worst_gap = gap;
        worst = row.method + " at seed " + std::to_string(seed);
      }
      std::size_t kept = 0;
      for (const auto& name : row.selected) kept += h.roles[h.data.features().find(name)].role == FeatureRole::noise;
      noise_excluded[k] += static_cast<double>(total_noise - kept) / seeds;
    }
    std::cerr << "  seed " << seed << " done (" << fmt("%.0f", seconds_since(t0)) << " s)\n";
  }
  const double min_excluded = *std::min_element(noise_excluded.begin(), noise_excluded.end());
  std::string per_method;
  for (std::size_t k = 0; k < methods.size(); ++k)
    per_method += std::string(k ? ", " : "") + method_name(methods[k]) + fmt(" %.2f", noise_excluded[k]);
  return {worst_gap >= 0.0 && min_excluded >= 15.0,
          fmt("smallest margin over baseline-0.01 is %.4f", worst_gap) + " (" + worst +
              "); mean noise features excluded of 19: " + per_method + fmt("; %.0f s", seconds_since(t0))};
}

// Copies can only split a feature's credit when they compete for the same
// node, so the pass condition uses trees that scan every column. The default
// ceil(sqrt(p)) draw is reported alongside for comparison.
Outcome correlation_bias() {
  const std::size_t seeds = 20;
  const std::size_t target = 0;  // strongest relevant column
  double all_alone = 0, all_dup = 0, sqrt_alone = 0, sqrt_dup = 0;
  int stable = 0, dropped = 0;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    auto h = fixtures::hotspots(seed, 5000);
    std::vector<std::vector<double>> cols;
    std::vector<std::string> names = h.data.names();
    for (std::size_t j = 0; j < h.data.n_features(); ++j)
      cols.emplace_back(h.data.column(j).begin(), h.data.column(j).end());
    for (int k = 1; k <= 3; ++k) {
      cols.push_back(cols[target]);
      names.push_back(names[target] + "_copy" + std::to_string(k));
    }
    Dataset dup(FeatureMatrix(cols, names), h.data.target(), true);

    RfPaiOptions rf;
    rf.forest.seed = derive_seed(seed, "forest");
    auto pai = [&](const Dataset& d) { return rank_rf_pai(d, rf).importance.pai_mean[target]; };
    sqrt_alone += pai(h.data) / seeds;
    sqrt_dup += pai(dup) / seeds;
    rf.forest.max_features = h.data.n_features();
    const double a = pai(h.data);
    rf.forest.max_features = dup.n_features();
    const double b = pai(dup);
    all_alone += a / seeds;
    all_dup += b / seeds;
    dropped += b < 0.9 * a;

    FeaLectOptions fo;
    fo.seed = derive_seed(seed, "fealect");
    const auto ca = classify_features(fealect_score(h.data, fo));
    const auto cb = classify_features(fealect_score(dup, fo));
    stable += (ca.per_feature[target] == FeatureClass::informative) ==
              (cb.per_feature[target] == FeatureClass::informative);
  }
  const double drop = 1.0 - all_dup / all_alone;
  return {drop > 0.10 && stable >= 18,
          fmt("mean RF-PAI %.4f -> %.4f with every column scanned (%.1f%% lower; lower by >10%% in %.0f of 20 seeds)",
              all_alone, all_dup, 100 * drop, dropped) +
              fmt("; default mtry %.4f -> %.4f", sqrt_alone, sqrt_dup) +
              fmt("; FeaLect informative status unchanged in %.0f of 20 seeds", stable)};
}

#ifndef FEATSEL_CLI_PATH
#define FEATSEL_CLI_PATH "featsel"
#endif

int run_cli_binary(const std::string& args) {
  const std::string cmd = std::string("\"") + FEATSEL_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "featsel_acceptance_determinism";
  fs::remove_all(root);
  const std::string common = "benchmark --synth default --seed 7 --out ";
  int status = 0;
  status |= run_cli_binary(common + (root / "w1a").string() + " --workers 1");
  status |= run_cli_binary(common + (root / "w1b").string() + " --workers 1");
  status |= run_cli_binary(common + (root / "w8").string() + " --workers 8");
  const std::string a = slurp(root / "w1a/report.csv");
  const bool runs = !a.empty() && a == slurp(root / "w1b/report.csv");
  const bool workers = !a.empty() && a == slurp(root / "w8/report.csv");
  fs::remove_all(root);
  return {status == 0 && runs && workers, std::string("report.csv identical across runs: ") + (runs ? "yes" : "no") +
                                              ", across --workers 1 and 8: " + (workers ? "yes" : "no") +
                                              fmt(" (%.0f bytes)", static_cast<double>(a.size()))};
}

Outcome runtime() {
  const fs::path root = fs::temp_directory_path() / "featsel_acceptance_runtime";
  fs::remove_all(root);
  const auto t0 = Clock::now();
  const int status = run_cli_binary("benchmark --synth default --seed 7 --trees 100 --bootstraps 100 --out " +
                                    root.string());
  const double secs = seconds_since(t0);
  fs::remove_all(root);
  return {status == 0 && secs < 120,
          fmt("six-method benchmark, N=5000, p=34, 100 trees, B=100: %.1f s on %.0f hardware threads", secs,
              static_cast<double>(default_workers()))};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_suite},
      {"lasso optimality", lasso_kkt},
      {"path consistency", path_consistency},
      {"cfs optimality", cfs_optimality},
      {"uniform improvement over baseline", uniform_improvement},
      {"correlation bias", correlation_bias},
      {"determinism", determinism},
      {"desk-scale runtime", runtime},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<std::size_t>(only) != k + 1) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    all &= o.pass;
    std::cout << "criterion " << k + 1 << " (" << criteria[k].first << "): " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
