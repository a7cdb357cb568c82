#include "featsel/linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace featsel {

namespace {

struct Centered {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd x_mean;
  double y_mean = 0.0;
};

Centered center(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.n_samples());
  const auto p = static_cast<Eigen::Index>(d.n_features());
  Centered c;
  c.x.resize(n, p);
  c.x_mean.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    auto col = d.column(static_cast<std::size_t>(j));
    c.x.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
    c.x_mean(j) = c.x.col(j).mean();
    c.x.col(j).array() -= c.x_mean(j);
  }
  auto y = d.y();
  c.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  c.y_mean = c.y.mean();
  c.y.array() -= c.y_mean;
  return c;
}

WeightVector make_weights(const Dataset& d, const Centered& c, const Eigen::VectorXd& w) {
  WeightVector out;
  out.names = d.names();
  out.weights.assign(w.data(), w.data() + w.size());
  out.intercept = c.y_mean - c.x_mean.dot(w);
  return out;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

WeightVector ols_fit(const Dataset& d) {
  Centered c = center(d);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c.x);
  Eigen::VectorXd w = cod.solve(c.y);
  WeightVector out = make_weights(d, c, w);
  out.degenerate = cod.rank() < c.x.cols();
  return out;
}

WeightVector ridge_fit(const Dataset& d, double lambda2) {
  if (!(lambda2 > 0.0)) throw ConfigError("ridge penalty must be positive");
  Centered c = center(d);
  Eigen::MatrixXd a = c.x.transpose() * c.x;
  a.diagonal().array() += lambda2;
  Eigen::VectorXd w = a.ldlt().solve(c.x.transpose() * c.y);
  return make_weights(d, c, w);
}

double lambda_max(const Dataset& d) {
  Centered c = center(d);
  if (c.x.cols() == 0) return 0.0;
  return (c.x.transpose() * c.y).cwiseAbs().maxCoeff() / static_cast<double>(c.x.rows());
}

double lasso_objective(const Dataset& d, const WeightVector& w, double lambda) {
  Centered c = center(d);
  Eigen::Map<const Eigen::VectorXd> wv(w.weights.data(), static_cast<Eigen::Index>(w.weights.size()));
  const double n = static_cast<double>(c.x.rows());
  return (c.y - c.x * wv).squaredNorm() / (2.0 * n) + lambda * wv.lpNorm<1>();
}

LassoFit lasso_fit(const Dataset& d, double lambda, const LassoOptions& options) {
  if (!(lambda >= 0.0)) throw ConfigError("LASSO penalty must be non-negative");
  Centered c = center(d);
  const Eigen::Index n = c.x.rows(), p = c.x.cols();
  const double nd = static_cast<double>(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = c.y;
  Eigen::VectorXd sq(p);
  for (Eigen::Index j = 0; j < p; ++j) sq(j) = c.x.col(j).squaredNorm() / nd;

  auto objective = [&] { return r.squaredNorm() / (2.0 * nd) + lambda * w.lpNorm<1>(); };

  LassoFit fit;
  fit.lambda = lambda;
  fit.objective.push_back(objective());
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (sq(j) == 0.0) continue;
      const double rho = c.x.col(j).dot(r) / nd + w(j) * sq(j);
      const double updated = soft_threshold(rho, lambda) / sq(j);
      const double delta = updated - w(j);
      if (delta != 0.0) {
        r.noalias() -= delta * c.x.col(j);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    const double obj = objective();
    const double prev = fit.objective.back();
    if (obj > prev + 1e-12 * std::max(1.0, std::abs(prev)))
      throw NumericalError("LASSO objective increased across a sweep");
    fit.objective.push_back(obj);
    fit.sweeps = sweep;
    if (max_change < options.tolerance) {
      fit.w = make_weights(d, c, w);
      return fit;
    }
  }
  fit.w = make_weights(d, c, w);
  throw ConvergenceError("LASSO did not converge in " + std::to_string(options.max_sweeps) + " sweeps",
                         std::move(fit));
}

LassoFit lasso_fit(const Dataset& d, const PenaltySpec& penalty, const LassoOptions& options) {
  const double lambda = penalty.relative ? penalty.lambda * lambda_max(d) : penalty.lambda;
  return lasso_fit(d, lambda, options);
}

std::vector<double> RegularizationPath::coefficients_at(double lambda) const {
  const std::size_t p = names.size();
  if (lambdas.empty() || lambda >= lambdas.front()) return std::vector<double>(p, 0.0);
  for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
    const double hi = lambdas[k], lo = lambdas[k + 1];
    if (lambda <= hi && lambda >= lo) {
      if (hi == lo) return coefs[k + 1];
      const double t = (hi - lambda) / (hi - lo);
      std::vector<double> out(p);
      for (std::size_t j = 0; j < p; ++j) out[j] = coefs[k][j] + t * (coefs[k + 1][j] - coefs[k][j]);
      return out;
    }
  }
  return coefs.back();
}

RegularizationPath lars_path(const Dataset& d) {
  Centered c = center(d);
  const Eigen::Index n = c.x.rows(), p = c.x.cols();
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd gram = c.x.transpose() * c.x / nd;
  const Eigen::VectorXd xty = c.x.transpose() * c.y / nd;

  RegularizationPath path;
  path.names = d.names();

  std::vector<bool> eligible(static_cast<std::size_t>(p), true);
  Eigen::Index p_eff = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (gram(j, j) <= 0.0) {
      eligible[static_cast<std::size_t>(j)] = false;
      path.constant.push_back(static_cast<std::size_t>(j));
    } else {
      ++p_eff;
    }
  }
  const std::size_t max_active = static_cast<std::size_t>(std::min<Eigen::Index>(n - 1, p_eff));

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  std::vector<std::size_t> active;
  std::vector<bool> is_active(static_cast<std::size_t>(p), false);

  auto record = [&](double lambda) {
    path.lambdas.push_back(lambda);
    auto sorted = active;
    std::sort(sorted.begin(), sorted.end());
    path.active_sets.push_back(std::move(sorted));
    path.coefs.emplace_back(w.data(), w.data() + p);
    path.intercepts.push_back(c.y_mean - c.x_mean.dot(w));
  };

  // x_j lies (numerically) in the span of the active columns.
  auto in_active_span = [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (active.empty()) return false;
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      b(a) = gram(static_cast<Eigen::Index>(active[a]), jj);
      for (Eigen::Index e = 0; e < k; ++e)
        g(a, e) = gram(static_cast<Eigen::Index>(active[a]), static_cast<Eigen::Index>(active[e]));
    }
    const double schur = gram(jj, jj) - b.dot(g.ldlt().solve(b));
    return schur <= 1e-10 * gram(jj, jj);
  };

  Eigen::VectorXd corr = xty;
  double lambda = 0.0;
  for (Eigen::Index j = 0; j < p; ++j)
    if (eligible[static_cast<std::size_t>(j)]) lambda = std::max(lambda, std::abs(corr(j)));

  record(lambda);
  if (!(lambda > 0.0) || max_active == 0) {
    path.events.push_back(PathEvent::end);
    path.event_features.push_back(0);
    return path;
  }

  // First entry: largest |correlation|, lowest index on ties.
  std::size_t first = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (eligible[static_cast<std::size_t>(j)] && std::abs(corr(j)) == lambda) {
      first = static_cast<std::size_t>(j);
      break;
    }
  }
  // A column tied with the feature that just entered and lying in the
  // active span would tie with it forever; rule it out now.
  auto withhold_twins = [&]() {
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (!eligible[ju] || is_active[ju]) continue;
      if (std::abs(std::abs(corr(j)) - lambda) > 1e-9 * lambda) continue;
      if (!in_active_span(ju)) continue;
      eligible[ju] = false;
      path.withheld.push_back({path.size() - 1, ju});
    }
  };

  active.push_back(first);
  is_active[first] = true;
  path.events.push_back(PathEvent::enter);
  path.event_features.push_back(first);
  withhold_twins();

  std::ptrdiff_t just_dropped = -1;
  const std::size_t max_steps = 8 * static_cast<std::size_t>(p) + 16;
  for (std::size_t step = 0;; ++step) {
    if (step > max_steps) throw NumericalError("LARS path did not terminate");
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd g_aa(k, k);
    Eigen::VectorXd s(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = static_cast<Eigen::Index>(active[a]);
      s(a) = corr(ia) >= 0.0 ? 1.0 : -1.0;
      for (Eigen::Index e = 0; e < k; ++e) g_aa(a, e) = gram(ia, static_cast<Eigen::Index>(active[e]));
    }
    // Active weights move by gamma * dir while every active |corr| falls by gamma.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g_aa);
    const Eigen::VectorXd dir = ldlt.solve(s);
    if (!dir.allFinite()) throw NumericalError("LARS direction is not finite");
    Eigen::VectorXd a_vec = Eigen::VectorXd::Zero(p);
    for (Eigen::Index a = 0; a < k; ++a) a_vec += gram.col(static_cast<Eigen::Index>(active[a])) * dir(a);

    double gamma = lambda;
    PathEvent event = PathEvent::end;
    std::size_t event_feature = 0;

    if (active.size() < max_active) {
      for (Eigen::Index j = 0; j < p; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (!eligible[ju] || is_active[ju] || static_cast<std::ptrdiff_t>(ju) == just_dropped) continue;
        double best = std::numeric_limits<double>::infinity();
        for (double sign : {1.0, -1.0}) {
          const double denom = 1.0 - sign * a_vec(j);
          if (denom <= 1e-14) continue;
          double g = (lambda - sign * corr(j)) / denom;
          if (g < 0.0) g = 0.0;  // rounding on an exact tie
          best = std::min(best, g);
        }
        if (best < gamma) {
          gamma = best;
          event = PathEvent::enter;
          event_feature = ju;
        }
      }
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = static_cast<Eigen::Index>(active[a]);
      if (w(ia) == 0.0 || dir(a) == 0.0) continue;
      const double g = -w(ia) / dir(a);
      if (g > 0.0 && g < gamma) {
        gamma = g;
        event = PathEvent::drop;
        event_feature = active[a];
      }
    }

    if (event == PathEvent::enter && in_active_span(event_feature)) {
      // Keep the path as is and rule the collinear feature out for good.
      eligible[event_feature] = false;
      path.withheld.push_back({path.size() - 1, event_feature});
      continue;
    }

    for (Eigen::Index a = 0; a < k; ++a) w(static_cast<Eigen::Index>(active[a])) += gamma * dir(a);
    lambda = event == PathEvent::end ? 0.0 : std::max(0.0, lambda - gamma);
    corr = xty - gram * w;
    record(lambda);
    path.events.push_back(event);
    path.event_features.push_back(event_feature);
    just_dropped = -1;

    if (event == PathEvent::end) break;
    if (event == PathEvent::drop) {
      w(static_cast<Eigen::Index>(event_feature)) = 0.0;
      path.coefs.back()[event_feature] = 0.0;
      active.erase(std::find(active.begin(), active.end(), event_feature));
      is_active[event_feature] = false;
      just_dropped = static_cast<std::ptrdiff_t>(event_feature);
    } else {
      active.push_back(event_feature);
      is_active[event_feature] = true;
      withhold_twins();
    }
    if (active.empty()) throw NumericalError("LARS active set emptied");
  }
  return path;
}

void write_path_csv(const RegularizationPath& path, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write '" + file.string() + "'");
  out << "breakpoint,lambda,feature,coefficient\n";
  for (std::size_t k = 0; k < path.size(); ++k)
    for (std::size_t j = 0; j < path.names.size(); ++j)
      out << k << ',' << format_double(path.lambdas[k]) << ',' << path.names[j] << ','
          << format_double(path.coefs[k][j]) << '\n';
}

FeatureRanking rank_by_weights(const WeightVector& w, const std::string& method) {
  FeatureRanking r{method, {}};
  for (std::size_t j = 0; j < w.weights.size(); ++j) {
    RankedFeature e;
    e.name = w.names[j];
    e.column = j;
    e.score = std::abs(w.weights[j]);
    e.selected = w.weights[j] != 0.0;
    r.entries.push_back(std::move(e));
  }
  assign_ranks(r.entries);
  return r;
}

}  // namespace featsel
