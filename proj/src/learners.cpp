#include "wespad/learners.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace wespad {

void SparseVector::set(std::uint32_t index, double value) {
  if (index >= dim) throw std::out_of_range("SparseVector::set: index >= dim");
  auto it = std::lower_bound(entries.begin(), entries.end(), index,
                             [](const auto& e, std::uint32_t i) { return e.first < i; });
  if (it != entries.end() && it->first == index) {
    if (value == 0.0)
      entries.erase(it);
    else
      it->second = value;
  } else if (value != 0.0) {
    entries.insert(it, {index, value});
  }
}

double SparseVector::get(std::uint32_t index) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), index,
                             [](const auto& e, std::uint32_t i) { return e.first < i; });
  if (it != entries.end() && it->first == index) return it->second;
  return 0.0;
}

SparseVector to_sparse(std::span<const double> dense) {
  SparseVector v;
  v.dim = static_cast<std::uint32_t>(dense.size());
  for (std::uint32_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0) v.entries.emplace_back(i, dense[i]);
  return v;
}

double sigmoid(double z) {
  // Clamp keeps the output strictly inside (0, 1) in double precision.
  z = std::clamp(z, -30.0, 30.0);
  if (z >= 0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)), overflow-safe
double softplus(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double dot_sparse(const SparseVector& x, std::span<const double> w) {
  double z = 0;
  for (const auto& [i, v] : x.entries) z += w[i] * v;
  return z;
}

}  // namespace

double logreg_objective(std::span<const SparseVector> rows, std::span<const int> labels,
                        std::span<const double> weights, double bias, double l2) {
  double obj = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = dot_sparse(rows[i], weights) + bias;
    obj += labels[i] == 1 ? softplus(-z) : softplus(z);
  }
  double w2 = bias * bias;
  for (double w : weights) w2 += w * w;
  return obj + 0.5 * l2 * w2;
}

void logreg_gradient(std::span<const SparseVector> rows, std::span<const int> labels,
                     std::span<const double> weights, double bias, double l2,
                     std::span<double> grad_weights, double& grad_bias) {
  std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
  grad_bias = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = dot_sparse(rows[i], weights) + bias;
    const double r = sigmoid(z) - (labels[i] == 1 ? 1.0 : 0.0);
    for (const auto& [j, v] : rows[i].entries) grad_weights[j] += r * v;
    grad_bias += r;
  }
  for (std::size_t j = 0; j < weights.size(); ++j) grad_weights[j] += l2 * weights[j];
  grad_bias += l2 * bias;
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

LinearModel train_logreg(std::span<const SparseVector> rows, std::span<const int> labels,
                         std::uint32_t dim, const LogregConfig& config) {
  if (rows.empty()) throw FitError("train_logreg: empty dataset");
  if (rows.size() != labels.size()) throw FitError("train_logreg: rows/labels size mismatch");
  for (const auto& r : rows) {
    if (r.dim != dim) throw FitError("train_logreg: row dimension mismatch");
    for (const auto& [i, v] : r.entries) {
      if (i >= dim) throw FitError("train_logreg: feature index out of range");
      if (!std::isfinite(v)) throw FitError("train_logreg: non-finite feature value");
    }
  }
  for (int y : labels)
    if (y != 0 && y != 1) throw FitError("train_logreg: labels must be 0 or 1");

  // Parameters packed as [weights..., bias].
  const std::size_t n = static_cast<std::size_t>(dim) + 1;
  std::vector<double> theta(n, 0.0), grad(n, 0.0);

  auto objective = [&](std::span<const double> th) {
    return logreg_objective(rows, labels, th.subspan(0, dim), th[dim], config.l2);
  };
  auto gradient = [&](std::span<const double> th, std::span<double> g) {
    double gb = 0;
    logreg_gradient(rows, labels, th.subspan(0, dim), th[dim], config.l2, g.subspan(0, dim), gb);
    g[dim] = gb;
  };

  double obj = objective(theta);
  gradient(theta, grad);

  LinearModel model;
  model.l2 = config.l2;
  model.objective_history.push_back(obj);

  // L-BFGS two-loop recursion with Armijo backtracking.
  constexpr std::size_t kHistory = 10;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> direction(n), theta_new(n), grad_new(n), alpha_buf(kHistory);

  int iter = 0;
  for (; iter < config.max_iter; ++iter) {
    if (norm2(grad) <= config.tol) break;

    // direction = -H * grad
    std::copy(grad.begin(), grad.end(), direction.begin());
    const std::size_t m = s_hist.size();
    for (std::size_t h = m; h-- > 0;) {
      double a = 0;
      for (std::size_t j = 0; j < n; ++j) a += s_hist[h][j] * direction[j];
      a *= rho_hist[h];
      alpha_buf[h] = a;
      for (std::size_t j = 0; j < n; ++j) direction[j] -= a * y_hist[h][j];
    }
    if (m > 0) {
      double sy = 0, yy = 0;
      for (std::size_t j = 0; j < n; ++j) {
        sy += s_hist[m - 1][j] * y_hist[m - 1][j];
        yy += y_hist[m - 1][j] * y_hist[m - 1][j];
      }
      const double gamma = yy > 0 ? sy / yy : 1.0;
      for (auto& d : direction) d *= gamma;
    }
    for (std::size_t h = 0; h < m; ++h) {
      double b = 0;
      for (std::size_t j = 0; j < n; ++j) b += y_hist[h][j] * direction[j];
      b *= rho_hist[h];
      for (std::size_t j = 0; j < n; ++j) direction[j] += s_hist[h][j] * (alpha_buf[h] - b);
    }
    for (auto& d : direction) d = -d;

    double gd = 0;
    for (std::size_t j = 0; j < n; ++j) gd += grad[j] * direction[j];
    if (!(gd < 0)) {  // not a descent direction; fall back to steepest descent
      for (std::size_t j = 0; j < n; ++j) direction[j] = -grad[j];
      gd = 0;
      for (std::size_t j = 0; j < n; ++j) gd += grad[j] * direction[j];
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Backtracking line search (Armijo, c1 = 1e-4).
    double step = 1.0;
    double obj_new = obj;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n; ++j) theta_new[j] = theta[j] + step * direction[j];
      obj_new = objective(theta_new);
      if (obj_new <= obj + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further progress possible at double precision

    gradient(theta_new, grad_new);

    // Curvature update
    double sy = 0, ss = 0;
    std::vector<double> s(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = theta_new[j] - theta[j];
      y[j] = grad_new[j] - grad[j];
      sy += s[j] * y[j];
      ss += s[j] * s[j];
    }
    if (sy > 1e-12 * ss) {
      if (s_hist.size() == kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    theta.swap(theta_new);
    grad.swap(grad_new);
    obj = obj_new;
    model.objective_history.push_back(obj);
  }

  model.weights.assign(theta.begin(), theta.begin() + dim);
  model.bias = theta[dim];
  model.iterations = iter;
  model.final_objective = obj;
  return model;
}

LinearModel train_logreg_dense(std::span<const std::vector<double>> rows,
                               std::span<const int> labels, const LogregConfig& config) {
  std::vector<SparseVector> sparse;
  sparse.reserve(rows.size());
  const std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows[0].size());
  for (const auto& r : rows) {
    if (r.size() != dim) throw FitError("train_logreg_dense: inconsistent row dimension");
    sparse.push_back(to_sparse(r));
  }
  return train_logreg(sparse, labels, dim, config);
}

double predict_proba(const LinearModel& model, const SparseVector& x) {
  if (x.dim != model.dim())
    throw FitError("predict_proba: dimension mismatch (x.dim=" + std::to_string(x.dim) +
                   ", model.dim=" + std::to_string(model.dim()) + ")");
  return sigmoid(dot_sparse(x, model.weights) + model.bias);
}

double predict_proba(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw FitError("predict_proba: dimension mismatch");
  double z = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += model.weights[i] * x[i];
  return sigmoid(z);
}

namespace {

double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct LloydRun {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assign;
  double wcss = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<double> wcss_history;
};

LloydRun run_lloyd(std::span<const std::vector<double>> points, int k, Rng& rng, int max_iter,
                   double rel_tol) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  const auto uk = static_cast<std::size_t>(k);

  // k-means++ seeding
  std::vector<std::vector<double>> centroids;
  centroids.reserve(uk);
  centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  while (centroids.size() < uk) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = sqdist(points[i], centroids[0]);
      for (std::size_t c = 1; c < centroids.size(); ++c)
        best = std::min(best, sqdist(points[i], centroids[c]));
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total <= 0) {
      pick = rng.below(n);
    } else {
      const double target = rng.unit() * total;
      double acc = 0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(points[pick]);
  }

  LloydRun run;
  run.assign.assign(n, -1);
  std::vector<int> counts(uk);
  double prev_wcss = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // Assign
    bool changed = false;
    double wcss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sqdist(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sqdist(points[i], centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.assign[i] != best) {
        run.assign[i] = best;
        changed = true;
      }
      wcss += best_d;
    }
    run.wcss_history.push_back(wcss);
    const bool converged =
        !changed || (std::isfinite(prev_wcss) && prev_wcss - wcss <= rel_tol * std::max(prev_wcss, 1e-300));
    prev_wcss = wcss;
    if (converged) {
      ++iter;
      break;
    }

    // Update means
    for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = centroids[static_cast<std::size_t>(run.assign[i])];
      for (std::size_t j = 0; j < dim; ++j) c[j] += points[i][j];
      ++counts[static_cast<std::size_t>(run.assign[i])];
    }
    std::vector<int> empties;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        const double inv = 1.0 / counts[static_cast<std::size_t>(c)];
        for (auto& x : centroids[static_cast<std::size_t>(c)]) x *= inv;
      } else {
        empties.push_back(c);
      }
    }
    // Re-seed empty clusters to the points farthest from their centroids.
    if (!empties.empty()) {
      std::vector<std::size_t> taken;
      for (int c : empties) {
        std::size_t far_i = 0;
        double far_d = -1;
        for (std::size_t i = 0; i < n; ++i) {
          if (std::find(taken.begin(), taken.end(), i) != taken.end()) continue;
          const double d = sqdist(points[i], centroids[static_cast<std::size_t>(run.assign[i])]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        centroids[static_cast<std::size_t>(c)] = points[far_i];
        taken.push_back(far_i);
      }
      prev_wcss = std::numeric_limits<double>::infinity();  // counts as a restart point
    }
  }

  // Final exact WCSS under nearest-centroid assignment.
  double wcss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sqdist(points[i], centroids[0]);
    for (int c = 1; c < k; ++c) {
      const double d = sqdist(points[i], centroids[static_cast<std::size_t>(c)]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    run.assign[i] = best;
    wcss += best_d;
  }
  run.centroids = std::move(centroids);
  run.wcss = wcss;
  run.iterations = iter;
  return run;
}

}  // namespace

PartitionModel kmeans_fit(std::span<const std::vector<double>> points, int k, std::uint64_t seed,
                          int restarts, int max_iter, double rel_tol) {
  if (k < 1) throw FitError("kmeans_fit: k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k))
    throw FitError("kmeans_fit: fewer points (" + std::to_string(points.size()) + ") than k=" +
                   std::to_string(k));
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw FitError("kmeans_fit: inconsistent point dimension");
    for (double v : p)
      if (!std::isfinite(v)) throw FitError("kmeans_fit: non-finite point component");
  }
  if (restarts < 1) restarts = 1;

  LloydRun best;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    LloydRun run = run_lloyd(points, k, rng, max_iter, rel_tol);
    if (run.wcss < best.wcss) best = std::move(run);
  }

  PartitionModel model;
  model.k = k;
  model.seed = seed;
  model.centroids = std::move(best.centroids);
  model.wcss = best.wcss;
  model.iterations = best.iterations;
  model.wcss_history = std::move(best.wcss_history);
  return model;
}

int kmeans_assign(const PartitionModel& model, std::span<const double> x) {
  if (model.k < 1 || model.centroids.empty()) throw FitError("kmeans_assign: unfitted model");
  if (x.size() != model.dim()) throw FitError("kmeans_assign: dimension mismatch");
  int best = 0;
  double best_d = sqdist(x, model.centroids[0]);
  for (int c = 1; c < model.k; ++c) {
    const double d = sqdist(x, model.centroids[static_cast<std::size_t>(c)]);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace wespad
