#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wespad/common.hpp"

namespace wespad {

// Sparse feature vector: entries sorted by index, zero values never stored.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t dim = 0;

  void set(std::uint32_t index, double value);
  double get(std::uint32_t index) const;
  std::size_t nnz() const { return entries.size(); }

  bool operator==(const SparseVector&) const = default;
};

SparseVector to_sparse(std::span<const double> dense);

struct LogregConfig {
  double l2 = 1.0;
  int max_iter = 200;
  double tol = 1e-6;        // stop when the gradient 2-norm falls below this
  std::uint64_t seed = 0;   // unused (training is deterministic); kept for API symmetry
};

// L2-regularized binary logistic regression. Bias is regularized along with
// the weights, so single-class data yields a finite, shrunken-toward-zero
// optimum instead of diverging.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 1.0;
  int iterations = 0;
  double final_objective = 0.0;
  std::vector<double> objective_history;  // objective after each accepted step

  std::size_t dim() const { return weights.size(); }
};

// Objective: sum_i log(1 + exp(-y~_i (w.x_i + b))) + l2/2 (|w|^2 + b^2),
// y~ in {-1,+1}. Minimized with L-BFGS plus Armijo backtracking, so the
// recorded objective history is non-increasing. Deterministic (starts at 0).
// labels[i] in {0, 1}; throws FitError on empty data or non-finite features.
LinearModel train_logreg(std::span<const SparseVector> rows, std::span<const int> labels,
                         std::uint32_t dim, const LogregConfig& config = {});

LinearModel train_logreg_dense(std::span<const std::vector<double>> rows,
                               std::span<const int> labels, const LogregConfig& config = {});

// sigmoid(w.x + b), clamped into the open interval (0, 1).
double predict_proba(const LinearModel& model, const SparseVector& x);
double predict_proba(const LinearModel& model, std::span<const double> x);

// Exposed for gradient checking: objective value and analytic gradient at
// (weights, bias) for the training objective above.
double logreg_objective(std::span<const SparseVector> rows, std::span<const int> labels,
                        std::span<const double> weights, double bias, double l2);
void logreg_gradient(std::span<const SparseVector> rows, std::span<const int> labels,
                     std::span<const double> weights, double bias, double l2,
                     std::span<double> grad_weights, double& grad_bias);

double sigmoid(double z);

// K-means partition of a set of dense vectors.
struct PartitionModel {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> centroids;
  double wcss = 0.0;
  int iterations = 0;
  std::vector<double> wcss_history;  // per-Lloyd-iteration, winning restart

  std::size_t dim() const { return centroids.empty() ? 0 : centroids[0].size(); }
};

// Lloyd iterations from k-means++ seeding; best of `restarts` runs by
// within-cluster sum of squares; empty clusters are re-seeded to the point
// farthest from its assigned centroid. Deterministic per seed.
// Throws FitError when points.size() < k or k < 1.
PartitionModel kmeans_fit(std::span<const std::vector<double>> points, int k, std::uint64_t seed,
                          int restarts = 5, int max_iter = 100, double rel_tol = 1e-6);

// Index of the nearest centroid by Euclidean distance; ties break to the
// lowest index. Throws FitError on dimension mismatch.
int kmeans_assign(const PartitionModel& model, std::span<const double> x);

}  // namespace wespad
