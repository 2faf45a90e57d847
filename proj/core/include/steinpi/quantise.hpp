#pragma once

#include <cstddef>
#include <vector>

#include "steinpi/stein_kernel.hpp"

namespace steinpi {

// Discrete measure sum_i w_i delta(x_i); rows of `points` are the atoms.
struct WeightedSample {
  Matrix points;
  Vector weights;

  static WeightedSample uniform(Matrix points);
  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

  // Throws InvalidSimplex or DimensionMismatch.
  void validate(double tol = 1e-10) const;
};

struct QPOptions {
  double tol = 1e-8;
  std::size_t max_iter = 0;         // 0 means 50 n
  Eigen::Index max_points = 20000;  // Gram guard
  int threads = 1;
};

struct QPResult {
  Vector weights;
  double objective = 0.0;     // w^T K w - 2 z^T w
  double kkt_residual = 0.0;
  double gap = 0.0;           // final duality gap h^T w - min_i h_i, h = K w - z
  std::size_t iterations = 0;
  bool converged = false;     // false means the gap test failed; weights are the last iterate
};

// sqrt(w^T K w) with compensated summation.
double ksd(const WeightedSample& sample, const Kernel& kernel, int threads = 1);
double ksd_from_gram(const Matrix& gram, const Vector& weights);

// min_w w^T K w - 2 z^T w over the probability simplex. Primal active-set
// method in the style of Wolfe's minimum-norm-point algorithm: the working set
// stays affinely independent, so rank-deficient Gram matrices are fine. Stops
// once the duality gap falls below tol * max(|K w|_inf, |z|_inf). max_iter
// bounds the number of inner steps.
QPResult solve_simplex_qp(const Matrix& gram, const Vector& z, const QPOptions& options = {});

// Stein kernels have zero mean embedding, so z = 0.
QPResult optimal_weights(const Matrix& points, const Kernel& kernel, const QPOptions& options = {});

// With h = K w - z and lambda = h^T w: the largest of |h_i - lambda| over
// w_i > 1e-8 and lambda - h_i over the rest, divided by max(|K w|_inf, tiny).
double kkt_residual(const Matrix& gram, const Vector& z, const Vector& weights);

struct ThinResult {
  std::vector<Eigen::Index> indices;  // in selection order; may repeat
  WeightedSample sample;              // selected points, weights 1/m
};

// Greedy Stein thinning: step i picks the candidate minimising
//   k(y)/2 + sum_{j<i} k(y, y_j)
// with strict comparison, so ties go to the lowest index.
ThinResult greedy_thin(const Matrix& points, const Kernel& kernel, std::size_t m, int threads = 1);

// Self-normalised importance weights for points drawn from Pi, proportional
// to 1/sqrt(k(x_i)).
WeightedSample snis_weights(const Matrix& points, const Kernel& kernel);

}  // namespace steinpi
