#include "steinpi/quantise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "steinpi/error.hpp"
#include "steinpi/parallel.hpp"

namespace steinpi {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      c_ += (sum_ - t) + v;
    } else {
      c_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

std::vector<Eigen::Index> support_of(const Vector& w) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) s.push_back(i);
  }
  return s;
}

}  // namespace

WeightedSample WeightedSample::uniform(Matrix points) {
  WeightedSample s;
  const Eigen::Index n = points.rows();
  if (n == 0) throw InvalidArgument("weighted sample: no points");
  s.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  s.points = std::move(points);
  return s;
}

void WeightedSample::validate(double tol) const {
  if (points.rows() != weights.size()) {
    throw DimensionMismatch("weighted sample: " + std::to_string(points.rows()) + " points but " +
                            std::to_string(weights.size()) + " weights");
  }
  if (weights.size() == 0) throw InvalidSimplex("weighted sample: empty");
  if (!points.allFinite()) throw InvalidArgument("weighted sample: non-finite point");
  if (!weights.allFinite() || weights.minCoeff() < 0.0) {
    throw InvalidSimplex("weighted sample: weights must be finite and non-negative");
  }
  if (std::abs(weights.sum() - 1.0) > tol) {
    throw InvalidSimplex("weighted sample: weights do not sum to one");
  }
}

double ksd_from_gram(const Matrix& gram, const Vector& weights) {
  const Eigen::Index n = weights.size();
  if (gram.rows() != n || gram.cols() != n) {
    throw DimensionMismatch("ksd: Gram matrix does not match weights");
  }
  CompensatedSum q;
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights[i] == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (weights[j] == 0.0) continue;
      q.add(weights[i] * weights[j] * gram(i, j));
      max_abs = std::max(max_abs, std::abs(gram(i, j)));
    }
  }
  const double value = q.value();
  if (value < 0.0) {
    if (value < -1e-10 * max_abs) {
      throw NegativeQuadraticForm("ksd: w^T K w = " + std::to_string(value) +
                                  " is negative beyond rounding; the kernel is not PSD");
    }
    return 0.0;
  }
  return std::sqrt(value);
}

double ksd(const WeightedSample& sample, const Kernel& kernel, int threads) {
  sample.validate();
  if (sample.dim() != kernel.dim()) throw DimensionMismatch("ksd: sample and kernel dimensions differ");
  // Zero-weight atoms contribute nothing, so only the support is bound.
  const std::vector<Eigen::Index> support = support_of(sample.weights);
  const auto n = static_cast<Eigen::Index>(support.size());
  Matrix points(n, sample.dim());
  Vector w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    points.row(k) = sample.points.row(support[static_cast<std::size_t>(k)]);
    w[k] = sample.weights[support[static_cast<std::size_t>(k)]];
  }
  // Rows are streamed so memory stays linear in n; each row owns its partial sum.
  const auto bound = kernel.bind(points, threads);
  Vector row_sum(n);
  Vector row_max(n);
  parallel_for(n, threads, [&](Eigen::Index i) {
    CompensatedSum acc;
    double diag = bound->eval(i, i);
    double m = std::abs(diag);
    acc.add(0.5 * w[i] * diag);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double kij = bound->eval(i, j);
      acc.add(w[j] * kij);
      m = std::max(m, std::abs(kij));
    }
    row_sum[i] = 2.0 * w[i] * acc.value();
    row_max[i] = m;
  });
  CompensatedSum q;
  for (Eigen::Index i = 0; i < n; ++i) q.add(row_sum[i]);
  const double value = q.value();
  const double max_abs = n > 0 ? row_max.maxCoeff() : 0.0;
  if (value < 0.0) {
    if (value < -1e-10 * max_abs) {
      throw NegativeQuadraticForm("ksd: w^T K w = " + std::to_string(value) +
                                  " is negative beyond rounding; the kernel is not PSD");
    }
    return 0.0;
  }
  return std::sqrt(value);
}

double kkt_residual(const Matrix& gram, const Vector& z, const Vector& weights) {
  const Vector kw = gram * weights;
  const Vector h = kw - z;
  const double lambda = h.dot(weights);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double v = weights[i] > 1e-8 ? std::abs(h[i] - lambda) : std::max(0.0, lambda - h[i]);
    worst = std::max(worst, v);
  }
  const double scale = kw.cwiseAbs().maxCoeff();
  return worst / std::max(scale, std::numeric_limits<double>::min());
}

namespace {

// Upper-triangular R with R^T R = K_SS + 1 1^T for the working set S. The
// matrix is positive definite exactly when the points of S are affinely
// independent in feature space, which the active-set iteration maintains.
class WorkingSet {
 public:
  explicit WorkingSet(const Matrix& gram) : gram_(gram) {}

  const std::vector<Eigen::Index>& indices() const { return s_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(s_.size()); }

  // False if j is numerically in the affine hull of S.
  bool add(Eigen::Index j) {
    const Eigen::Index m = size();
    Vector c(m);
    for (Eigen::Index a = 0; a < m; ++a) c[a] = gram_(s_[a], j) + 1.0;
    const double d = gram_(j, j) + 1.0;
    Vector r = c;
    if (m > 0) r = r_.topLeftCorner(m, m).transpose().triangularView<Eigen::Lower>().solve(c);
    const double rho2 = d - r.squaredNorm();
    if (!(rho2 > 1e-13 * d)) return false;
    if (m + 1 > r_.rows()) {
      Matrix grown = Matrix::Zero(2 * (m + 1), 2 * (m + 1));
      grown.topLeftCorner(m, m) = r_.topLeftCorner(m, m);
      r_.swap(grown);
    }
    r_.col(m).head(m) = r;
    r_.row(m).head(m).setZero();
    r_(m, m) = std::sqrt(rho2);
    s_.push_back(j);
    return true;
  }

  // Deletes position k and restores the triangular shape with Givens rotations.
  void remove(Eigen::Index k) {
    const Eigen::Index m = size();
    for (Eigen::Index c = k; c + 1 < m; ++c) r_.col(c).head(m) = r_.col(c + 1).head(m);
    for (Eigen::Index c = k; c + 1 < m; ++c) {
      Eigen::JacobiRotation<double> g;
      g.makeGivens(r_(c, c), r_(c + 1, c));
      r_.block(0, c, m, m - 1 - c).applyOnTheLeft(c, c + 1, g.adjoint());
      r_(c + 1, c) = 0.0;
    }
    r_.row(m - 1).head(m).setZero();
    s_.erase(s_.begin() + k);
  }

  // Minimiser of w^T K w - 2 z^T w over the affine hull of S.
  Vector affine_minimiser(const Vector& z) const {
    const Eigen::Index m = size();
    Vector ones = Vector::Ones(m);
    Vector zs(m);
    for (Eigen::Index a = 0; a < m; ++a) zs[a] = z[s_[a]];
    const auto rm = r_.topLeftCorner(m, m);
    const auto solve = [&](Vector v) {
      rm.transpose().triangularView<Eigen::Lower>().solveInPlace(v);
      rm.triangularView<Eigen::Upper>().solveInPlace(v);
      return v;
    };
    const Vector u = solve(ones);
    const Vector v = solve(zs);
    return v + ((1.0 - v.sum()) / u.sum()) * u;
  }

 private:
  const Matrix& gram_;
  std::vector<Eigen::Index> s_;
  Matrix r_;  // capacity grows geometrically; only the leading size() block is live
};

}  // namespace

QPResult solve_simplex_qp(const Matrix& gram, const Vector& z, const QPOptions& options) {
  const Eigen::Index n = gram.rows();
  if (n == 0) throw InvalidArgument("simplex qp: empty problem");
  if (gram.cols() != n || z.size() != n) throw DimensionMismatch("simplex qp: size mismatch");
  if (!gram.allFinite() || !z.allFinite()) throw InvalidArgument("simplex qp: non-finite input");
  if (!(options.tol > 0.0)) throw InvalidArgument("simplex qp: tol must be positive");
  const std::size_t max_iter = options.max_iter > 0 ? options.max_iter : 50 * static_cast<std::size_t>(n);

  // Start from the best vertex.
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (gram(i, i) - 2.0 * z[i] < gram(start, start) - 2.0 * z[start]) start = i;
  }
  WorkingSet ws(gram);
  ws.add(start);
  Vector ws_weights = Vector::Ones(1);  // weights of the working set, in its order

  const auto expand = [&] {
    Vector w = Vector::Zero(n);
    for (Eigen::Index a = 0; a < ws.size(); ++a) w[ws.indices()[a]] = ws_weights[a];
    return w;
  };

  QPResult result;
  std::size_t it = 0;
  Eigen::Index last_added = -1;
  for (;;) {
    const Vector w = expand();
    Vector kw = Vector::Zero(n);
    for (Eigen::Index a = 0; a < ws.size(); ++a) kw += ws_weights[a] * gram.col(ws.indices()[a]);
    const Vector h = kw - z;
    const double lambda = h.dot(w);
    Eigen::Index j = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (h[i] < h[j]) j = i;
    }
    result.gap = lambda - h[j];
    const double scale = std::max({kw.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff(),
                                   std::numeric_limits<double>::min()});
    if (result.gap <= options.tol * scale) {
      result.converged = true;
      break;
    }
    if (it >= max_iter) break;
    // A point that cannot be added without losing affine independence means the
    // remaining gap is rounding error.
    if (j == last_added || !ws.add(j)) {
      result.converged = result.gap <= std::sqrt(options.tol) * scale;
      break;
    }
    last_added = j;
    ws_weights.conservativeResize(ws.size());
    ws_weights[ws.size() - 1] = 0.0;

    // Move towards the affine minimiser, dropping points whose weight hits zero.
    for (;;) {
      ++it;
      const Vector target = ws.affine_minimiser(z);
      if ((target.array() > 0.0).all()) {
        ws_weights = target;
        break;
      }
      double t = 1.0;
      for (Eigen::Index a = 0; a < ws.size(); ++a) {
        if (target[a] <= 0.0) t = std::min(t, ws_weights[a] / (ws_weights[a] - target[a]));
      }
      ws_weights += t * (target - ws_weights);
      Eigen::Index drop = 0;
      for (Eigen::Index a = 1; a < ws.size(); ++a) {
        if (ws_weights[a] < ws_weights[drop]) drop = a;
      }
      for (Eigen::Index a = ws.size() - 1; a >= 0; --a) {
        if (a == drop || ws_weights[a] <= 0.0) {
          ws.remove(a);
          for (Eigen::Index b = a; b + 1 < ws_weights.size(); ++b) ws_weights[b] = ws_weights[b + 1];
          ws_weights.conservativeResize(ws_weights.size() - 1);
        }
      }
      ws_weights /= ws_weights.sum();
      if (ws.size() == 1) break;
    }
  }

  Vector w = expand().cwiseMax(0.0);
  w /= w.sum();
  const Vector final_kw = gram * w;
  result.weights = w;
  result.objective = w.dot(final_kw) - 2.0 * z.dot(w);
  result.kkt_residual = kkt_residual(gram, z, w);
  result.iterations = it;
  return result;
}

QPResult optimal_weights(const Matrix& points, const Kernel& kernel, const QPOptions& options) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw InvalidArgument("optimal_weights: no points");
  if (points.cols() != kernel.dim()) throw DimensionMismatch("optimal_weights: wrong dimension");
  if (n > options.max_points) {
    throw GramTooLarge("optimal_weights: " + std::to_string(n) + " points exceeds the limit of " +
                       std::to_string(options.max_points) + "; thin first");
  }
  const Matrix gram = kernel.gram(points, options.threads);
  return solve_simplex_qp(gram, Vector::Zero(n), options);
}

ThinResult greedy_thin(const Matrix& points, const Kernel& kernel, std::size_t m, int threads) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw InvalidArgument("greedy_thin: no candidates");
  if (m == 0) throw InvalidArgument("greedy_thin: m must be at least one");
  if (points.cols() != kernel.dim()) throw DimensionMismatch("greedy_thin: wrong dimension");

  const auto bound = kernel.bind(points, threads);
  Vector half_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) half_diag[i] = 0.5 * bound->diag_value(i);
  Vector running = Vector::Zero(n);  // sum over selected y_j of k(x_i, y_j)

  ThinResult out;
  out.indices.reserve(m);
  for (std::size_t step = 0; step < m; ++step) {
    Eigen::Index best = 0;
    double best_value = half_diag[0] + running[0];
    for (Eigen::Index i = 1; i < n; ++i) {
      const double v = half_diag[i] + running[i];
      if (v < best_value) {
        best = i;
        best_value = v;
      }
    }
    out.indices.push_back(best);
    if (step + 1 < m) {
      const Vector col = bound->column(best, threads);
      for (Eigen::Index i = 0; i < n; ++i) running[i] += col[i];
    }
  }

  Matrix selected(static_cast<Eigen::Index>(m), points.cols());
  for (std::size_t k = 0; k < m; ++k) selected.row(static_cast<Eigen::Index>(k)) = points.row(out.indices[k]);
  out.sample = WeightedSample::uniform(std::move(selected));
  return out;
}

WeightedSample snis_weights(const Matrix& points, const Kernel& kernel) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw InvalidArgument("snis_weights: no points");
  if (points.cols() != kernel.dim()) throw DimensionMismatch("snis_weights: wrong dimension");
  WeightedSample out;
  out.points = points;
  out.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double k = kernel.diag_value(points.row(i).transpose());
    if (!(k > 0.0)) throw InvalidArgument("snis_weights: kernel diagonal must be positive");
    out.weights[i] = 1.0 / std::sqrt(k);
  }
  out.weights /= out.weights.sum();
  return out;
}

}  // namespace steinpi
