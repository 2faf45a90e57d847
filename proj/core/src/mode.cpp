#include "steinpi/mode.hpp"

#include <cmath>
#include <sstream>

#include "steinpi/error.hpp"

namespace steinpi {

namespace {

// Smallest eigenvalue of -H, relative to its largest, below which the mode is
// treated as degenerate.
constexpr double kRelativeCurvatureFloor = 1e-12;

bool newton_direction(const Matrix& hess, const Vector& grad, Vector& direction) {
  Eigen::LLT<Matrix> llt(-hess);
  if (llt.info() != Eigen::Success) return false;
  direction = llt.solve(grad);
  return direction.allFinite() && direction.dot(grad) > 0.0;
}

}  // namespace

ModeInfo make_mode_info(Vector x_star, Matrix sigma_inv) {
  if (sigma_inv.rows() != x_star.size() || sigma_inv.cols() != x_star.size()) {
    throw DimensionMismatch("mode: precision shape does not match location");
  }
  sigma_inv = 0.5 * (sigma_inv + sigma_inv.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_inv, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > kRelativeCurvatureFloor * std::max(1.0, hi))) {
    std::ostringstream msg;
    msg << "mode: -Hessian at x* is not positive definite (min eigenvalue " << lo << ")";
    throw NotPositiveDefinite(msg.str());
  }
  Eigen::LLT<Matrix> llt(sigma_inv);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("mode: Cholesky factorisation of -Hessian failed");
  }
  ModeInfo info;
  info.x_star = std::move(x_star);
  info.chol_sigma_inv = llt.matrixL();
  info.sigma = llt.solve(Matrix::Identity(sigma_inv.rows(), sigma_inv.cols()));
  info.sigma = 0.5 * (info.sigma + info.sigma.transpose()).eval();
  info.sigma_inv = std::move(sigma_inv);
  return info;
}

ModeInfo find_mode(const TargetModel& target, const Vector& init, int max_iter,
                   double grad_tol) {
  if (!(grad_tol > 0.0)) throw InvalidArgument("find_mode: grad_tol must be positive");
  if (init.size() != target.dim()) throw DimensionMismatch("find_mode: init has wrong size");

  Vector x = init;
  Vector grad;
  double value = target.log_density_and_grad(x, grad);
  if (!std::isfinite(value) || !grad.allFinite()) {
    throw InvalidArgument("find_mode: log density or gradient not finite at init");
  }

  bool converged = grad.norm() <= grad_tol;
  for (int iter = 0; iter < max_iter && !converged; ++iter) {
    Vector direction;
    if (!newton_direction(target.hessian_log_density(x), grad, direction)) direction = grad;
    const double slope = grad.dot(direction);

    double step = 1.0;
    Vector candidate;
    Vector candidate_grad;
    double candidate_value = -std::numeric_limits<double>::infinity();
    while (step > 1e-20) {
      candidate = x + step * direction;
      candidate_value = target.log_density_and_grad(candidate, candidate_grad);
      if (std::isfinite(candidate_value) && candidate_value >= value + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!(step > 1e-20)) break;  // no ascent possible from here
    x = std::move(candidate);
    value = candidate_value;
    grad = std::move(candidate_grad);
    converged = grad.norm() <= grad_tol;
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "find_mode: gradient norm " << grad.norm() << " above tolerance " << grad_tol
        << " after " << max_iter << " iterations";
    throw NonConvergence(msg.str());
  }

  // Polish with pure Newton steps while they keep shrinking the gradient, so
  // that degenerate curvature is exposed rather than hidden by grad_tol.
  for (int iter = 0; iter < 200; ++iter) {
    Vector direction;
    if (!newton_direction(target.hessian_log_density(x), grad, direction)) break;
    if (direction.norm() <= 1e-15 * (1.0 + x.norm())) break;
    const Vector candidate = x + direction;
    Vector candidate_grad;
    const double candidate_value = target.log_density_and_grad(candidate, candidate_grad);
    if (!std::isfinite(candidate_value) || !(candidate_grad.norm() < grad.norm())) break;
    x = candidate;
    grad = std::move(candidate_grad);
  }

  return make_mode_info(x, -target.hessian_log_density(x));
}

}  // namespace steinpi
