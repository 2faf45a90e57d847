#pragma once

#include "steinpi/targets.hpp"

namespace steinpi {

// Location x* and length-scale matrix Sigma of a target, with
// Sigma^{-1} = -Hessian of log p at x*.
struct ModeInfo {
  Vector x_star;
  Matrix sigma;
  Matrix sigma_inv;
  Matrix chol_sigma_inv;  // lower triangular, chol * chol^T = sigma_inv
};

// Builds a ModeInfo from a location and a precision matrix. Throws
// NotPositiveDefinite if sigma_inv is not (numerically) positive definite.
ModeInfo make_mode_info(Vector x_star, Matrix sigma_inv);

// Damped Newton ascent on log p with a backtracking line search. Iterates
// where -Hessian is not positive definite use the gradient direction instead.
// Converges to the local mode reached from `init`, not necessarily the global
// one.
//
// Throws NonConvergence if ||grad|| > grad_tol after max_iter iterations and
// NotPositiveDefinite if the curvature at the returned point is degenerate.
ModeInfo find_mode(const TargetModel& target, const Vector& init, int max_iter = 200,
                   double grad_tol = 1e-8);

}  // namespace steinpi
