#pragma once

#include <memory>
#include <optional>
#include <string>

#include "steinpi/mode.hpp"
#include "steinpi/targets.hpp"

namespace steinpi {

// k(x) := k(x, x) together with its gradient.
struct KernelDiagonal {
  double value = 0.0;
  Vector grad;
};

// A kernel restricted to a fixed point set. Per-point work (scores, shifts)
// is done once at bind time.
class BoundKernel {
 public:
  virtual ~BoundKernel() = default;
  virtual Eigen::Index size() const = 0;
  virtual double eval(Eigen::Index i, Eigen::Index j) const = 0;
  virtual double diag_value(Eigen::Index i) const = 0;

  // (k(x_0, x_j), ..., k(x_{n-1}, x_j)).
  Vector column(Eigen::Index j, int threads = 1) const;
};

// A symmetric positive semi-definite kernel whose diagonal is differentiable.
// Stein kernels are the production implementation; the interface also admits
// simple kernels used to probe the post-processing code.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double eval(const Vector& x, const Vector& y) const = 0;
  virtual KernelDiagonal diag(const Vector& x) const = 0;
  virtual double diag_value(const Vector& x) const { return diag(x).value; }

  // K_ij = k(x_i, x_j) over the rows of `points`. Assembled upper-triangle
  // first and mirrored, so the result is exactly symmetric.
  virtual Matrix gram(const Matrix& points, int threads = 1) const;

  // k(points_i, y) for every row i.
  virtual Vector cross(const Matrix& points, const Vector& y) const;

  // Values from the bound kernel equal eval() and diag_value() bitwise.
  virtual std::unique_ptr<BoundKernel> bind(const Matrix& points, int threads = 1) const;
};

using KernelPtr = std::shared_ptr<const Kernel>;

enum class KernelFamily { kLangevin, kKgm };

struct KernelSpec {
  KernelFamily family = KernelFamily::kLangevin;
  int order = 1;  // s; fixed to 1 for Langevin
  double beta = 0.5;

  static KernelSpec langevin(double beta = 0.5) { return {KernelFamily::kLangevin, 1, beta}; }
  static KernelSpec kgm(int order, double beta = 0.5) { return {KernelFamily::kKgm, order, beta}; }
};

std::string to_string(const KernelSpec& spec);

// Base kernel kappa(x, y) and the derivatives needed to build k_P.
struct BaseKernelValue {
  double value = 0.0;
  Vector grad_x;
  Vector grad_y;
  double div_xy = 0.0;  // sum_i d^2 kappa / dx_i dy_i
};

// Langevin-Stein kernel (inverse multi-quadric base, identity diffusion) and
// the order-s KGM-Stein kernel (IMQ plus normalised linear base, diffusion
// (1 + ||x - x*||_Sigma^2)^((s-1)/2) I).
//
// With c(x, y) = m(x) m(y) kappa(x, y) and m(x) = (1 + ||x - x*||_Sigma^2)^((s-1)/2):
//   k_P(x, y) = div_x div_y c + grad_x c . s(y) + grad_y c . s(x) + c s(x).s(y)
// where s = grad log p. The diagonal and its gradient use the closed forms
// for c(x, x) and its derivatives rather than the off-diagonal expression.
class SteinKernel final : public Kernel {
 public:
  SteinKernel(TargetPtr target, ModeInfo mode, KernelSpec spec);

  Eigen::Index dim() const override { return mode_.x_star.size(); }
  double eval(const Vector& x, const Vector& y) const override;
  KernelDiagonal diag(const Vector& x) const override;
  double diag_value(const Vector& x) const override;
  Matrix gram(const Matrix& points, int threads = 1) const override;
  Vector cross(const Matrix& points, const Vector& y) const override;
  std::unique_ptr<BoundKernel> bind(const Matrix& points, int threads = 1) const override;

  BaseKernelValue base_kappa(const Vector& x, const Vector& y) const;

  const KernelSpec& spec() const { return spec_; }
  const ModeInfo& mode() const { return mode_; }
  const TargetModel& target() const { return *target_; }
  const TargetPtr& target_ptr() const { return target_; }
  int order() const { return spec_.order; }
  double beta() const { return spec_.beta; }

  // Analytic lower bound on inf_x k_P(x) for the Langevin family,
  // 2 beta tr(Sigma^{-1}); empty for KGM.
  std::optional<double> analytic_diagonal_lower_bound() const;

 private:
  class Bound;

  struct Point {
    Vector x;
    Vector score;   // grad log p(x)
    Vector shift;   // Sigma^{-1} (x - x*)
    double weight;  // 1 + ||x - x*||_Sigma^2
  };

  Point prepare(const Vector& x) const;
  double eval_prepared(const Point& a, const Point& b) const;
  BaseKernelValue kappa_prepared(const Point& a, const Point& b) const;

  TargetPtr target_;
  ModeInfo mode_;
  KernelSpec spec_;
  double trace_sigma_inv_ = 0.0;
};

std::shared_ptr<const SteinKernel> make_stein_kernel(TargetPtr target, ModeInfo mode,
                                                     KernelSpec spec);

// Numerical probe of the conditions under which post-processed MALA output is
// consistent: inf k_P = C1^2 > 0, -Hess log p >= b1 I far out, and
// Hess k_P <= b2 I with b2 < 2 b1 C1^2. Sampling based; advisory only.
struct AssumptionReport {
  bool within_scope = true;       // false for KGM with s >= 2
  std::string scope_note;
  double c1_squared = 0.0;        // lower bound on inf k_P
  bool c1_analytic = false;       // closed form (Langevin) or grid minoration
  double b1 = 0.0;                // min eigenvalue of -Hess log p on the shell
  double b2 = 0.0;                // max eigenvalue of Hess k_P on the shell
  bool diagonal_bounded = false;
  bool curvature_bounded = false;
  bool hessian_condition = false;          // b2 < 2 b1 C1^2
  std::string inequality;         // the computed inequality, verbatim
  std::optional<double> b1_radius;  // smallest ||x|| beyond which min-eig >= b1_target

  std::string to_string() const;
};

struct AssumptionProbe {
  double radius = 10.0;
  int count = 64;
  std::optional<double> b1_target;
  std::uint64_t seed = 1;
};

AssumptionReport check_consistency_assumptions(const SteinKernel& kernel,
                                           const AssumptionProbe& probe);

}  // namespace steinpi
