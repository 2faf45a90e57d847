#include "steinpi/stein_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "steinpi/error.hpp"
#include "steinpi/parallel.hpp"

namespace steinpi {

Matrix Kernel::gram(const Matrix& points, int threads) const {
  const Eigen::Index n = points.rows();
  Matrix k(n, n);
  parallel_for(n, threads, [&](Eigen::Index i) {
    const Vector xi = points.row(i).transpose();
    for (Eigen::Index j = i; j < n; ++j) k(i, j) = eval(xi, points.row(j).transpose());
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i);
  }
  return k;
}

Vector Kernel::cross(const Matrix& points, const Vector& y) const {
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = eval(points.row(i).transpose(), y);
  return out;
}

Vector BoundKernel::column(Eigen::Index j, int threads) const {
  Vector out(size());
  parallel_for(size(), threads, [&](Eigen::Index i) { out[i] = eval(i, j); });
  return out;
}

namespace {

class GenericBound final : public BoundKernel {
 public:
  GenericBound(const Kernel& kernel, const Matrix& points) : kernel_(kernel), points_(points) {}
  Eigen::Index size() const override { return points_.rows(); }
  double eval(Eigen::Index i, Eigen::Index j) const override {
    return kernel_.eval(points_.row(i).transpose(), points_.row(j).transpose());
  }
  double diag_value(Eigen::Index i) const override {
    return kernel_.diag_value(points_.row(i).transpose());
  }

 private:
  const Kernel& kernel_;
  Matrix points_;
};

}  // namespace

std::unique_ptr<BoundKernel> Kernel::bind(const Matrix& points, int) const {
  return std::make_unique<GenericBound>(*this, points);
}

std::string to_string(const KernelSpec& spec) {
  std::ostringstream out;
  if (spec.family == KernelFamily::kLangevin) {
    out << "langevin";
  } else {
    out << "kgm" << spec.order;
  }
  if (spec.beta != 0.5) out << "(beta=" << spec.beta << ")";
  return out.str();
}

SteinKernel::SteinKernel(TargetPtr target, ModeInfo mode, KernelSpec spec)
    : target_(std::move(target)), mode_(std::move(mode)), spec_(spec) {
  if (!target_) throw InvalidArgument("stein kernel: null target");
  if (target_->dim() != mode_.x_star.size()) {
    throw DimensionMismatch("stein kernel: mode dimension differs from target");
  }
  if (!(spec_.beta > 0.0 && spec_.beta < 1.0)) {
    throw InvalidArgument("stein kernel: beta must lie in (0, 1)");
  }
  if (spec_.family == KernelFamily::kLangevin) {
    spec_.order = 1;
  } else if (spec_.order < 1) {
    throw InvalidArgument("stein kernel: KGM order must be a positive integer");
  }
  trace_sigma_inv_ = mode_.sigma_inv.trace();
}

std::shared_ptr<const SteinKernel> make_stein_kernel(TargetPtr target, ModeInfo mode,
                                                     KernelSpec spec) {
  return std::make_shared<SteinKernel>(std::move(target), std::move(mode), spec);
}

std::optional<double> SteinKernel::analytic_diagonal_lower_bound() const {
  if (spec_.family != KernelFamily::kLangevin) return std::nullopt;
  return 2.0 * spec_.beta * trace_sigma_inv_;
}

SteinKernel::Point SteinKernel::prepare(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("stein kernel: point has wrong dimension");
  Point p;
  p.x = x;
  p.score = target_->grad_log_density(x);
  const Vector dx = x - mode_.x_star;
  p.shift = mode_.sigma_inv * dx;
  p.weight = 1.0 + dx.dot(p.shift);
  return p;
}

BaseKernelValue SteinKernel::kappa_prepared(const Point& a, const Point& b) const {
  const double beta = spec_.beta;
  const Vector diff = a.x - b.x;
  const Vector adiff = a.shift - b.shift;  // Sigma^{-1} (x - y)
  const double q = 1.0 + diff.dot(adiff);

  BaseKernelValue k;
  const double q_beta = std::pow(q, -beta);
  k.value = q_beta;
  k.grad_x = (-2.0 * beta * q_beta / q) * adiff;
  k.grad_y = -k.grad_x;
  k.div_xy = -4.0 * beta * (beta + 1.0) * q_beta / (q * q) * adiff.squaredNorm() +
             2.0 * beta * trace_sigma_inv_ * q_beta / q;

  if (spec_.family == KernelFamily::kKgm) {
    const double s = spec_.order;
    const Vector dy = b.x - mode_.x_star;
    const double lin = 1.0 + dy.dot(a.shift);
    const double denom = std::pow(a.weight, 0.5 * s) * std::pow(b.weight, 0.5 * s);
    k.value += lin / denom;
    k.grad_x += (b.shift - (s * lin / a.weight) * a.shift) / denom;
    k.grad_y += (a.shift - (s * lin / b.weight) * b.shift) / denom;
    k.div_xy += (trace_sigma_inv_ - s * a.shift.squaredNorm() / a.weight -
                 s * b.shift.squaredNorm() / b.weight +
                 s * s * lin * a.shift.dot(b.shift) / (a.weight * b.weight)) /
                denom;
  }
  return k;
}

BaseKernelValue SteinKernel::base_kappa(const Vector& x, const Vector& y) const {
  return kappa_prepared(prepare(x), prepare(y));
}

namespace {

bool lexicographically_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

double SteinKernel::eval_prepared(const Point& first, const Point& second) const {
  // Evaluate in a canonical argument order so that k(x, y) == k(y, x) bitwise.
  const bool swap = lexicographically_less(second.x, first.x);
  const Point& a = swap ? second : first;
  const Point& b = swap ? first : second;

  // Same algebra as kappa_prepared, but only the projections of the base
  // gradients onto the scores and shifts are formed, so nothing is allocated.
  const double beta = spec_.beta;
  const auto adiff = a.shift - b.shift;
  const double q = 1.0 + (a.x - b.x).dot(adiff);
  const double q_beta = std::pow(q, -beta);
  const double g1 = -2.0 * beta * q_beta / q;  // grad_x kappa = g1 * adiff = -grad_y kappa
  double value = q_beta;
  double div = -4.0 * beta * (beta + 1.0) * q_beta / (q * q) * adiff.squaredNorm() +
               2.0 * beta * trace_sigma_inv_ * q_beta / q;
  double gx_score = g1 * adiff.dot(b.score);  // grad_x kappa . score(b)
  double gy_score = -g1 * adiff.dot(a.score);
  double gx_shift = g1 * adiff.dot(b.shift);
  double gy_shift = -g1 * adiff.dot(a.shift);

  const double ab_shift = a.shift.dot(b.shift);
  if (spec_.family == KernelFamily::kKgm) {
    const double s = spec_.order;
    const double lin = 1.0 + (b.x - mode_.x_star).dot(a.shift);
    const double denom = std::pow(a.weight, 0.5 * s) * std::pow(b.weight, 0.5 * s);
    const double ta = s * lin / a.weight;
    const double tb = s * lin / b.weight;
    const double aa = a.shift.squaredNorm();
    const double bb = b.shift.squaredNorm();
    value += lin / denom;
    gx_score += (b.shift.dot(b.score) - ta * a.shift.dot(b.score)) / denom;
    gy_score += (a.shift.dot(a.score) - tb * b.shift.dot(a.score)) / denom;
    gx_shift += (bb - ta * ab_shift) / denom;
    gy_shift += (aa - tb * ab_shift) / denom;
    div += (trace_sigma_inv_ - s * aa / a.weight - s * bb / b.weight +
            s * s * lin * ab_shift / (a.weight * b.weight)) /
           denom;
  }

  const double s1 = spec_.order - 1.0;
  if (s1 != 0.0) {
    const double prefactor = std::pow(a.weight, 0.5 * s1) * std::pow(b.weight, 0.5 * s1);
    div = prefactor * (s1 * s1 * value * ab_shift / (a.weight * b.weight) + s1 * gx_shift / b.weight +
                       s1 * gy_shift / a.weight + div);
    gx_score = prefactor * ((s1 * value / a.weight) * a.shift.dot(b.score) + gx_score);
    gy_score = prefactor * ((s1 * value / b.weight) * b.shift.dot(a.score) + gy_score);
    value *= prefactor;
  }
  return div + gx_score + gy_score + value * a.score.dot(b.score);
}

double SteinKernel::eval(const Vector& x, const Vector& y) const {
  return eval_prepared(prepare(x), prepare(y));
}

double SteinKernel::diag_value(const Vector& x) const {
  if (spec_.family == KernelFamily::kLangevin) {
    const Vector score = target_->grad_log_density(x);
    return 2.0 * spec_.beta * trace_sigma_inv_ + score.squaredNorm();
  }
  return diag(x).value;
}

KernelDiagonal SteinKernel::diag(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("stein kernel: point has wrong dimension");
  const Vector score = target_->grad_log_density(x);
  const Matrix hess = target_->hessian_log_density(x);
  const double beta = spec_.beta;
  const double tr = trace_sigma_inv_;

  KernelDiagonal out;
  if (spec_.family == KernelFamily::kLangevin) {
    // c0 = 1, c1 = 0, c2 = 2 beta tr(Sigma^{-1}); all gradients vanish.
    out.value = 2.0 * beta * tr + score.squaredNorm();
    out.grad = 2.0 * (hess * score);
    return out;
  }

  const double s = spec_.order;
  const Vector dx = x - mode_.x_star;
  const Vector a = mode_.sigma_inv * dx;     // Sigma^{-1} (x - x*)
  const Vector aa = mode_.sigma_inv * a;     // Sigma^{-2} (x - x*)
  const double u = 1.0 + dx.dot(a);
  const double a2 = a.squaredNorm();         // (x - x*)^T Sigma^{-2} (x - x*)

  const double c0 = 1.0 + std::pow(u, s - 1.0);
  const Vector c1 = ((s - 1.0) * std::pow(u, s - 2.0)) * a;
  const double c2 = ((s - 1.0) * (s - 1.0) * std::pow(u, s - 1.0) - 1.0) * a2 / (u * u) +
                    tr * (1.0 + 2.0 * beta * std::pow(u, s)) / u;

  const Vector grad_c0 = (2.0 * (s - 1.0) * std::pow(u, s - 2.0)) * a;
  const Matrix grad_c1 =
      (2.0 * (s - 1.0) * (s - 2.0) * std::pow(u, s - 3.0)) * (a * a.transpose()) +
      ((s - 1.0) * std::pow(u, s - 2.0)) * mode_.sigma_inv;
  const Vector grad_c2 =
      (2.0 * (s - 1.0) * (s - 1.0) * (s - 3.0) * std::pow(u, s - 4.0) * a2) * a +
      (2.0 * (s - 1.0) * (s - 1.0) * std::pow(u, s - 3.0)) * aa +
      (4.0 * beta * tr * (s - 1.0) * std::pow(u, s - 2.0)) * a -
      (2.0 / (u * u)) * (aa + tr * a) + (4.0 * a2 / (u * u * u)) * a;

  const double score_sq = score.squaredNorm();
  out.value = c2 + 2.0 * c1.dot(score) + c0 * score_sq;
  out.grad = grad_c2 + 2.0 * (grad_c1 * score) + 2.0 * (hess * c1) + grad_c0 * score_sq +
             2.0 * c0 * (hess * score);
  return out;
}

Matrix SteinKernel::gram(const Matrix& points, int threads) const {
  const Eigen::Index n = points.rows();
  std::vector<Point> prepared(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](Eigen::Index i) {
    prepared[static_cast<std::size_t>(i)] = prepare(points.row(i).transpose());
  });
  Matrix k(n, n);
  parallel_for(n, threads, [&](Eigen::Index i) {
    for (Eigen::Index j = i; j < n; ++j) {
      k(i, j) = eval_prepared(prepared[static_cast<std::size_t>(i)],
                              prepared[static_cast<std::size_t>(j)]);
    }
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i);
  }
  return k;
}

class SteinKernel::Bound final : public BoundKernel {
 public:
  Bound(const SteinKernel& kernel, const Matrix& points, int threads) : kernel_(kernel) {
    const Eigen::Index n = points.rows();
    prepared_.resize(static_cast<std::size_t>(n));
    diag_.resize(n);
    parallel_for(n, threads, [&](Eigen::Index i) {
      const Vector x = points.row(i).transpose();
      prepared_[static_cast<std::size_t>(i)] = kernel_.prepare(x);
      diag_[i] = kernel_.diag_value(x);
    });
  }
  Eigen::Index size() const override { return diag_.size(); }
  double eval(Eigen::Index i, Eigen::Index j) const override {
    return kernel_.eval_prepared(prepared_[static_cast<std::size_t>(i)],
                                 prepared_[static_cast<std::size_t>(j)]);
  }
  double diag_value(Eigen::Index i) const override { return diag_[i]; }

 private:
  const SteinKernel& kernel_;
  std::vector<Point> prepared_;
  Vector diag_;
};

std::unique_ptr<BoundKernel> SteinKernel::bind(const Matrix& points, int threads) const {
  if (points.cols() != dim()) throw DimensionMismatch("stein kernel: points have wrong dimension");
  return std::make_unique<Bound>(*this, points, threads);
}

Vector SteinKernel::cross(const Matrix& points, const Vector& y) const {
  const Point py = prepare(y);
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out[i] = eval_prepared(prepare(points.row(i).transpose()), py);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assumption probing

namespace {

std::vector<Vector> shell_points(Eigen::Index d, double radius, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  if (d == 1) {
    out.push_back(Vector::Constant(1, -radius));
    out.push_back(Vector::Constant(1, radius));
    return out;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    out.push_back(radius * Vector::Unit(d, i));
    out.push_back(-radius * Vector::Unit(d, i));
  }
  Rng rng(seed, 0x5E11);
  for (int i = 0; i < count; ++i) {
    Vector z = rng.normal_vector(d);
    out.push_back((radius / z.norm()) * z);
  }
  return out;
}

double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double max_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

// Central differences of grad k_P.
Matrix kernel_diag_hessian(const SteinKernel& kernel, const Vector& x) {
  const Eigen::Index d = x.size();
  Matrix h(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    h.col(j) = (kernel.diag(xp).grad - kernel.diag(xm).grad) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

double shell_min_curvature(const TargetModel& target, double radius, int count,
                           std::uint64_t seed) {
  double lo = std::numeric_limits<double>::infinity();
  for (const Vector& x : shell_points(target.dim(), radius, count, seed)) {
    lo = std::min(lo, min_eig(-target.hessian_log_density(x)));
  }
  return lo;
}

// Grid (d <= 3) or random minoration of k_P over the box x* +/- radius, less
// a first-order slack for the unvisited part of each cell.
double diagonal_minoration(const SteinKernel& kernel, double radius, int count,
                           std::uint64_t seed) {
  const Eigen::Index d = kernel.dim();
  std::vector<Vector> points;
  double cell_halfdiag = 0.0;
  if (d <= 3) {
    const int per_axis = d == 1 ? 4001 : (d == 2 ? 201 : 41);
    const double h = 2.0 * radius / (per_axis - 1);
    cell_halfdiag = 0.5 * h * std::sqrt(static_cast<double>(d));
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Vector x = kernel.mode().x_star;
      for (Eigen::Index i = 0; i < d; ++i) x[i] += -radius + h * idx[static_cast<std::size_t>(i)];
      points.push_back(std::move(x));
      Eigen::Index k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == d) break;
    }
  } else {
    Rng rng(seed, 0xB0C5);
    const int total = std::max(count, 1) * 64;
    for (int i = 0; i < total; ++i) {
      Vector x = kernel.mode().x_star;
      for (Eigen::Index j = 0; j < d; ++j) x[j] += radius * (2.0 * rng.uniform() - 1.0);
      points.push_back(std::move(x));
    }
    cell_halfdiag = radius * std::sqrt(static_cast<double>(d)) /
                    std::pow(static_cast<double>(total), 1.0 / static_cast<double>(d));
  }
  double lo = std::numeric_limits<double>::infinity();
  double max_grad = 0.0;
  for (const Vector& x : points) {
    const KernelDiagonal kd = kernel.diag(x);
    lo = std::min(lo, kd.value);
    max_grad = std::max(max_grad, kd.grad.norm());
  }
  return lo - max_grad * cell_halfdiag;
}

}  // namespace

AssumptionReport check_consistency_assumptions(const SteinKernel& kernel,
                                           const AssumptionProbe& probe) {
  if (!(probe.radius > 0.0)) throw InvalidArgument("check_assumptions: radius must be positive");
  const TargetModel& target = kernel.target();
  AssumptionReport report;

  if (kernel.spec().family == KernelFamily::kKgm && kernel.order() >= 2) {
    report.within_scope = false;
    report.scope_note = "outside the consistency result: the kernel Hessian condition is not "
                        "established for KGM-Stein kernels of order s >= 2";
  } else {
    report.scope_note = "within the consistency result";
  }

  if (auto bound = kernel.analytic_diagonal_lower_bound()) {
    report.c1_squared = *bound;
    report.c1_analytic = true;
  } else {
    report.c1_squared = diagonal_minoration(kernel, probe.radius, probe.count, probe.seed);
  }
  report.diagonal_bounded = report.c1_squared > 0.0;

  report.b1 = std::numeric_limits<double>::infinity();
  report.b2 = -std::numeric_limits<double>::infinity();
  for (const Vector& x : shell_points(target.dim(), probe.radius, probe.count, probe.seed)) {
    report.b1 = std::min(report.b1, min_eig(-target.hessian_log_density(x)));
    report.b2 = std::max(report.b2, max_eig(kernel_diag_hessian(kernel, x)));
  }
  report.curvature_bounded = report.b1 > 0.0;
  const double rhs = 2.0 * report.b1 * report.c1_squared;
  report.hessian_condition = report.curvature_bounded && report.diagonal_bounded && report.b2 < rhs;
  {
    std::ostringstream ineq;
    ineq << "b2 < 2*b1*C1^2: " << report.b2 << " < 2*" << report.b1 << "*"
         << report.c1_squared << " = " << rhs << " (" << (report.b2 < rhs ? "true" : "false")
         << ")";
    report.inequality = ineq.str();
  }

  if (probe.b1_target) {
    const double b1 = *probe.b1_target;
    auto ok = [&](double r) {
      return shell_min_curvature(target, r, probe.count, probe.seed) >= b1;
    };
    // Scan outward-in for the last failing radius, then bisect.
    constexpr int kSteps = 1000;
    if (ok(probe.radius)) {
      double pass = probe.radius;
      double fail = -1.0;
      for (int j = kSteps - 1; j >= 0; --j) {
        const double r = probe.radius * j / kSteps;
        if (!ok(r)) {
          fail = r;
          break;
        }
        pass = r;
      }
      if (fail >= 0.0) {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (pass + fail);
          (ok(mid) ? pass : fail) = mid;
        }
      }
      report.b1_radius = pass;
    }
  }
  return report;
}

std::string AssumptionReport::to_string() const {
  std::ostringstream out;
  out << "scope: " << scope_note << "\n";
  out << "diagonal: C1^2 = " << c1_squared << (c1_analytic ? " (closed form)" : " (grid minoration)")
      << " -> " << (diagonal_bounded ? "holds" : "fails") << "\n";
  out << "curvature: b1 = min eig(-Hess log p) on shell = " << b1 << " -> "
      << (curvature_bounded ? "holds" : "fails") << "\n";
  out << "kernel Hessian: b2 = max eig(Hess k_P) on shell = " << b2 << "\n";
  out << "     " << inequality << " -> " << (hessian_condition ? "holds" : "fails") << "\n";
  if (b1_radius) out << "radius beyond which min eig >= b1 target: " << *b1_radius << "\n";
  out << "note: sampling-based probe, not a proof\n";
  return out.str();
}

}  // namespace steinpi
