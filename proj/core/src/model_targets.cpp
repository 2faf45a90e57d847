#include <cmath>
#include <numbers>

#include "steinpi/error.hpp"
#include "steinpi/targets.hpp"

namespace steinpi {

namespace normal {

namespace {
constexpr double kHalfLogTwoPi = 0.91893853320467274178032973640562;

// Mills ratio (1 - Phi(x)) / phi(x) for x >= 5 by backward evaluation of the
// Laplace continued fraction.
double mills_ratio_upper(double x) {
  double t = x;
  for (int k = 80; k >= 1; --k) t = x + k / t;
  return 1.0 / t;
}
}  // namespace

double log_pdf(double z) { return -0.5 * z * z - kHalfLogTwoPi; }

double log_cdf(double z) {
  if (z >= 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -5.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  return log_pdf(z) + std::log(mills_ratio_upper(-z));
}

double inverse_mills(double z) {
  if (z > -5.0) return std::exp(log_pdf(z) - log_cdf(z));
  return 1.0 / mills_ratio_upper(-z);
}

}  // namespace normal

namespace {

class RegressionPosterior final : public TargetModel {
 public:
  RegressionPosterior(Vector t, Vector y) : t_(std::move(t)), y_(std::move(y)) {}

  Eigen::Index dim() const override { return 2; }
  std::string name() const override { return "regression_posterior"; }

  double log_density(const Vector& x) const override {
    double value = -0.5 * x.squaredNorm();
    for (Eigen::Index i = 0; i < t_.size(); ++i) {
      const double r = y_[i] - x[0] * (1.0 + t_[i] * x[1]);
      value -= 0.5 * r * r;
    }
    return value;
  }

  Vector grad_log_density(const Vector& x) const override {
    Vector grad;
    log_density_and_grad(x, grad);
    return grad;
  }

  double log_density_and_grad(const Vector& x, Vector& grad) const override {
    double value = -0.5 * x.squaredNorm();
    grad = -x;
    for (Eigen::Index i = 0; i < t_.size(); ++i) {
      const double df1 = 1.0 + t_[i] * x[1];
      const double df2 = t_[i] * x[0];
      const double r = y_[i] - x[0] * df1;
      value -= 0.5 * r * r;
      grad[0] += r * df1;
      grad[1] += r * df2;
    }
    return value;
  }

  Matrix hessian_log_density(const Vector& x) const override {
    Matrix h = -Matrix::Identity(2, 2);
    for (Eigen::Index i = 0; i < t_.size(); ++i) {
      const double df1 = 1.0 + t_[i] * x[1];
      const double df2 = t_[i] * x[0];
      const double r = y_[i] - x[0] * df1;
      h(0, 0) -= df1 * df1;
      h(1, 1) -= df2 * df2;
      const double off = r * t_[i] - df1 * df2;
      h(0, 1) += off;
      h(1, 0) += off;
    }
    return h;
  }

 private:
  Vector t_;
  Vector y_;
};

// Product of two independent skew-normal marginals 2 phi(x) Phi(a x).
class SkewNormal2d final : public TargetModel {
 public:
  Eigen::Index dim() const override { return 2; }
  std::string name() const override { return "skew_normal"; }

  double log_density(const Vector& x) const override {
    double value = std::log(4.0);
    for (int i = 0; i < 2; ++i) {
      value += normal::log_pdf(x[i]) + normal::log_cdf(kShape[i] * x[i]);
    }
    return value;
  }

  Vector grad_log_density(const Vector& x) const override {
    Vector g(2);
    for (int i = 0; i < 2; ++i) {
      g[i] = -x[i] + kShape[i] * normal::inverse_mills(kShape[i] * x[i]);
    }
    return g;
  }

  Matrix hessian_log_density(const Vector& x) const override {
    Matrix h = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      const double z = kShape[i] * x[i];
      const double m = normal::inverse_mills(z);
      h(i, i) = -1.0 - kShape[i] * kShape[i] * m * (z + m);
    }
    return h;
  }

  bool has_exact_sampler() const override { return true; }
  Vector sample_exact(Rng& rng) const override {
    // X = delta |U0| + sqrt(1 - delta^2) U1 is skew-normal with shape a.
    Vector x(2);
    for (int i = 0; i < 2; ++i) {
      const double delta = kShape[i] / std::sqrt(1.0 + kShape[i] * kShape[i]);
      const double u0 = rng.normal();
      const double u1 = rng.normal();
      x[i] = delta * std::abs(u0) + std::sqrt(1.0 - delta * delta) * u1;
    }
    return x;
  }

 private:
  static constexpr double kShape[2] = {6.0, -3.0};
};

double logistic(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

// log(logistic(t)) and log(1 - logistic(t)) without cancellation.
double log_logistic(double t) { return -std::log1p(std::exp(-std::abs(t))) + std::min(t, 0.0); }
double log_one_minus_logistic(double t) { return log_logistic(-t); }

class GarchPosterior final : public TargetModel {
 public:
  explicit GarchPosterior(Vector y) : y_(std::move(y)) {
    const double mean = y_.mean();
    initial_variance_ = (y_.array() - mean).square().sum() / static_cast<double>(y_.size() - 1);
  }

  Eigen::Index dim() const override { return 4; }
  std::string name() const override { return "garch"; }

  double log_density(const Vector& theta) const override {
    const GarchParameters phi = garch_from_unconstrained(theta);
    double value = garch_log_jacobian(theta);
    double variance = initial_variance_;
    double innovation = 0.0;
    for (Eigen::Index t = 0; t < y_.size(); ++t) {
      variance = phi.omega + phi.alpha * innovation * innovation + phi.beta * variance;
      innovation = y_[t] - phi.mean;
      value += -0.5 * std::log(variance) - 0.5 * innovation * innovation / variance;
    }
    return value;
  }

  Vector grad_log_density(const Vector& theta) const override {
    Vector grad;
    Matrix hess;
    evaluate(theta, &grad, nullptr);
    return grad;
  }

  Matrix hessian_log_density(const Vector& theta) const override {
    Vector grad;
    Matrix hess;
    evaluate(theta, &grad, &hess);
    return hess;
  }

 private:
  // Differentiates the variance recursion in phi, then maps to theta with the
  // chain rule. hess may be null.
  void evaluate(const Vector& theta, Vector* grad, Matrix* hess) const {
    const GarchParameters phi = garch_from_unconstrained(theta);
    using Vec4 = Eigen::Vector4d;
    using Mat4 = Eigen::Matrix4d;

    Vec4 grad_phi = Vec4::Zero();
    Mat4 hess_phi = Mat4::Zero();
    double variance = initial_variance_;
    Vec4 dvar = Vec4::Zero();
    Mat4 d2var = Mat4::Zero();
    double innovation = 0.0;  // a_{t-1}; a_0 = 0 and does not depend on phi1
    bool innovation_depends_on_mean = false;

    for (Eigen::Index t = 0; t < y_.size(); ++t) {
      // sigma_t^2 = phi2 + phi3 a_{t-1}^2 + phi4 sigma_{t-1}^2
      Vec4 dvar_next = phi.beta * dvar;
      dvar_next[1] += 1.0;
      dvar_next[2] += innovation * innovation;
      dvar_next[3] += variance;
      if (innovation_depends_on_mean) dvar_next[0] += -2.0 * phi.alpha * innovation;
      if (hess != nullptr) {
        Mat4 d2_next = phi.beta * d2var;
        d2_next.row(3) += dvar.transpose();
        d2_next.col(3) += dvar;
        if (innovation_depends_on_mean) {
          d2_next(0, 0) += 2.0 * phi.alpha;
          d2_next(0, 2) += -2.0 * innovation;
          d2_next(2, 0) += -2.0 * innovation;
        }
        d2var = d2_next;
      }
      variance = phi.omega + phi.alpha * innovation * innovation + phi.beta * variance;
      dvar = dvar_next;

      innovation = y_[t] - phi.mean;
      innovation_depends_on_mean = true;

      // l_t = -1/2 log s - a^2 / (2 s)
      const double s = variance;
      const double a = innovation;
      const double dl_ds = -0.5 / s + 0.5 * a * a / (s * s);
      grad_phi += dl_ds * dvar;
      grad_phi[0] += a / s;
      if (hess != nullptr) {
        const double d2l_ds2 = 0.5 / (s * s) - a * a / (s * s * s);
        const double d2l_dmean_ds = -a / (s * s);
        hess_phi += d2l_ds2 * (dvar * dvar.transpose()) + dl_ds * d2var;
        hess_phi.row(0) += d2l_dmean_ds * dvar.transpose();
        hess_phi.col(0) += d2l_dmean_ds * dvar;
        hess_phi(0, 0) += -1.0 / s;
      }
    }

    // Jacobian of phi(theta) and second derivatives of each phi_k.
    const double s3 = logistic(theta[2]);
    const double s4 = logistic(theta[3]);
    const double ds3 = s3 * (1.0 - s3);
    const double ds4 = s4 * (1.0 - s4);
    Mat4 jac = Mat4::Zero();
    jac(0, 0) = 1.0;
    jac(1, 1) = phi.omega;
    jac(2, 2) = ds3;
    jac(3, 2) = -ds3 * s4;
    jac(3, 3) = (1.0 - s3) * ds4;

    // Log-Jacobian log|J| = theta2 + log(s3 (1 - s3)) + log(1 - s3) + log(s4 (1 - s4)).
    Vec4 grad_logjac(0.0, 1.0, 1.0 - 3.0 * s3, 1.0 - 2.0 * s4);

    *grad = jac.transpose() * grad_phi + grad_logjac;

    if (hess != nullptr) {
      Mat4 h = jac.transpose() * hess_phi * jac;
      h(1, 1) += grad_phi[1] * phi.omega;
      h(2, 2) += grad_phi[2] * ds3 * (1.0 - 2.0 * s3);
      h(2, 2) += grad_phi[3] * (-ds3 * (1.0 - 2.0 * s3) * s4);
      h(2, 3) += grad_phi[3] * (-ds3 * ds4);
      h(3, 2) += grad_phi[3] * (-ds3 * ds4);
      h(3, 3) += grad_phi[3] * (1.0 - s3) * ds4 * (1.0 - 2.0 * s4);
      h(2, 2) += -3.0 * ds3;
      h(3, 3) += -2.0 * ds4;
      *hess = h;
    }
  }

  Vector y_;
  double initial_variance_ = 0.0;
};

}  // namespace

TargetPtr make_regression_posterior(Vector t, Vector y) {
  if (t.size() != y.size()) {
    throw DimensionMismatch("regression_posterior: t and y differ in length");
  }
  return std::make_shared<RegressionPosterior>(std::move(t), std::move(y));
}

RegressionData simulate_regression_data(std::uint64_t seed) {
  RegressionData data;
  data.t.resize(10);
  data.y.resize(10);
  Rng rng(seed);
  for (int i = 0; i < 10; ++i) {
    data.t[i] = static_cast<double>(i + 1) - 5.0;
    data.y[i] = rng.normal();  // f_i(0, 0) = 0
  }
  return data;
}

TargetPtr make_skew_normal_2d() { return std::make_shared<SkewNormal2d>(); }

TargetPtr make_garch_posterior(Vector y) {
  if (y.size() < 2) throw InvalidArgument("garch: need at least two observations");
  return std::make_shared<GarchPosterior>(std::move(y));
}

GarchParameters garch_from_unconstrained(const Vector& theta) {
  if (theta.size() != 4) throw DimensionMismatch("garch: theta must have 4 entries");
  const double s3 = logistic(theta[2]);
  return {theta[0], std::exp(theta[1]), s3, (1.0 - s3) * logistic(theta[3])};
}

Vector garch_to_unconstrained(const GarchParameters& phi) {
  if (!(phi.omega > 0.0 && phi.alpha > 0.0 && phi.beta > 0.0 && phi.alpha + phi.beta < 1.0)) {
    throw InvalidArgument("garch: parameters outside the stationary region");
  }
  auto logit = [](double p) { return std::log(p) - std::log1p(-p); };
  Vector theta(4);
  theta << phi.mean, std::log(phi.omega), logit(phi.alpha), logit(phi.beta / (1.0 - phi.alpha));
  return theta;
}

double garch_log_jacobian(const Vector& theta) {
  return theta[1] + log_logistic(theta[2]) + 2.0 * log_one_minus_logistic(theta[2]) +
         log_logistic(theta[3]) + log_one_minus_logistic(theta[3]);
}

Vector simulate_garch(const GarchParameters& phi, int length, std::uint64_t seed) {
  Rng rng(seed);
  Vector y(length);
  double variance = phi.omega / (1.0 - phi.alpha - phi.beta);
  double innovation = 0.0;
  for (int t = 0; t < length; ++t) {
    variance = phi.omega + phi.alpha * innovation * innovation + phi.beta * variance;
    innovation = std::sqrt(variance) * rng.normal();
    y[t] = phi.mean + innovation;
  }
  return y;
}

}  // namespace steinpi
