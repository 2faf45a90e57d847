#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include "steinpi/error.hpp"
#include "steinpi/targets.hpp"

namespace steinpi {

Vector TargetModel::sample_exact(Rng&) const {
  throw NoExactSampler("target '" + name() + "' has no exact sampler");
}

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

class Gaussian final : public TargetModel {
 public:
  Gaussian(Vector mean, const Matrix& covariance) : mean_(std::move(mean)) {
    if (covariance.rows() != mean_.size() || covariance.cols() != mean_.size()) {
      throw DimensionMismatch("gaussian: covariance shape does not match mean");
    }
    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("gaussian: covariance is not positive definite");
    }
    chol_ = llt.matrixL();
    precision_ = llt.solve(Matrix::Identity(dim(), dim()));
    precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
    log_norm_ = -0.5 * static_cast<double>(dim()) * kLogTwoPi -
                chol_.diagonal().array().log().sum();
  }

  Eigen::Index dim() const override { return mean_.size(); }
  std::string name() const override { return "gaussian"; }

  double log_density(const Vector& x) const override {
    const Vector r = x - mean_;
    return log_norm_ - 0.5 * r.dot(precision_ * r);
  }

  Vector grad_log_density(const Vector& x) const override {
    return -(precision_ * (x - mean_));
  }

  double log_density_and_grad(const Vector& x, Vector& grad) const override {
    const Vector r = x - mean_;
    grad = -(precision_ * r);
    return log_norm_ + 0.5 * r.dot(grad);
  }

  Matrix hessian_log_density(const Vector&) const override { return -precision_; }

  bool has_exact_sampler() const override { return true; }
  Vector sample_exact(Rng& rng) const override {
    return mean_ + chol_ * rng.normal_vector(dim());
  }

 private:
  Vector mean_;
  Matrix chol_;
  Matrix precision_;
  double log_norm_ = 0.0;
};

struct Component {
  double weight;
  Vector mean;
  double scale;
};

class GaussianMixture final : public TargetModel {
 public:
  explicit GaussianMixture(std::vector<Component> components)
      : components_(std::move(components)) {
    std::sort(components_.begin(), components_.end(),
              [](const Component& a, const Component& b) {
                const auto ma = std::vector<double>(a.mean.begin(), a.mean.end());
                const auto mb = std::vector<double>(b.mean.begin(), b.mean.end());
                return std::tie(ma, a.scale, a.weight) < std::tie(mb, b.scale, b.weight);
              });
    dim_ = components_.front().mean.size();
    cumulative_.reserve(components_.size());
    double acc = 0.0;
    for (const auto& c : components_) {
      acc += c.weight;
      cumulative_.push_back(acc);
    }
  }

  Eigen::Index dim() const override { return dim_; }
  std::string name() const override { return "gaussian_mixture"; }

  double log_density(const Vector& x) const override {
    std::vector<double> terms;
    return log_sum(x, terms);
  }

  Vector grad_log_density(const Vector& x) const override {
    Vector grad;
    log_density_and_grad(x, grad);
    return grad;
  }

  double log_density_and_grad(const Vector& x, Vector& grad) const override {
    std::vector<double> terms;
    const double value = log_sum(x, terms);
    grad = Vector::Zero(dim_);
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const auto& c = components_[k];
      const double r = std::exp(terms[k] - value);
      grad.noalias() -= (r / (c.scale * c.scale)) * (x - c.mean);
    }
    return value;
  }

  Matrix hessian_log_density(const Vector& x) const override {
    std::vector<double> terms;
    const double value = log_sum(x, terms);
    Vector grad = Vector::Zero(dim_);
    Matrix hess = Matrix::Zero(dim_, dim_);
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const auto& c = components_[k];
      const double r = std::exp(terms[k] - value);
      const double prec = 1.0 / (c.scale * c.scale);
      const Vector g = -prec * (x - c.mean);
      grad += r * g;
      hess += r * (g * g.transpose());
      hess.diagonal().array() -= r * prec;
    }
    hess -= grad * grad.transpose();
    return hess;
  }

  bool has_exact_sampler() const override { return true; }
  Vector sample_exact(Rng& rng) const override {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative_.begin()), components_.size() - 1);
    const auto& c = components_[k];
    return c.mean + c.scale * rng.normal_vector(dim_);
  }

 private:
  double log_sum(const Vector& x, std::vector<double>& terms) const {
    terms.resize(components_.size());
    double max_term = -std::numeric_limits<double>::infinity();
    const double d = static_cast<double>(dim_);
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const auto& c = components_[k];
      terms[k] = std::log(c.weight) - 0.5 * (x - c.mean).squaredNorm() / (c.scale * c.scale) -
                 d * std::log(c.scale) - 0.5 * d * kLogTwoPi;
      max_term = std::max(max_term, terms[k]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
  }

  std::vector<Component> components_;
  std::vector<double> cumulative_;
  Eigen::Index dim_ = 0;
};

}  // namespace

TargetPtr make_gaussian(Vector mean, Matrix covariance) {
  if (mean.size() == 0) throw InvalidArgument("gaussian: dimension must be positive");
  return std::make_shared<Gaussian>(std::move(mean), covariance);
}

TargetPtr make_standard_gaussian(Eigen::Index dim) {
  return make_gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

TargetPtr make_gaussian_mixture(std::vector<double> weights, std::vector<Vector> means,
                                std::vector<double> scales) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != scales.size()) {
    throw DimensionMismatch("gaussian_mixture: weights, means and scales differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidSimplex("gaussian_mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidSimplex("gaussian_mixture: weights do not sum to one");
  }
  const Eigen::Index d = means.front().size();
  if (d == 0) throw InvalidArgument("gaussian_mixture: dimension must be positive");
  std::vector<Component> components;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (means[k].size() != d) throw DimensionMismatch("gaussian_mixture: ragged means");
    if (!(scales[k] > 0.0)) throw InvalidArgument("gaussian_mixture: scales must be positive");
    components.push_back({weights[k], std::move(means[k]), scales[k]});
  }
  return std::make_shared<GaussianMixture>(std::move(components));
}

TargetPtr make_default_mixture() {
  return make_gaussian_mixture({0.3, 0.4, 0.3},
                               {Vector::Constant(1, -3.0), Vector::Constant(1, 0.0),
                                Vector::Constant(1, 3.0)},
                               {0.8, 1.0, 0.8});
}

}  // namespace steinpi
