#include "steinpi/mala.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steinpi/error.hpp"

namespace steinpi {

Preconditioner::Preconditioner(const Matrix& m) : m_(m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch("preconditioner: matrix must be square and non-empty");
  }
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("preconditioner: M has no Cholesky factorisation");
  }
  lower_ = llt.matrixL();
}

Vector Preconditioner::solve(const Vector& v) const {
  const Vector w = lower_.triangularView<Eigen::Lower>().solve(v);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(w);
}

Vector Preconditioner::scale_noise(const Vector& z) const {
  return lower_.transpose().triangularView<Eigen::Upper>().solve(z);
}

double Preconditioner::norm_sq(const Vector& v) const {
  return (lower_.transpose().triangularView<Eigen::Upper>() * v).squaredNorm();
}

Vector Preconditioner::lower_transpose_mul(const Vector& x) const {
  return lower_.transpose().triangularView<Eigen::Upper>() * x;
}

MalaState make_mala_state(const LogDensity& target, const Vector& x) {
  MalaState s;
  s.x = x;
  s.log_density = target.log_density_and_grad(x, s.grad);
  return s;
}

double mala_log_accept(const MalaState& from, const MalaState& to, double epsilon,
                       const Preconditioner& precond) {
  const Vector nu_from = from.x + epsilon * precond.solve(from.grad);
  const Vector nu_to = to.x + epsilon * precond.solve(to.grad);
  return to.log_density - from.log_density -
         precond.norm_sq(from.x - nu_to) / (4.0 * epsilon) +
         precond.norm_sq(to.x - nu_from) / (4.0 * epsilon);
}

StepResult mala_step(MalaState& state, const LogDensity& target, double epsilon,
                     const Preconditioner& precond, Rng& draws) {
  const Vector z = draws.normal_vector(state.x.size());
  const double log_u = std::log(draws.uniform());

  MalaState proposal;
  proposal.x = state.x + epsilon * precond.solve(state.grad) +
               std::sqrt(2.0 * epsilon) * precond.scale_noise(z);
  proposal.log_density = target.log_density_and_grad(proposal.x, proposal.grad);

  StepResult result;
  if (!std::isfinite(proposal.log_density) || !proposal.grad.allFinite()) {
    result.nonfinite = true;
    result.log_accept = -std::numeric_limits<double>::infinity();
    return result;
  }
  result.log_accept = mala_log_accept(state, proposal, epsilon, precond);
  if (log_u < result.log_accept) {
    state = std::move(proposal);
    result.accepted = true;
  }
  return result;
}

ChainOutput run_chain(const Vector& init, const LogDensity& target, const ChainConfig& config) {
  const Eigen::Index d = target.dim();
  if (init.size() != d) throw DimensionMismatch("run_chain: init has wrong dimension");
  if (!(config.epsilon > 0.0)) throw InvalidArgument("run_chain: epsilon must be positive");
  const Preconditioner precond =
      config.preconditioner.size() == 0 ? Preconditioner::identity(d)
                                        : Preconditioner(config.preconditioner);
  if (precond.dim() != d) throw DimensionMismatch("run_chain: preconditioner has wrong size");

  MalaState state = make_mala_state(target, init);
  if (!std::isfinite(state.log_density) || !state.grad.allFinite()) {
    throw InvalidArgument("run_chain: log density not finite at the initial state");
  }

  ChainOutput out;
  out.states.resize(static_cast<Eigen::Index>(config.n), d);
  out.accepted.resize(config.n);
  out.final_config = config;
  const Rng base(config.seed, config.stream);
  std::size_t accepted = 0;
  for (std::size_t t = 0; t < config.n; ++t) {
    Rng draws = base.at(config.first_step + t);
    const StepResult step = mala_step(state, target, config.epsilon, precond, draws);
    out.accepted[t] = step.accepted ? 1 : 0;
    accepted += step.accepted ? 1 : 0;
    out.nonfinite_proposals += step.nonfinite ? 1 : 0;
    out.states.row(static_cast<Eigen::Index>(t)) = state.x.transpose();
  }
  out.accept_rate = config.n == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(config.n);
  return out;
}

AdaptSchedule AdaptSchedule::standard(std::uint64_t seed, int epochs, std::size_t warmup_length,
                                      std::size_t final_length, double learning_rate,
                                      double epsilon0) {
  if (epochs < 1) throw InvalidArgument("adapt schedule: need at least one epoch");
  AdaptSchedule s;
  s.epsilon0 = epsilon0;
  s.seed = seed;
  s.epoch_lengths.assign(static_cast<std::size_t>(epochs - 1), warmup_length);
  s.epoch_lengths.push_back(final_length);
  s.learning_rates.assign(static_cast<std::size_t>(epochs - 1), learning_rate);
  return s;
}

void AdaptSchedule::validate() const {
  if (epoch_lengths.empty()) throw InvalidArgument("adapt schedule: no epochs");
  if (learning_rates.size() + 1 != epoch_lengths.size()) {
    throw InvalidArgument("adapt schedule: need one learning rate per epoch after the first");
  }
  for (std::size_t n : epoch_lengths) {
    if (n == 0) throw InvalidArgument("adapt schedule: epoch lengths must be positive");
  }
  for (double a : learning_rates) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("adapt schedule: rates must lie in [0, 1]");
  }
  if (!(epsilon0 > 0.0)) throw InvalidArgument("adapt schedule: epsilon0 must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw InvalidArgument("adapt schedule: target acceptance must lie in (0, 1)");
  }
}

Matrix sample_covariance(const Matrix& states) {
  const Eigen::Index n = states.rows();
  if (n < 2) return Matrix::Zero(states.cols(), states.cols());
  const Eigen::RowVectorXd mean = states.colwise().mean();
  const Matrix centred = states.rowwise() - mean;
  return (centred.transpose() * centred) / static_cast<double>(n - 1);
}

AdaptResult adaptive_warmup(const Vector& init, const LogDensity& target,
                            const AdaptSchedule& schedule) {
  schedule.validate();
  const Eigen::Index d = target.dim();
  AdaptResult result;
  ChainConfig config;
  config.epsilon = schedule.epsilon0;
  config.preconditioner = schedule.preconditioner0.size() == 0 ? Matrix::Identity(d, d)
                                                               : schedule.preconditioner0;
  const Preconditioner initial(config.preconditioner);
  if (initial.dim() != d) throw DimensionMismatch("adaptive_warmup: preconditioner has wrong size");
  Matrix proposal_cov = config.preconditioner.llt().solve(Matrix::Identity(d, d));
  config.seed = schedule.seed;

  Vector start = init;
  const Rng streams(schedule.seed, schedule.stream);
  for (std::size_t epoch = 0; epoch < schedule.epoch_lengths.size(); ++epoch) {
    if (epoch > 0) {
      const double rho = result.accept_rates.back();
      config.epsilon *= std::exp(rho - schedule.target_accept);

      const double alpha = schedule.learning_rates[epoch - 1];
      Matrix cov = sample_covariance(result.output.states);
      Matrix blended = alpha * proposal_cov + (1.0 - alpha) * cov;
      blended = 0.5 * (blended + blended.transpose()).eval();
      Eigen::LLT<Matrix> llt(blended);
      if (llt.info() != Eigen::Success) {
        // Degenerate epoch covariance: regularise instead of aborting.
        const double trace = std::max(cov.trace(), 0.0);
        blended.diagonal().array() += 1e-10 * (trace > 0.0 ? trace / d : 1.0);
        llt.compute(blended);
        if (llt.info() != Eigen::Success) blended = proposal_cov;
      }
      proposal_cov = blended;
      Matrix precision = proposal_cov.llt().solve(Matrix::Identity(d, d));
      config.preconditioner = 0.5 * (precision + precision.transpose());
    }
    config.n = schedule.epoch_lengths[epoch];
    // Each epoch draws from its own stream so epochs are independently addressable.
    config.stream = streams.substream(epoch).key();
    config.first_step = 0;
    result.output = run_chain(start, target, config);
    result.epsilons.push_back(config.epsilon);
    result.accept_rates.push_back(result.output.accept_rate);
    start = result.output.states.row(result.output.states.rows() - 1).transpose();
  }
  result.config = config;
  return result;
}

Matrix random_window(const Matrix& states, std::size_t length, Rng& rng) {
  const auto n = static_cast<std::size_t>(states.rows());
  if (length == 0 || length > n) throw InvalidArgument("random_window: length out of range");
  const std::size_t start = rng.uniform_index(n - length + 1);
  return states.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(length));
}

}  // namespace steinpi
