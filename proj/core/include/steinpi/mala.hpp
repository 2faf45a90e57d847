#pragma once

#include <cstdint>
#include <vector>

#include "steinpi/random.hpp"
#include "steinpi/targets.hpp"

namespace steinpi {

// Constant SPD preconditioner M, factorised once as M = L L^T. The proposal
// covariance is 2 eps M^{-1} and the noise is L^{-T} Z.
class Preconditioner {
 public:
  explicit Preconditioner(const Matrix& m);
  static Preconditioner identity(Eigen::Index d) { return Preconditioner(Matrix::Identity(d, d)); }

  Vector solve(const Vector& v) const;          // M^{-1} v
  Vector scale_noise(const Vector& z) const;    // L^{-T} z, covariance M^{-1}
  double norm_sq(const Vector& v) const;        // v^T M v
  Vector lower_transpose_mul(const Vector& x) const;  // L^T x

  const Matrix& matrix() const { return m_; }
  const Matrix& lower() const { return lower_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
  Matrix lower_;
};

struct ChainConfig {
  double epsilon = 1.0;
  Matrix preconditioner;        // M; empty means identity
  std::size_t n = 1000;         // number of transitions
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;     // e.g. replicate or epoch tag
  std::uint64_t first_step = 0; // counter position of the first transition
};

// Current point with its cached log density and gradient.
struct MalaState {
  Vector x;
  double log_density = 0.0;
  Vector grad;
};

MalaState make_mala_state(const LogDensity& target, const Vector& x);

struct StepResult {
  bool accepted = false;
  bool nonfinite = false;    // proposal had a NaN/inf log density; rejected
  double log_accept = 0.0;   // L
};

// Log Metropolis-Hastings ratio for moving from `from` to `to`:
//   L = log pi(to) - log pi(from)
//       - |from - nu(to)|^2_M / (4 eps) + |to - nu(from)|^2_M / (4 eps)
// with nu(x) = x + eps M^{-1} grad log pi(x) and |v|^2_M = v^T M v.
double mala_log_accept(const MalaState& from, const MalaState& to, double epsilon,
                       const Preconditioner& precond);

// One transition. Consumes d normals and one uniform from `draws`.
StepResult mala_step(MalaState& state, const LogDensity& target, double epsilon,
                     const Preconditioner& precond, Rng& draws);

struct ChainOutput {
  Matrix states;                       // n x d; row 0 is the first post-init state
  std::vector<std::uint8_t> accepted;  // one flag per transition
  double accept_rate = 0.0;
  std::size_t nonfinite_proposals = 0;
  ChainConfig final_config;
};

// Runs config.n transitions. Transition t draws from
// Rng(seed, stream).at(first_step + t), so restarting from states[k] with
// first_step advanced by k + 1 reproduces states[k + 1:] exactly.
ChainOutput run_chain(const Vector& init, const LogDensity& target, const ChainConfig& config);

struct AdaptSchedule {
  double epsilon0 = 1.0;
  Matrix preconditioner0;                  // empty means identity
  std::vector<std::size_t> epoch_lengths;  // n_0 .. n_{h-1}; the last is returned
  std::vector<double> learning_rates;      // alpha_1 .. alpha_{h-1}
  double target_accept = 0.57;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  // h epochs: h - 1 warm-up epochs of `warmup_length` and a final epoch.
  static AdaptSchedule standard(std::uint64_t seed, int epochs = 10,
                                std::size_t warmup_length = 1000,
                                std::size_t final_length = 100000, double learning_rate = 0.3,
                                double epsilon0 = 1.0);

  void validate() const;
};

struct AdaptResult {
  ChainConfig config;        // the configuration used for the final epoch
  ChainOutput output;        // final epoch only
  std::vector<double> epsilons;      // per epoch
  std::vector<double> accept_rates;  // per epoch
};

// Epoch-based adaptive MALA. After each epoch the step size is multiplied by
// exp(rho - target_accept) and the proposal covariance M^{-1} is blended with
// the epoch's sample covariance: M_i^{-1} = a_i M_{i-1}^{-1} + (1 - a_i) cov.
AdaptResult adaptive_warmup(const Vector& init, const LogDensity& target,
                            const AdaptSchedule& schedule);

// Rows [start, start + length) of a chain for a uniformly random start.
Matrix random_window(const Matrix& states, std::size_t length, Rng& rng);

// Sample covariance with divisor n - 1.
Matrix sample_covariance(const Matrix& states);

}  // namespace steinpi
