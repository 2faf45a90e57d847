#pragma once

#include <cstdint>
#include <vector>

#include "steinpi/quantise.hpp"
#include "steinpi/stein_kernel.hpp"

namespace steinpi {

struct TransportEntry {
  Eigen::Index source;
  Eigen::Index target;
  double mass;
};

struct TransportPlan {
  double cost = 0.0;
  std::vector<TransportEntry> plan;  // positive masses only
  std::size_t pivots = 0;
};

// Exact 1-Wasserstein distance between two one-dimensional weighted samples,
// the integral of |F_a - F_b| over the merged atoms.
double wasserstein1_1d(const WeightedSample& a, const WeightedSample& b);

// Exact optimal transport with Euclidean ground cost, solved by the
// transportation simplex. Throws SizeGuard when n_a * n_b exceeds max_pairs.
TransportPlan wasserstein1_exact(const WeightedSample& a, const WeightedSample& b,
                                 std::size_t max_pairs = 1000000);

// Transportation problem on an explicit cost matrix. Supplies and demands
// must be non-negative with equal totals (to 1e-10 relative).
TransportPlan solve_transport(const Matrix& cost, const Vector& supply, const Vector& demand);

struct DimensionEffect {
  double estimate = 0.0;   // MC estimate of E[(k~ - E k~)^2], k~ = k_P / d
  double predicted = 0.0;  // 2 c^2 / d
  std::size_t samples = 0;
};

// For P = N(0, I_d) with the Langevin kernel and Sigma = I, k_P(x) is
// 2 beta d + |x|^2, so the normalised diagonal concentrates at rate 2/d.
// Only the Langevin family is accepted.
DimensionEffect dimension_effect(Eigen::Index d, std::size_t n_mc, const KernelSpec& spec,
                                 std::uint64_t seed);

}  // namespace steinpi
