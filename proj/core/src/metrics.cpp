#include "steinpi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

#include "steinpi/error.hpp"
#include "steinpi/random.hpp"
#include "steinpi/targets.hpp"

namespace steinpi {

double wasserstein1_1d(const WeightedSample& a, const WeightedSample& b) {
  a.validate();
  b.validate();
  if (a.dim() != 1 || b.dim() != 1) throw DimensionMismatch("wasserstein1_1d: samples must be 1D");
  std::vector<std::pair<double, double>> events;
  events.reserve(static_cast<std::size_t>(a.size() + b.size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) events.emplace_back(a.points(i, 0), a.weights[i]);
  for (Eigen::Index i = 0; i < b.size(); ++i) events.emplace_back(b.points(i, 0), -b.weights[i]);
  std::sort(events.begin(), events.end());
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < events.size(); ++k) {
    diff += events[k].second;
    total += std::abs(diff) * (events[k + 1].first - events[k].first);
  }
  return total;
}

namespace {

// Transportation simplex on a spanning-tree basis of the bipartite graph.
// Rows are nodes [0, m), columns are nodes [m, m + n).
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& supply, const Vector& demand)
      : cost_(cost), m_(cost.rows()), n_(cost.cols()), adj_(static_cast<std::size_t>(m_ + n_)) {
    max_cost_ = cost.cwiseAbs().maxCoeff();
    initial_basis(supply, demand);
  }

  TransportPlan solve() {
    const double tol = 1e-12 * std::max(1.0, max_cost_);
    const std::size_t max_pivots = 50 * static_cast<std::size_t>((m_ + n_) * (m_ + n_)) + 1000;
    const std::int64_t cells = static_cast<std::int64_t>(m_) * n_;
    const std::int64_t block =
        std::max<std::int64_t>(std::min<std::int64_t>(cells, 64),
                               static_cast<std::int64_t>(std::sqrt(static_cast<double>(cells))));
    std::int64_t cursor = 0;
    std::size_t degenerate_run = 0;
    const std::size_t bland_after = 10 * static_cast<std::size_t>(m_ + n_) + 100;
    std::size_t pivots = 0;

    for (;;) {
      compute_potentials();
      Eigen::Index p = -1;
      Eigen::Index q = -1;
      const bool bland = degenerate_run > bland_after;
      if (bland) {
        // Lowest-index entering cell guards against cycling.
        for (std::int64_t c = 0; c < cells && p < 0; ++c) {
          const Eigen::Index i = c / n_;
          const Eigen::Index j = c % n_;
          if (reduced(i, j) < -tol) {
            p = i;
            q = j;
          }
        }
      } else {
        // Block pricing: the most negative reduced cost in the first block that has one.
        double best = -tol;
        std::int64_t scanned = 0;
        while (scanned < cells) {
          const std::int64_t stop = std::min(scanned + block, cells);
          for (; scanned < stop; ++scanned) {
            const std::int64_t c = (cursor + scanned) % cells;
            const Eigen::Index i = c / n_;
            const Eigen::Index j = c % n_;
            const double r = reduced(i, j);
            if (r < best) {
              best = r;
              p = i;
              q = j;
            }
          }
          if (p >= 0) break;
        }
        cursor = (cursor + scanned) % cells;
      }
      if (p < 0) break;
      if (++pivots > max_pivots) throw NonConvergence("transport: pivot limit reached");
      const double theta = pivot(p, q, bland);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }

    TransportPlan out;
    out.pivots = pivots;
    double cost = 0.0;
    double comp = 0.0;
    for (const Edge& e : edges_) {
      const double mass = std::max(e.flow, 0.0);
      if (mass <= 0.0) continue;
      out.plan.push_back({e.row, e.col, mass});
      // Kahan summation of the transport cost.
      const double y = mass * cost_(e.row, e.col) - comp;
      const double t = cost + y;
      comp = (t - cost) - y;
      cost = t;
    }
    std::sort(out.plan.begin(), out.plan.end(), [](const TransportEntry& x, const TransportEntry& y) {
      return std::tie(x.source, x.target) < std::tie(y.source, y.target);
    });
    out.cost = cost;
    return out;
  }

 private:
  struct Edge {
    Eigen::Index row;
    Eigen::Index col;
    double flow;
  };

  double reduced(Eigen::Index i, Eigen::Index j) const { return cost_(i, j) - u_[i] - v_[j]; }

  void add_edge(Eigen::Index i, Eigen::Index j, double flow, std::size_t slot) {
    if (slot == edges_.size()) {
      edges_.push_back({i, j, flow});
    } else {
      edges_[slot] = {i, j, flow};
    }
    adj_[static_cast<std::size_t>(i)].push_back(slot);
    adj_[static_cast<std::size_t>(m_ + j)].push_back(slot);
  }

  void remove_from_adj(std::size_t node, std::size_t slot) {
    auto& list = adj_[node];
    list.erase(std::find(list.begin(), list.end(), slot));
  }

  // North-west corner rule; ties advance one index only, so the basis always
  // has m + n - 1 cells, some possibly at zero flow.
  void initial_basis(const Vector& supply, const Vector& demand) {
    Vector ra = supply;
    Vector rb = demand;
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    for (;;) {
      const double x = std::min(ra[i], rb[j]);
      add_edge(i, j, std::max(x, 0.0), edges_.size());
      ra[i] -= x;
      rb[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (ra[i] <= rb[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  std::size_t other(std::size_t node, const Edge& e) const {
    return node < static_cast<std::size_t>(m_) ? static_cast<std::size_t>(m_ + e.col)
                                               : static_cast<std::size_t>(e.row);
  }

  void compute_potentials() {
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    u_.assign(static_cast<std::size_t>(m_), 0.0);
    v_.assign(static_cast<std::size_t>(n_), 0.0);
    std::vector<char> seen(nodes, 0);
    std::vector<std::size_t> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t node = queue[head];
      for (std::size_t slot : adj_[node]) {
        const Edge& e = edges_[slot];
        const std::size_t next = other(node, e);
        if (seen[next]) continue;
        seen[next] = 1;
        if (node < static_cast<std::size_t>(m_)) {
          v_[static_cast<std::size_t>(e.col)] = cost_(e.row, e.col) - u_[static_cast<std::size_t>(e.row)];
        } else {
          u_[static_cast<std::size_t>(e.row)] = cost_(e.row, e.col) - v_[static_cast<std::size_t>(e.col)];
        }
        queue.push_back(next);
      }
    }
    if (queue.size() != nodes) throw NonConvergence("transport: basis is not a spanning tree");
  }

  // Adds cell (p, q) to the basis, pushes flow round the cycle it closes and
  // drops a blocking cell. Returns the amount of flow moved.
  double pivot(Eigen::Index p, Eigen::Index q, bool bland) {
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    const std::size_t source = static_cast<std::size_t>(p);
    const std::size_t target = static_cast<std::size_t>(m_ + q);
    std::vector<std::size_t> parent_edge(nodes, std::numeric_limits<std::size_t>::max());
    std::vector<char> seen(nodes, 0);
    std::vector<std::size_t> queue{source};
    seen[source] = 1;
    for (std::size_t head = 0; head < queue.size() && !seen[target]; ++head) {
      const std::size_t node = queue[head];
      for (std::size_t slot : adj_[node]) {
        const std::size_t next = other(node, edges_[slot]);
        if (seen[next]) continue;
        seen[next] = 1;
        parent_edge[next] = slot;
        queue.push_back(next);
      }
    }
    // Walk back from the column node; the first edge loses flow, then alternate.
    std::vector<std::size_t> path;
    for (std::size_t node = target; node != source;) {
      const std::size_t slot = parent_edge[node];
      path.push_back(slot);
      node = other(node, edges_[slot]);
    }
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = path.front();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Edge& e = edges_[path[k]];
      const Edge& best = edges_[leaving];
      const bool tie_better = bland ? std::tie(e.row, e.col) < std::tie(best.row, best.col) : false;
      if (e.flow < theta || (e.flow == theta && tie_better)) {
        theta = e.flow;
        leaving = path[k];
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
      edges_[path[k]].flow += (k % 2 == 0 ? -theta : theta);
    }
    const Edge old = edges_[leaving];
    remove_from_adj(static_cast<std::size_t>(old.row), leaving);
    remove_from_adj(static_cast<std::size_t>(m_ + old.col), leaving);
    add_edge(p, q, theta, leaving);
    return theta;
  }

  const Matrix& cost_;
  Eigen::Index m_;
  Eigen::Index n_;
  double max_cost_ = 0.0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_;
  std::vector<double> v_;
};

void check_plan(const TransportPlan& plan, const Vector& supply, const Vector& demand) {
  Vector rows = Vector::Zero(supply.size());
  Vector cols = Vector::Zero(demand.size());
  for (const TransportEntry& e : plan.plan) {
    if (e.mass < 0.0) throw NonConvergence("transport: negative mass in plan");
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
  }
  if ((rows - supply).cwiseAbs().maxCoeff() > 1e-8 || (cols - demand).cwiseAbs().maxCoeff() > 1e-8) {
    throw NonConvergence("transport: plan marginals do not match the inputs");
  }
}

}  // namespace

TransportPlan solve_transport(const Matrix& cost, const Vector& supply, const Vector& demand) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size()) {
    throw DimensionMismatch("transport: cost matrix does not match marginals");
  }
  if (supply.size() == 0 || demand.size() == 0) throw InvalidArgument("transport: empty marginal");
  if (!cost.allFinite()) throw InvalidArgument("transport: non-finite cost");
  if (supply.minCoeff() < 0.0 || demand.minCoeff() < 0.0) {
    throw InvalidArgument("transport: negative supply or demand");
  }
  const double ts = supply.sum();
  const double td = demand.sum();
  if (std::abs(ts - td) > 1e-10 * std::max(1.0, ts)) {
    throw InvalidArgument("transport: supply and demand totals differ");
  }
  TransportSimplex simplex(cost, supply, demand);
  TransportPlan plan = simplex.solve();
  check_plan(plan, supply, demand);
  return plan;
}

TransportPlan wasserstein1_exact(const WeightedSample& a, const WeightedSample& b,
                                 std::size_t max_pairs) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) throw DimensionMismatch("wasserstein1_exact: dimensions differ");
  const auto pairs = static_cast<std::size_t>(a.size()) * static_cast<std::size_t>(b.size());
  if (pairs > max_pairs) {
    throw SizeGuard("wasserstein1_exact: " + std::to_string(pairs) + " pairs exceeds the limit of " +
                    std::to_string(max_pairs));
  }
  Matrix cost(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) cost(i, j) = (a.points.row(i) - b.points.row(j)).norm();
  }
  return solve_transport(cost, a.weights, b.weights);
}

DimensionEffect dimension_effect(Eigen::Index d, std::size_t n_mc, const KernelSpec& spec,
                                 std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("dimension_effect: d must be positive");
  if (n_mc < 2) throw InvalidArgument("dimension_effect: need at least two samples");
  if (spec.family != KernelFamily::kLangevin) {
    throw InvalidArgument("dimension_effect: only the Langevin kernel is supported");
  }
  const TargetPtr target = make_standard_gaussian(d);
  const auto kernel = make_stein_kernel(
      target, make_mode_info(Vector::Zero(d), Matrix::Identity(d, d)), spec);
  Rng rng(seed);
  const double dd = static_cast<double>(d);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double v = kernel->diag_value(target->sample_exact(rng)) / dd;
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  DimensionEffect out;
  out.estimate = m2 / static_cast<double>(n_mc - 1);
  // k_P(x) = 2 beta d + c |x|^2 with c = 1, and Var |X|^2 = 2 d.
  const double c = 1.0;
  out.predicted = 2.0 * c * c / dd;
  out.samples = n_mc;
  return out;
}

}  // namespace steinpi
