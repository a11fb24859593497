#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "datagen.hpp"

using geoalign::FlowPlan;
using geoalign::SplitMix64;
using geoalign::WeightedPointSet;

namespace oracle {

namespace {

// Spanning-tree enumerator over the complete bipartite graph with m sources
// and n sinks. For every spanning tree the unique conserving flow is found by
// stripping leaves; trees whose flow is nonnegative are polytope vertices.
class TreeEnumerator {
 public:
  TreeEnumerator(std::vector<double> supply, std::vector<double> demand,
                 std::vector<double> cost)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        v_(m_ + n_),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)) {
    for (int u = 0; u < m_; ++u)
      for (int w = 0; w < n_; ++w) edges_.push_back({u, m_ + w});
    double total = 0.0;
    for (double s : supply_) total += s;
    flow_tol_ = 1e-9 * total;
  }

  double run() {
    std::vector<int> parent(static_cast<std::size_t>(v_));
    for (int i = 0; i < v_; ++i) parent[static_cast<std::size_t>(i)] = i;
    chosen_.clear();
    recurse(0, 0, parent);
    return best_;
  }

 private:
  static int find(std::vector<int>& parent, int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }

  void recurse(std::size_t idx, int count, std::vector<int>& parent) {
    if (count == v_ - 1) {
      score_tree();
      return;
    }
    if (idx == edges_.size()) return;
    if (count + static_cast<int>(edges_.size() - idx) < v_ - 1) return;
    const auto [u, w] = edges_[idx];
    if (find(parent, u) != find(parent, w)) {
      std::vector<int> joined = parent;
      joined[static_cast<std::size_t>(find(joined, u))] = find(joined, w);
      chosen_.push_back(idx);
      recurse(idx + 1, count + 1, joined);
      chosen_.pop_back();
    }
    recurse(idx + 1, count, parent);
  }

  void score_tree() {
    // Leaf stripping: remove degree-1 nodes, forcing the incident edge's
    // flow to the node's remaining balance (supply positive, demand
    // negative after sign folding).
    const std::size_t t = chosen_.size();
    std::vector<double> balance(static_cast<std::size_t>(v_));
    for (int i = 0; i < m_; ++i)
      balance[static_cast<std::size_t>(i)] = supply_[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_; ++j)
      balance[static_cast<std::size_t>(m_ + j)] =
          -demand_[static_cast<std::size_t>(j)];
    std::vector<int> degree(static_cast<std::size_t>(v_), 0);
    std::vector<bool> removed_edge(t, false);
    for (std::size_t e = 0; e < t; ++e) {
      degree[static_cast<std::size_t>(edges_[chosen_[e]].first)]++;
      degree[static_cast<std::size_t>(edges_[chosen_[e]].second)]++;
    }
    double total_cost = 0.0;
    std::size_t removed = 0;
    while (removed < t) {
      bool stripped = false;
      for (std::size_t e = 0; e < t; ++e) {
        if (removed_edge[e]) continue;
        const auto [u, w] = edges_[chosen_[e]];
        int leaf = -1, other = -1;
        if (degree[static_cast<std::size_t>(u)] == 1) {
          leaf = u;
          other = w;
        } else if (degree[static_cast<std::size_t>(w)] == 1) {
          leaf = w;
          other = u;
        } else {
          continue;
        }
        // The stripped edge carries the leaf's whole remaining balance; in
        // source->sink direction that is +balance for a source-side leaf and
        // -balance for a sink-side leaf.
        const double bal = balance[static_cast<std::size_t>(leaf)];
        const double f = leaf < m_ ? bal : -bal;
        if (f < -flow_tol_) return;  // infeasible vertex
        total_cost += std::max(f, 0.0) * cost_[chosen_[e]];
        balance[static_cast<std::size_t>(other)] += bal;
        balance[static_cast<std::size_t>(leaf)] = 0.0;
        degree[static_cast<std::size_t>(leaf)]--;
        degree[static_cast<std::size_t>(other)]--;
        removed_edge[e] = true;
        ++removed;
        stripped = true;
      }
      if (!stripped) break;
    }
    best_ = std::min(best_, total_cost);
  }

  int m_, n_, v_;
  std::vector<double> supply_, demand_, cost_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::size_t> chosen_;
  double flow_tol_ = 0.0;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

double emd_by_enumeration(const WeightedPointSet& a, const WeightedPointSet& b) {
  const std::int64_t n1 = a.size(), n2 = b.size();
  double wa = 0.0, wb = 0.0;
  for (std::int64_t i = 0; i < n1; ++i) wa += a.weight(i);
  for (std::int64_t j = 0; j < n2; ++j) wb += b.weight(j);

  std::vector<double> supply(a.weights().begin(), a.weights().end());
  std::vector<double> demand(b.weights().begin(), b.weights().end());
  bool slack_source = false, slack_sink = false;
  if (wa > wb) {
    demand.push_back(wa - wb);
    slack_sink = true;
  } else if (wb > wa) {
    supply.push_back(wb - wa);
    slack_source = true;
  }
  const std::size_t m = supply.size(), n = demand.size();
  std::vector<double> cost(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (slack_source && i + 1 == m) continue;
      if (slack_sink && j + 1 == n) continue;
      cost[i * n + j] = geoalign::squared_distance(
          a.point(static_cast<std::int64_t>(i)),
          b.point(static_cast<std::int64_t>(j)));
    }
  TreeEnumerator enumerator(std::move(supply), std::move(demand),
                            std::move(cost));
  return enumerator.run() / std::min(wa, wb);
}

double exhaustive_kcenter_radius(const WeightedPointSet& p, std::int64_t k) {
  const std::int64_t n = p.size();
  if (k >= n) return 0.0;
  std::vector<std::int64_t> subset(static_cast<std::size_t>(k));
  double best = std::numeric_limits<double>::infinity();
  // Enumerate k-subsets in lexicographic order.
  for (std::int64_t i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
  while (true) {
    double radius_sq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::int64_t c : subset)
        nearest = std::min(nearest,
                           geoalign::squared_distance(p.point(i), p.point(c)));
      radius_sq = std::max(radius_sq, nearest);
    }
    best = std::min(best, radius_sq);
    // Next combination.
    std::int64_t pos = k - 1;
    while (pos >= 0 &&
           subset[static_cast<std::size_t>(pos)] == n - k + pos)
      --pos;
    if (pos < 0) break;
    ++subset[static_cast<std::size_t>(pos)];
    for (std::int64_t i = pos + 1; i < k; ++i)
      subset[static_cast<std::size_t>(i)] =
          subset[static_cast<std::size_t>(i - 1)] + 1;
  }
  return std::sqrt(best);
}

double rotation_grid_min(const WeightedPointSet& a, const WeightedPointSet& b,
                         const FlowPlan& flow, int angles) {
  // Optimal translation per angle aligns the flow-weighted centroids, so the
  // objective reduces to the centered residual.
  double mass = 0.0;
  double mu_a[2] = {0.0, 0.0}, mu_b[2] = {0.0, 0.0};
  for (const auto& e : flow.entries()) {
    mass += e.flow;
    for (int c = 0; c < 2; ++c) {
      mu_a[c] += e.flow * a.point(e.i)[static_cast<std::size_t>(c)];
      mu_b[c] += e.flow * b.point(e.j)[static_cast<std::size_t>(c)];
    }
  }
  for (int c = 0; c < 2; ++c) {
    mu_a[c] /= mass;
    mu_b[c] /= mass;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int g = 0; g < angles; ++g) {
    const double theta = 2.0 * std::numbers::pi * g / angles;
    const double co = std::cos(theta), si = std::sin(theta);
    double total = 0.0;
    for (const auto& e : flow.entries()) {
      const double ax = a.point(e.i)[0] - mu_a[0];
      const double ay = a.point(e.i)[1] - mu_a[1];
      const double bx = b.point(e.j)[0] - mu_b[0];
      const double by = b.point(e.j)[1] - mu_b[1];
      const double rx = ax - (co * bx - si * by);
      const double ry = ay - (si * bx + co * by);
      total += e.flow * (rx * rx + ry * ry);
    }
    best = std::min(best, total);
  }
  return best;
}

std::vector<double> materialized_cross_covariance(
    const WeightedPointSet& a, const WeightedPointSet& b, const FlowPlan& flow,
    const std::vector<double>& mu_a, const std::vector<double>& mu_b) {
  const std::size_t d = static_cast<std::size_t>(a.dim());
  const std::size_t cols = flow.entries().size();
  // One column per flow entry: sqrt(f) * centered point.
  std::vector<double> ma(d * cols), mb(d * cols);
  for (std::size_t e = 0; e < cols; ++e) {
    const auto& entry = flow.entries()[e];
    const double s = std::sqrt(entry.flow);
    for (std::size_t r = 0; r < d; ++r) {
      ma[r * cols + e] = s * (a.point(entry.i)[r] - mu_a[r]);
      mb[r * cols + e] = s * (b.point(entry.j)[r] - mu_b[r]);
    }
  }
  std::vector<double> out(d * d, 0.0);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      double sum = 0.0;
      for (std::size_t e = 0; e < cols; ++e)
        sum += ma[r * cols + e] * mb[c * cols + e];
      out[r * d + c] = sum;
    }
  return out;
}

WeightedPointSet random_set(SplitMix64& rng, std::int64_t n, std::int64_t d,
                            double scale, bool unit_weights) {
  std::vector<double> coords(static_cast<std::size_t>(n * d));
  for (auto& x : coords) x = scale * (2.0 * rng.next_double() - 1.0);
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (auto& w : weights)
    w = unit_weights ? 1.0 : 0.25 + rng.next_double();
  return WeightedPointSet(n, d, std::move(coords), std::move(weights));
}

std::vector<double> random_int_weights(SplitMix64& rng, std::int64_t n,
                                       int max_w) {
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (auto& w : weights)
    w = static_cast<double>(
        1 + rng.next_below(static_cast<std::uint64_t>(max_w)));
  return weights;
}

std::vector<double> random_rotation(SplitMix64& rng, std::int64_t d) {
  return geoalign::random_rotation_matrix(d, SplitMix64(rng.next_u64()));
}

std::vector<double> plane_rotation(std::int64_t d, std::int64_t axis0,
                                   std::int64_t axis1, double theta) {
  std::vector<double> r(static_cast<std::size_t>(d * d), 0.0);
  for (std::int64_t i = 0; i < d; ++i) r[static_cast<std::size_t>(i * d + i)] = 1.0;
  const double co = std::cos(theta), si = std::sin(theta);
  r[static_cast<std::size_t>(axis0 * d + axis0)] = co;
  r[static_cast<std::size_t>(axis0 * d + axis1)] = -si;
  r[static_cast<std::size_t>(axis1 * d + axis0)] = si;
  r[static_cast<std::size_t>(axis1 * d + axis1)] = co;
  return r;
}

}  // namespace oracle
