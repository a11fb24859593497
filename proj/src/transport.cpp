#include "transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <utility>

#include "errors.hpp"
#include "linalg.hpp"

namespace geoalign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ground costs. Each entry is sq|a| + sq|b| - 2 a.b (clamped at zero), the
// same arithmetic whether the matrix is materialized or rows are recomputed,
// so both modes produce identical solutions.
struct CostOracle {
  const WeightedPointSet* a;
  const WeightedPointSet* b;
  std::vector<double> sqa, sqb;
  std::vector<double> dense;  // n1*n2 when materialized, else empty
  bool materialized = false;
  double max_cost = 0.0;

  CostOracle(const WeightedPointSet& pa, const WeightedPointSet& pb,
             std::int64_t threshold)
      : a(&pa), b(&pb) {
    const std::int64_t n1 = pa.size(), n2 = pb.size(), d = pa.dim();
    sqa.resize(static_cast<std::size_t>(n1));
    sqb.resize(static_cast<std::size_t>(n2));
    for (std::int64_t i = 0; i < n1; ++i) {
      double s = 0.0;
      const auto p = pa.point(i);
      for (std::int64_t k = 0; k < d; ++k) s += p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
      sqa[static_cast<std::size_t>(i)] = s;
    }
    for (std::int64_t j = 0; j < n2; ++j) {
      double s = 0.0;
      const auto p = pb.point(j);
      for (std::int64_t k = 0; k < d; ++k) s += p[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
      sqb[static_cast<std::size_t>(j)] = s;
    }
    materialized = n1 * n2 <= threshold;
    if (materialized) {
      dense.resize(static_cast<std::size_t>(n1 * n2));
      for (std::int64_t i = 0; i < n1; ++i)
        fill_row(i, dense.data() + static_cast<std::size_t>(i * n2));
    }
  }

  double compute(std::int64_t i, std::int64_t j) const {
    const auto p = a->point(i);
    const auto q = b->point(j);
    double dot = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) dot += p[k] * q[k];
    const double c = sqa[static_cast<std::size_t>(i)] + sqb[static_cast<std::size_t>(j)] - 2.0 * dot;
    return c > 0.0 ? c : 0.0;
  }

  void fill_row(std::int64_t i, double* row) const {
    const std::int64_t n2 = b->size();
    for (std::int64_t j = 0; j < n2; ++j) row[j] = compute(i, j);
  }

  double at(std::int64_t i, std::int64_t j) const {
    if (materialized) return dense[static_cast<std::size_t>(i * b->size() + j)];
    return compute(i, j);
  }
};

double naive_cost(const WeightedPointSet& a, const WeightedPointSet& b,
                  std::int64_t i, std::int64_t j) {
  return squared_distance(a.point(i), b.point(j));
}

// Internal sparse flow: per sink, the list of (source, flow) with flow > 0.
using SinkFlows = std::vector<std::vector<std::pair<std::int32_t, double>>>;

double* find_flow(SinkFlows& fl, std::int32_t sink, std::int32_t src) {
  for (auto& e : fl[static_cast<std::size_t>(sink)])
    if (e.first == src) return &e.second;
  return nullptr;
}

void add_flow(SinkFlows& fl, std::int32_t sink, std::int32_t src, double delta) {
  if (double* f = find_flow(fl, sink, src)) {
    *f += delta;
    return;
  }
  fl[static_cast<std::size_t>(sink)].push_back({src, delta});
}

void drop_zeros(SinkFlows& fl, std::int32_t sink) {
  auto& v = fl[static_cast<std::size_t>(sink)];
  for (std::size_t t = 0; t < v.size();) {
    if (v[t].second == 0.0) {
      v[t] = v.back();
      v.pop_back();
    } else {
      ++t;
    }
  }
}

// Cancels cycles in the undirected support graph until it is a forest, so the
// returned plan is basic. Support edges of an optimal flow carry zero reduced
// cost, so pushing around a cycle leaves the cost unchanged up to roundoff;
// the push direction is chosen to never increase it.
void cancel_support_cycles(SinkFlows& flows, std::int64_t ns, std::int64_t nd,
                           const CostOracle& costs, bool slack_source,
                           bool slack_sink) {
  const std::int64_t v_count = ns + nd;
  auto arc_cost = [&](std::int32_t src, std::int32_t snk) -> double {
    if (slack_source && src == ns - 1) return 0.0;
    if (slack_sink && snk == nd - 1) return 0.0;
    return costs.at(src, snk);
  };

  while (true) {
    // Sorted adjacency: sources then sinks, neighbors ascending.
    std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(v_count));
    for (std::int32_t j = 0; j < nd; ++j) {
      auto& lst = flows[static_cast<std::size_t>(j)];
      std::sort(lst.begin(), lst.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      for (const auto& e : lst) {
        adj[static_cast<std::size_t>(e.first)].push_back(static_cast<std::int32_t>(ns + j));
        adj[static_cast<std::size_t>(ns + j)].push_back(e.first);
      }
    }

    // Iterative DFS looking for any cycle.
    std::vector<std::int32_t> parent(static_cast<std::size_t>(v_count), -2);
    std::vector<std::int32_t> cycle_nodes;
    for (std::int32_t root = 0; root < v_count && cycle_nodes.empty(); ++root) {
      if (parent[static_cast<std::size_t>(root)] != -2) continue;
      std::vector<std::pair<std::int32_t, std::size_t>> stack;
      parent[static_cast<std::size_t>(root)] = -1;
      stack.push_back({root, 0});
      while (!stack.empty() && cycle_nodes.empty()) {
        auto& [u, edge_idx] = stack.back();
        if (edge_idx >= adj[static_cast<std::size_t>(u)].size()) {
          stack.pop_back();
          continue;
        }
        const std::int32_t w = adj[static_cast<std::size_t>(u)][edge_idx++];
        if (w == parent[static_cast<std::size_t>(u)]) continue;
        if (parent[static_cast<std::size_t>(w)] == -2) {
          parent[static_cast<std::size_t>(w)] = u;
          stack.push_back({w, 0});
          continue;
        }
        // Back edge u-w: w is an ancestor of u on the DFS stack. The cycle is
        // w, u, parent(u), ..., child-of-w; consecutive nodes are adjacent.
        cycle_nodes.push_back(w);
        for (std::size_t s = stack.size(); s-- > 0;) {
          if (stack[s].first == w) break;
          cycle_nodes.push_back(stack[s].first);
        }
      }
    }
    if (cycle_nodes.empty()) return;

    const std::size_t len = cycle_nodes.size();  // even, alternating sides
    // Signed cost of pushing one unit along the traversal orientation.
    double signed_cost = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const std::int32_t u = cycle_nodes[t];
      const std::int32_t w = cycle_nodes[(t + 1) % len];
      if (u < ns)
        signed_cost += arc_cost(u, static_cast<std::int32_t>(w - ns));
      else
        signed_cost -= arc_cost(w, static_cast<std::int32_t>(u - ns));
    }
    const bool along = signed_cost <= 0.0;
    double delta = kInf;
    for (std::size_t t = 0; t < len; ++t) {
      const std::int32_t u = cycle_nodes[t];
      const std::int32_t w = cycle_nodes[(t + 1) % len];
      const bool decreasing = along ? (u >= ns) : (u < ns);
      if (!decreasing) continue;
      const std::int32_t src = u < ns ? u : w;
      const std::int32_t snk = u < ns ? static_cast<std::int32_t>(w - ns)
                                      : static_cast<std::int32_t>(u - ns);
      const double* f = find_flow(flows, snk, src);
      if (f && *f < delta) delta = *f;
    }
    if (!(delta > 0.0) || delta == kInf)
      fail(ErrorKind::numeric, "cycle cancellation failed to make progress");
    for (std::size_t t = 0; t < len; ++t) {
      const std::int32_t u = cycle_nodes[t];
      const std::int32_t w = cycle_nodes[(t + 1) % len];
      const bool decreasing = along ? (u >= ns) : (u < ns);
      const std::int32_t src = u < ns ? u : w;
      const std::int32_t snk = u < ns ? static_cast<std::int32_t>(w - ns)
                                      : static_cast<std::int32_t>(u - ns);
      double* f = find_flow(flows, snk, src);
      if (!f) {
        if (decreasing) fail(ErrorKind::numeric, "cycle cancellation lost an arc");
        add_flow(flows, snk, src, 0.0);
        f = find_flow(flows, snk, src);
      }
      if (decreasing) {
        *f = (*f == delta) ? 0.0 : *f - delta;
      } else {
        *f += delta;
      }
    }
    for (std::int32_t j = 0; j < nd; ++j) drop_zeros(flows, j);
  }
}

}  // namespace

FlowPlan::FlowPlan(std::int64_t n1, std::int64_t n2, std::vector<FlowEntry> entries)
    : n1_(n1), n2_(n2) {
  if (n1_ < 1 || n2_ < 1)
    fail(ErrorKind::invalid_argument, "flow plan needs n1 >= 1 and n2 >= 1");
  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.i < 0 || e.i >= n1_ || e.j < 0 || e.j >= n2_)
      fail(ErrorKind::invalid_argument,
           "flow entry (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
               ") out of range");
    if (!std::isfinite(e.flow) || e.flow < 0.0)
      fail(ErrorKind::invalid_argument,
           "flow entry (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
               ") must be finite and >= 0");
    if (e.flow > 0.0) entries_.push_back(e);
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const FlowEntry& x, const FlowEntry& y) {
              return x.i < y.i || (x.i == y.i && x.j < y.j);
            });
  for (std::size_t t = 1; t < entries_.size(); ++t)
    if (entries_[t].i == entries_[t - 1].i && entries_[t].j == entries_[t - 1].j)
      fail(ErrorKind::invalid_argument,
           "duplicate flow entry (" + std::to_string(entries_[t].i) + ", " +
               std::to_string(entries_[t].j) + ")");
  CompensatedSum total;
  for (const auto& e : entries_) total.add(e.flow);
  total_flow_ = total.value();
}

EmdSolution solve_emd(const WeightedPointSet& a, const WeightedPointSet& b,
                      const EmdOptions& opts) {
  if (a.dim() != b.dim())
    fail(ErrorKind::dimension_mismatch,
         "solve_emd: dimensions " + std::to_string(a.dim()) + " vs " +
             std::to_string(b.dim()));
  const std::int64_t n1 = a.size(), n2 = b.size();
  if (n1 > (std::int64_t(1) << 30) || n2 > (std::int64_t(1) << 30))
    fail(ErrorKind::invalid_argument, "solve_emd: set too large");
  const double wa = a.total_weight(), wb = b.total_weight();
  if (!(wa > 0.0) || !(wb > 0.0))
    fail(ErrorKind::invalid_argument, "solve_emd: total weights must be positive");

  CostOracle costs(a, b, opts.dense_threshold);

  // Unequal totals are balanced by a disposal node on the heavier side whose
  // arcs carry zero ground cost; the optimum of the balanced problem
  // restricted to real arcs is the free-disposal optimum. The surplus is
  // placed during initialization on the columns (or rows) that are most
  // expensive under the starting duals, with the potential adjustment below
  // that keeps every residual reduced cost nonnegative, so the disposal node
  // never enters the augmentation loop as a residual endpoint; phases reroute
  // its mass through zero-cost arcs wherever the placement was not optimal.
  // Disposal entries never reach the returned plan.
  const bool slack_src = wb > wa;  // disposal supplies the sinks' surplus capacity
  const bool slack_snk = wa > wb;  // disposal absorbs the sources' surplus supply
  const std::int64_t ns = n1 + (slack_src ? 1 : 0);
  const std::int64_t nd = n2 + (slack_snk ? 1 : 0);
  const std::int64_t v_count = ns + nd;
  const double surplus = slack_src ? wb - wa : (slack_snk ? wa - wb : 0.0);

  std::vector<double> sup(static_cast<std::size_t>(ns));
  std::vector<double> dem(static_cast<std::size_t>(nd));
  for (std::int64_t i = 0; i < n1; ++i) sup[static_cast<std::size_t>(i)] = a.weight(i);
  for (std::int64_t j = 0; j < n2; ++j) dem[static_cast<std::size_t>(j)] = b.weight(j);
  if (slack_src) sup[static_cast<std::size_t>(ns - 1)] = surplus;
  if (slack_snk) dem[static_cast<std::size_t>(nd - 1)] = surplus;

  auto arc_cost = [&](std::int64_t i, std::int64_t j) -> double {
    if (slack_src && i == ns - 1) return 0.0;
    if (slack_snk && j == nd - 1) return 0.0;
    return costs.at(i, j);
  };

  // Node potentials; reduced cost of forward arc (i -> j) is
  // c_ij + pot[src i] - pot[sink j], kept nonnegative throughout.
  std::vector<double> pot(static_cast<std::size_t>(v_count), 0.0);
  if (opts.warm_potential_a != nullptr) {
    if (static_cast<std::int64_t>(opts.warm_potential_a->size()) != n1)
      fail(ErrorKind::invalid_argument,
           "solve_emd: warm-start potentials must match the first set");
    for (std::int64_t i = 0; i < n1; ++i)
      pot[static_cast<std::size_t>(i)] =
          -(*opts.warm_potential_a)[static_cast<std::size_t>(i)];
  }

  // Column-minima start: each sink potential is its cheapest inflow against
  // the current source potentials (zero on a cold start), so every reduced
  // cost begins nonnegative; greedy saturation of tight arcs follows.
  double max_real_cost = 0.0;
  {
    std::vector<double> colmin(static_cast<std::size_t>(n2), kInf);
    std::vector<double> row_buf(costs.materialized ? 0 : static_cast<std::size_t>(n2));
    for (std::int64_t i = 0; i < n1; ++i) {
      const double* row;
      if (costs.materialized) {
        row = costs.dense.data() + static_cast<std::size_t>(i * n2);
      } else {
        costs.fill_row(i, row_buf.data());
        row = row_buf.data();
      }
      const double pi = pot[static_cast<std::size_t>(i)];
      for (std::int64_t j = 0; j < n2; ++j) {
        const double v = row[j] + pi;
        if (v < colmin[static_cast<std::size_t>(j)]) colmin[static_cast<std::size_t>(j)] = v;
        if (row[j] > max_real_cost) max_real_cost = row[j];
      }
    }
    for (std::int64_t j = 0; j < n2; ++j)
      pot[static_cast<std::size_t>(ns + j)] = colmin[static_cast<std::size_t>(j)];
  }
  costs.max_cost = max_real_cost;

  SinkFlows flows(static_cast<std::size_t>(nd));
  std::int64_t supply_left = ns;   // sources with sup > 0
  std::int64_t deficit_left = nd;  // sinks with dem > 0

  auto push = [&](std::int32_t src, std::int32_t snk, double delta) {
    add_flow(flows, snk, src, delta);
    auto& s = sup[static_cast<std::size_t>(src)];
    auto& t = dem[static_cast<std::size_t>(snk)];
    s = (s == delta) ? 0.0 : s - delta;
    t = (t == delta) ? 0.0 : t - delta;
    if (s == 0.0) --supply_left;
    if (t == 0.0) --deficit_left;
  };

  if (slack_src) {
    // Disposal mass fills the highest-potential columns first. Filled columns
    // drop to the boundary potential: lowering a sink potential only raises
    // real reduced costs, and it makes the zero-cost disposal arcs tight on
    // filled columns and nonnegative on the rest.
    std::vector<std::int32_t> order(static_cast<std::size_t>(n2));
    for (std::int64_t j = 0; j < n2; ++j)
      order[static_cast<std::size_t>(j)] = static_cast<std::int32_t>(j);
    std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
      const double px = pot[static_cast<std::size_t>(ns + x)];
      const double py = pot[static_cast<std::size_t>(ns + y)];
      return px > py || (px == py && x < y);
    });
    double rem = surplus;
    double theta = pot[static_cast<std::size_t>(ns + order[0])];
    for (std::int32_t j : order) {
      if (!(rem > 0.0)) break;
      theta = pot[static_cast<std::size_t>(ns + j)];
      const double amt = std::min(dem[static_cast<std::size_t>(j)], rem);
      push(static_cast<std::int32_t>(ns - 1), j, amt);
      rem = (rem == amt) ? 0.0 : rem - amt;
    }
    for (std::int32_t j : order) {
      if (!(pot[static_cast<std::size_t>(ns + j)] > theta)) break;
      pot[static_cast<std::size_t>(ns + j)] = theta;
    }
    pot[static_cast<std::size_t>(ns - 1)] = theta;
  }

  // Row reduction: lower each source potential by its smallest reduced cost
  // (nonnegative, so feasibility is preserved) until some arc out of it is
  // tight. On a cold start sources that provide a column minimum stay at
  // zero, so the column-minima arcs remain tight; every source gains a tight
  // arc, which keeps early augmenting paths short.
  std::vector<std::int32_t> row_argmin(static_cast<std::size_t>(n1), -1);
  std::vector<char> pot_off(static_cast<std::size_t>(n1), 0);  // reduction undone below
  {
    std::vector<double> row_buf(costs.materialized ? 0 : static_cast<std::size_t>(n2));
    for (std::int64_t i = 0; i < n1; ++i) {
      const double* row;
      if (costs.materialized) {
        row = costs.dense.data() + static_cast<std::size_t>(i * n2);
      } else {
        costs.fill_row(i, row_buf.data());
        row = row_buf.data();
      }
      const double pi = pot[static_cast<std::size_t>(i)];
      double m = kInf;
      std::int64_t arg = -1;
      for (std::int64_t j = 0; j < n2; ++j) {
        const double v = row[j] + pi - pot[static_cast<std::size_t>(ns + j)];
        if (v < m) {
          m = v;
          arg = j;
        }
      }
      pot[static_cast<std::size_t>(i)] = pi - m;
      row_argmin[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(arg);
    }
  }

  if (slack_snk) {
    // Disposal capacity drains the lowest-potential rows first. Drained rows
    // rise to the boundary potential: raising a source potential only raises
    // real reduced costs (no real flow exists yet), and it makes the
    // zero-cost disposal arcs tight on drained rows and nonnegative on the
    // rest. Raised rows lose their tight arc, so the greedy passes skip them.
    std::vector<std::int32_t> order(static_cast<std::size_t>(n1));
    for (std::int64_t i = 0; i < n1; ++i)
      order[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
      const double px = pot[static_cast<std::size_t>(x)];
      const double py = pot[static_cast<std::size_t>(y)];
      return px < py || (px == py && x < y);
    });
    double rem = surplus;
    double theta = pot[static_cast<std::size_t>(order[0])];
    for (std::int32_t i : order) {
      if (!(rem > 0.0)) break;
      theta = pot[static_cast<std::size_t>(i)];
      const double amt = std::min(sup[static_cast<std::size_t>(i)], rem);
      push(i, static_cast<std::int32_t>(nd - 1), amt);
      rem = (rem == amt) ? 0.0 : rem - amt;
    }
    for (std::int32_t i : order) {
      if (!(pot[static_cast<std::size_t>(i)] < theta)) break;
      pot[static_cast<std::size_t>(i)] = theta;
      pot_off[static_cast<std::size_t>(i)] = 1;
    }
    pot[static_cast<std::size_t>(ns + nd - 1)] = theta;
  }

  for (std::int64_t j = 0; j < n2; ++j) {
    const double m = pot[static_cast<std::size_t>(ns + j)];
    for (std::int64_t i = 0; i < n1 && dem[static_cast<std::size_t>(j)] > 0.0; ++i) {
      if (sup[static_cast<std::size_t>(i)] <= 0.0) continue;
      if (pot[static_cast<std::size_t>(i)] != 0.0) continue;  // arc below is tight only then
      if (costs.at(i, j) != m) continue;
      push(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
           std::min(sup[static_cast<std::size_t>(i)], dem[static_cast<std::size_t>(j)]));
    }
  }
  for (std::int64_t i = 0; i < n1; ++i) {
    if (sup[static_cast<std::size_t>(i)] <= 0.0 || pot_off[static_cast<std::size_t>(i)]) continue;
    const std::int32_t j = row_argmin[static_cast<std::size_t>(i)];
    if (j < 0 || dem[static_cast<std::size_t>(j)] <= 0.0) continue;
    push(static_cast<std::int32_t>(i), j,
         std::min(sup[static_cast<std::size_t>(i)], dem[static_cast<std::size_t>(j)]));
  }

  // Shortest augmenting paths until every sink is satisfied, organized in
  // phases. A phase labels the residual graph once with a multi-source
  // Dijkstra over reduced costs (every source that still has supply starts at
  // distance zero; the heap pops by (distance, node index), so degenerate
  // ties always resolve to the lowest index), then augments along as many
  // label-tight paths as the labels admit before relabeling. An arc is used
  // only when its endpoint labels certify that it lies on a shortest path, so
  // every unit of mass still travels along a shortest augmenting path.
  std::vector<double> dist(static_cast<std::size_t>(v_count), kInf);
  std::vector<std::int32_t> pred(static_cast<std::size_t>(v_count), -1);
  std::vector<char> state(static_cast<std::size_t>(v_count), 0);  // 0 new, 1 reached, 2 settled
  std::vector<char> dead(static_cast<std::size_t>(v_count), 0);   // no onward path this phase
  std::vector<char> onstk(static_cast<std::size_t>(v_count), 0);
  std::vector<std::int32_t> touched;
  // Lazy heap: stale pairs (old distance or already-settled node) are skipped.
  std::priority_queue<std::pair<double, std::int32_t>,
                      std::vector<std::pair<double, std::int32_t>>,
                      std::greater<>>
      frontier;
  std::vector<double> scratch_row(costs.materialized ? 0 : static_cast<std::size_t>(n2));
  constexpr std::int64_t kChunk = 64;
  std::vector<double> cand(static_cast<std::size_t>(n2));  // candidate labels, one per sink
  std::vector<char> chunk_flag(static_cast<std::size_t>((n2 + kChunk - 1) / kChunk));
  std::vector<std::int32_t> cur_fwd(static_cast<std::size_t>(ns));  // next sink to try, per source
  std::vector<std::int32_t> cur_bwd(static_cast<std::size_t>(nd));  // next inflow entry, per sink
  std::vector<std::int32_t> frozen(static_cast<std::size_t>(nd));   // inflow entries at phase start
  struct Step {
    std::int32_t node;   // alternating source / sink along the probe path
    std::int32_t entry;  // inflow entry cancelled by a sink -> source step, else -1
  };
  std::vector<Step> stack;

  const std::int64_t max_augmentations = 64 * (v_count + 16);
  std::int64_t augmentations = 0;
  std::int64_t stat_phases = 0, stat_settles = 0, stat_src_settles = 0;
  std::int64_t stat_fallbacks = 0;
  const bool stat_on = std::getenv("GEOALIGN_EMD_STATS") != nullptr;

  while (deficit_left > 0 && supply_left > 0) {
    if (++augmentations > max_augmentations)
      fail(ErrorKind::numeric, "solve_emd: augmentation limit exceeded");
    ++stat_phases;
    const std::int64_t phase_settles_before = stat_settles;
    const std::int64_t phase_src_settles_before = stat_src_settles;
    std::size_t stat_max_stack = 0;

    for (std::int32_t t : touched) {
      dist[static_cast<std::size_t>(t)] = kInf;
      pred[static_cast<std::size_t>(t)] = -1;
      state[static_cast<std::size_t>(t)] = 0;
      dead[static_cast<std::size_t>(t)] = 0;
    }
    touched.clear();
    frontier = {};

    for (std::int64_t i = 0; i < ns; ++i) {
      if (sup[static_cast<std::size_t>(i)] > 0.0) {
        dist[static_cast<std::size_t>(i)] = 0.0;
        state[static_cast<std::size_t>(i)] = 1;
        frontier.push({0.0, static_cast<std::int32_t>(i)});
        touched.push_back(static_cast<std::int32_t>(i));
      }
    }

    // Labeling stops once enough deficient sinks are settled to feed the push
    // pass; every node settled by then carries a final shortest distance, and
    // the relabeling below never moves unsettled potentials, so cutting the
    // search short affects speed only. The budget scales with the residual
    // supply because that bounds how many disjoint paths a phase can use.
    const std::int64_t settle_budget =
        std::min<std::int64_t>(deficit_left, 8 + 2 * supply_left);
    std::int64_t settled_def = 0;

    while (!frontier.empty()) {
      const auto [du_key, u] = frontier.top();
      frontier.pop();
      if (state[static_cast<std::size_t>(u)] == 2 ||
          du_key != dist[static_cast<std::size_t>(u)])
        continue;  // stale heap entry
      state[static_cast<std::size_t>(u)] = 2;
      ++stat_settles;
      if (u < ns) ++stat_src_settles;
      if (u >= ns && dem[static_cast<std::size_t>(u - ns)] > 0.0 &&
          ++settled_def >= settle_budget)
        break;
      const double du = dist[static_cast<std::size_t>(u)];
      auto relax = [&](std::int32_t v, double ndist) {
        if (state[static_cast<std::size_t>(v)] == 2) return;
        if (state[static_cast<std::size_t>(v)] == 0) {
          dist[static_cast<std::size_t>(v)] = ndist;
          pred[static_cast<std::size_t>(v)] = u;
          state[static_cast<std::size_t>(v)] = 1;
          frontier.push({ndist, v});
          touched.push_back(v);
        } else if (ndist < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = ndist;
          pred[static_cast<std::size_t>(v)] = u;
          frontier.push({ndist, v});
        }
      };
      if (u < ns) {
        const double pu = pot[static_cast<std::size_t>(u)];
        if (slack_src && u == ns - 1) {
          for (std::int64_t j = 0; j < n2; ++j) {
            double rc = pu - pot[static_cast<std::size_t>(ns + j)];
            if (rc < 0.0) rc = 0.0;
            relax(static_cast<std::int32_t>(ns + j), du + rc);
          }
        } else {
          const double* row;
          if (costs.materialized) {
            row = costs.dense.data() + static_cast<std::size_t>(std::int64_t(u) * n2);
          } else {
            costs.fill_row(u, scratch_row.data());
            row = scratch_row.data();
          }
          // Row scan in two tiers: a branch-free sweep computes every
          // candidate label and flags the chunks that improve some sink; only
          // flagged chunks take the update path (predecessor, heap). The
          // arithmetic matches the tightness tests below term for term, and
          // relax() re-checks each candidate, so the tiers only skip work.
          {
            const double* __restrict rowp = row;
            const double* __restrict spot =
                pot.data() + static_cast<std::size_t>(ns);
            const double* __restrict sdist =
                dist.data() + static_cast<std::size_t>(ns);
            double* __restrict candp = cand.data();
            char* __restrict flagp = chunk_flag.data();
            for (std::int64_t j0 = 0, c = 0; j0 < n2; j0 += kChunk, ++c) {
              const std::int64_t j1 = std::min<std::int64_t>(j0 + kChunk, n2);
              int any = 0;
              for (std::int64_t j = j0; j < j1; ++j) {
                double rc = rowp[j] + pu - spot[j];
                if (rc < 0.0) rc = 0.0;
                const double cnd = du + rc;
                candp[j] = cnd;
                any |= (cnd < sdist[j]);
              }
              flagp[c] = static_cast<char>(any);
            }
          }
          for (std::int64_t j0 = 0, c = 0; j0 < n2; j0 += kChunk, ++c) {
            if (!chunk_flag[static_cast<std::size_t>(c)]) continue;
            const std::int64_t j1 = std::min<std::int64_t>(j0 + kChunk, n2);
            for (std::int64_t j = j0; j < j1; ++j) {
              if (cand[static_cast<std::size_t>(j)] <
                  dist[static_cast<std::size_t>(ns + j)])
                relax(static_cast<std::int32_t>(ns + j),
                      cand[static_cast<std::size_t>(j)]);
            }
          }
          if (slack_snk) {
            double rc = pu - pot[static_cast<std::size_t>(ns + nd - 1)];
            if (rc < 0.0) rc = 0.0;
            relax(static_cast<std::int32_t>(ns + nd - 1), du + rc);
          }
        }
      } else {
        const std::int32_t j = static_cast<std::int32_t>(u - ns);
        const double pu = pot[static_cast<std::size_t>(u)];
        for (const auto& e : flows[static_cast<std::size_t>(j)]) {
          double rc = -arc_cost(e.first, j) + pu - pot[static_cast<std::size_t>(e.first)];
          if (rc < 0.0) rc = 0.0;
          relax(e.first, du + rc);
        }
      }
    }

    // Push pass: depth-first probes along label-tight residual arcs. The
    // tightness tests below repeat the relax arithmetic verbatim, so they
    // hold exactly for every arc that produced or matched a label.
    std::fill(cur_fwd.begin(), cur_fwd.end(), 0);
    std::fill(cur_bwd.begin(), cur_bwd.end(), 0);
    for (std::int64_t j = 0; j < nd; ++j)
      frozen[static_cast<std::size_t>(j)] =
          static_cast<std::int32_t>(flows[static_cast<std::size_t>(j)].size());

    auto fwd_tight = [&](std::int32_t i, std::int32_t j) -> bool {
      if (state[static_cast<std::size_t>(ns + j)] != 2) return false;
      double rc = arc_cost(i, j) + pot[static_cast<std::size_t>(i)] -
                  pot[static_cast<std::size_t>(ns + j)];
      if (rc < 0.0) rc = 0.0;
      return dist[static_cast<std::size_t>(ns + j)] == dist[static_cast<std::size_t>(i)] + rc;
    };
    auto bwd_tight = [&](std::int32_t j, std::int32_t i) -> bool {
      if (state[static_cast<std::size_t>(i)] != 2) return false;
      double rc = -arc_cost(i, j) + pot[static_cast<std::size_t>(ns + j)] -
                  pot[static_cast<std::size_t>(i)];
      if (rc < 0.0) rc = 0.0;
      return dist[static_cast<std::size_t>(i)] == dist[static_cast<std::size_t>(ns + j)] + rc;
    };

    bool pushed_any = false;
    std::int64_t paths_this_phase = 0;
    for (std::int64_t si = 0; si < ns && deficit_left > 0; ++si) {
      if (!(sup[static_cast<std::size_t>(si)] > 0.0) || dead[static_cast<std::size_t>(si)])
        continue;
      const auto s = static_cast<std::int32_t>(si);
      if (state[static_cast<std::size_t>(s)] != 2) continue;
      while (sup[static_cast<std::size_t>(si)] > 0.0 && deficit_left > 0) {
        stack.clear();
        stack.push_back({s, -1});
        onstk[static_cast<std::size_t>(s)] = 1;
        std::int32_t terminal = -1;
        while (!stack.empty() && terminal < 0) {
          const std::int32_t u = stack.back().node;
          if (u < ns) {
            std::int32_t& cj = cur_fwd[static_cast<std::size_t>(u)];
            bool moved = false;
            while (cj < nd) {
              const auto v = static_cast<std::int32_t>(ns + cj);
              if (!dead[static_cast<std::size_t>(v)] && !onstk[static_cast<std::size_t>(v)] &&
                  fwd_tight(u, cj)) {
                if (dem[static_cast<std::size_t>(cj)] > 0.0) {
                  terminal = v;  // cur stays put: the arc can carry later paths
                  break;
                }
                if (cur_bwd[static_cast<std::size_t>(cj)] < frozen[static_cast<std::size_t>(cj)]) {
                  stack.push_back({v, -1});
                  onstk[static_cast<std::size_t>(v)] = 1;
                  moved = true;
                  break;
                }
              }
              ++cj;
            }
            if (terminal >= 0 || moved) continue;
            dead[static_cast<std::size_t>(u)] = 1;  // forward arcs exhausted
            onstk[static_cast<std::size_t>(u)] = 0;
            stack.pop_back();
            if (!stack.empty())
              ++cur_bwd[static_cast<std::size_t>(stack.back().node - ns)];
          } else {
            const auto j = static_cast<std::int32_t>(u - ns);
            std::int32_t& ce = cur_bwd[static_cast<std::size_t>(j)];
            auto& lst = flows[static_cast<std::size_t>(j)];
            bool moved = false;
            while (ce < frozen[static_cast<std::size_t>(j)]) {
              const std::int32_t is = lst[static_cast<std::size_t>(ce)].first;
              if (lst[static_cast<std::size_t>(ce)].second > 0.0 &&
                  !dead[static_cast<std::size_t>(is)] && !onstk[static_cast<std::size_t>(is)] &&
                  bwd_tight(j, is)) {
                stack.push_back({is, ce});
                onstk[static_cast<std::size_t>(is)] = 1;
                moved = true;
                break;
              }
              ++ce;
            }
            if (moved) continue;
            dead[static_cast<std::size_t>(u)] = 1;  // inflow entries exhausted
            onstk[static_cast<std::size_t>(u)] = 0;
            stack.pop_back();
            if (!stack.empty()) ++cur_fwd[static_cast<std::size_t>(stack.back().node)];
          }
        }
        if (terminal < 0) break;  // no more label-tight paths from this source

        // Bottleneck: start supply, end deficit, and every cancelled flow.
        double delta = std::min(sup[static_cast<std::size_t>(si)],
                                dem[static_cast<std::size_t>(terminal - ns)]);
        for (std::size_t k = 2; k < stack.size(); k += 2)
          delta = std::min(delta,
                           flows[static_cast<std::size_t>(stack[k - 1].node - ns)]
                                [static_cast<std::size_t>(stack[k].entry)]
                                    .second);
        if (!(delta > 0.0))
          fail(ErrorKind::numeric, "solve_emd: zero augmentation");
        if (++augmentations > max_augmentations)
          fail(ErrorKind::numeric, "solve_emd: augmentation limit exceeded");

        for (std::size_t k = 0; k + 1 < stack.size(); k += 2)
          add_flow(flows, static_cast<std::int32_t>(stack[k + 1].node - ns), stack[k].node,
                   delta);
        add_flow(flows, static_cast<std::int32_t>(terminal - ns), stack.back().node, delta);
        for (std::size_t k = 2; k < stack.size(); k += 2) {
          double& f = flows[static_cast<std::size_t>(stack[k - 1].node - ns)]
                           [static_cast<std::size_t>(stack[k].entry)]
                               .second;
          f = (f == delta) ? 0.0 : f - delta;  // zero entries are dropped at phase end
        }
        auto& s_rem = sup[static_cast<std::size_t>(si)];
        auto& t_rem = dem[static_cast<std::size_t>(terminal - ns)];
        s_rem = (s_rem == delta) ? 0.0 : s_rem - delta;
        t_rem = (t_rem == delta) ? 0.0 : t_rem - delta;
        if (s_rem == 0.0) --supply_left;
        if (t_rem == 0.0) --deficit_left;
        pushed_any = true;
        ++paths_this_phase;
        stat_max_stack = std::max(stat_max_stack, stack.size());
        for (const Step& st : stack) onstk[static_cast<std::size_t>(st.node)] = 0;
      }
    }

    if (stat_on && (stat_phases <= 30 || stat_phases % 100 == 0))
      std::fprintf(stderr,
                   "[phase %lld] paths=%lld deficit_left=%lld supply_left=%lld settles=%lld "
                   "src_settles=%lld max_stack=%zu\n",
                   (long long)stat_phases, (long long)paths_this_phase, (long long)deficit_left,
                   (long long)supply_left, (long long)(stat_settles - phase_settles_before),
                   (long long)(stat_src_settles - phase_src_settles_before), stat_max_stack);
    if (pushed_any) {
      for (std::int64_t j = 0; j < nd; ++j)
        drop_zeros(flows, static_cast<std::int32_t>(j));
    } else {
      ++stat_fallbacks;
      // The probe pruning is conservative and can miss a path; fall back to
      // one augmentation along the predecessor tree toward the nearest
      // deficient sink, which always exists while deficit remains.
      std::int32_t target = -1;
      for (std::int64_t j = 0; j < nd; ++j) {
        if (!(dem[static_cast<std::size_t>(j)] > 0.0)) continue;
        const auto v = static_cast<std::int32_t>(ns + j);
        if (state[static_cast<std::size_t>(v)] != 2) continue;
        if (target < 0 ||
            dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(target)])
          target = v;
      }
      if (target < 0)
        fail(ErrorKind::numeric, "solve_emd: no augmenting path found");

      double delta = dem[static_cast<std::size_t>(target - ns)];
      std::int32_t node = target;
      while (true) {
        const std::int32_t prev = pred[static_cast<std::size_t>(node)];
        if (prev < 0) {
          delta = std::min(delta, sup[static_cast<std::size_t>(node)]);
          break;
        }
        if (node < ns) {  // sink -> source step: cancels flow (node, prev)
          const double* f = find_flow(flows, static_cast<std::int32_t>(prev - ns), node);
          delta = std::min(delta, f ? *f : 0.0);
        }
        node = prev;
      }
      if (!(delta > 0.0))
        fail(ErrorKind::numeric, "solve_emd: zero augmentation");

      node = target;
      while (true) {
        const std::int32_t prev = pred[static_cast<std::size_t>(node)];
        if (prev < 0) break;
        if (node >= ns) {
          add_flow(flows, static_cast<std::int32_t>(node - ns), prev, delta);
        } else {
          double* f = find_flow(flows, static_cast<std::int32_t>(prev - ns), node);
          *f = (*f == delta) ? 0.0 : *f - delta;
          if (*f == 0.0) drop_zeros(flows, static_cast<std::int32_t>(prev - ns));
        }
        node = prev;
      }
      auto& s_rem = sup[static_cast<std::size_t>(node)];
      auto& t_rem = dem[static_cast<std::size_t>(target - ns)];
      s_rem = (s_rem == delta) ? 0.0 : s_rem - delta;
      t_rem = (t_rem == delta) ? 0.0 : t_rem - delta;
      if (s_rem == 0.0) --supply_left;
      if (t_rem == 0.0) --deficit_left;
    }

    // Relabel: shifting every settled node's potential by its label (offset
    // so shifts are nonpositive) keeps all residual reduced costs nonnegative
    // and makes every arc that carried new flow tight.
    double d_max = 0.0;
    for (std::int32_t w : touched)
      if (state[static_cast<std::size_t>(w)] == 2 && dist[static_cast<std::size_t>(w)] > d_max)
        d_max = dist[static_cast<std::size_t>(w)];
    for (std::int32_t w : touched)
      if (state[static_cast<std::size_t>(w)] == 2)
        pot[static_cast<std::size_t>(w)] += dist[static_cast<std::size_t>(w)] - d_max;
  }

  if (stat_on)
    std::fprintf(stderr, "[emd-stats] n1=%lld n2=%lld phases=%lld aug=%lld settles=%lld src_settles=%lld fallbacks=%lld\n",
                 (long long)n1, (long long)n2, (long long)stat_phases,
                 (long long)augmentations, (long long)stat_settles, (long long)stat_src_settles,
                 (long long)stat_fallbacks);

  // With the disposal node the problem is balanced, so both sides must be
  // exhausted; any residue is accumulated rounding.
  double residue = 0.0;
  for (std::int64_t i = 0; i < ns; ++i)
    residue = std::max(residue, sup[static_cast<std::size_t>(i)]);
  for (std::int64_t j = 0; j < nd; ++j)
    residue = std::max(residue, dem[static_cast<std::size_t>(j)]);
  if (residue > 1e-12 * std::max(wa, wb))
    fail(ErrorKind::numeric, "solve_emd: unshipped mass " + std::to_string(residue));

  cancel_support_cycles(flows, ns, nd, costs, slack_src, slack_snk);

  std::vector<FlowEntry> entries;
  for (std::int64_t j = 0; j < n2; ++j)
    for (const auto& e : flows[static_cast<std::size_t>(j)])
      if (e.first < n1 && e.second > 0.0)
        entries.push_back({e.first, j, e.second});
  FlowPlan plan(n1, n2, std::move(entries));

  EmdSolution sol{std::move(plan), 0.0, {}, {}};
  sol.potential_a.resize(static_cast<std::size_t>(n1));
  sol.potential_b.resize(static_cast<std::size_t>(n2));
  for (std::int64_t i = 0; i < n1; ++i)
    sol.potential_a[static_cast<std::size_t>(i)] = -pot[static_cast<std::size_t>(i)];
  for (std::int64_t j = 0; j < n2; ++j)
    sol.potential_b[static_cast<std::size_t>(j)] = pot[static_cast<std::size_t>(ns + j)];
  sol.value = emd_cost(sol.plan, a, b);
  return sol;
}

std::string check_flow(const FlowPlan& plan, const WeightedPointSet& a,
                       const WeightedPointSet& b) {
  if (plan.n1() != a.size() || plan.n2() != b.size())
    return "plan shape (" + std::to_string(plan.n1()) + ", " +
           std::to_string(plan.n2()) + ") does not match sets (" +
           std::to_string(a.size()) + ", " + std::to_string(b.size()) + ")";
  if (a.dim() != b.dim())
    return "sets have different dimensions " + std::to_string(a.dim()) +
           " vs " + std::to_string(b.dim());
  const double min_w = std::min(a.total_weight(), b.total_weight());
  const double slack = kMarginalSlack * min_w;

  std::vector<double> row_sum(static_cast<std::size_t>(a.size()), 0.0);
  std::vector<double> col_sum(static_cast<std::size_t>(b.size()), 0.0);
  for (const auto& e : plan.entries()) {
    row_sum[static_cast<std::size_t>(e.i)] += e.flow;
    col_sum[static_cast<std::size_t>(e.j)] += e.flow;
  }
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (row_sum[static_cast<std::size_t>(i)] > a.weight(i) + slack)
      return "row " + std::to_string(i) + " ships " +
             std::to_string(row_sum[static_cast<std::size_t>(i)]) +
             ", more than its weight " + std::to_string(a.weight(i));
  for (std::int64_t j = 0; j < b.size(); ++j)
    if (col_sum[static_cast<std::size_t>(j)] > b.weight(j) + slack)
      return "column " + std::to_string(j) + " receives " +
             std::to_string(col_sum[static_cast<std::size_t>(j)]) +
             ", more than its weight " + std::to_string(b.weight(j));
  if (std::fabs(plan.total_flow() - min_w) > slack)
    return "total flow " + std::to_string(plan.total_flow()) +
           " differs from min total weight " + std::to_string(min_w);
  return {};
}

double emd_cost(const FlowPlan& plan, const WeightedPointSet& a,
                const WeightedPointSet& b) {
  const std::string violation = check_flow(plan, a, b);
  if (!violation.empty()) fail(ErrorKind::infeasible, "infeasible flow: " + violation);
  CompensatedSum total;
  for (const auto& e : plan.entries())
    total.add(e.flow * naive_cost(a, b, e.i, e.j));
  return total.value() / std::min(a.total_weight(), b.total_weight());
}

DualGaps dual_gaps(const EmdSolution& sol, const WeightedPointSet& a,
                   const WeightedPointSet& b) {
  DualGaps g{0.0, 0.0};
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double pa = sol.potential_a[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < b.size(); ++j) {
      const double gap = pa + sol.potential_b[static_cast<std::size_t>(j)] -
                         naive_cost(a, b, i, j);
      if (gap > g.feasibility) g.feasibility = gap;
    }
  }
  for (const auto& e : sol.plan.entries()) {
    const double gap = std::fabs(naive_cost(a, b, e.i, e.j) -
                                 sol.potential_a[static_cast<std::size_t>(e.i)] -
                                 sol.potential_b[static_cast<std::size_t>(e.j)]);
    if (gap > g.slackness) g.slackness = gap;
  }
  return g;
}

void write_flow(std::ostream& out, const FlowPlan& plan) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", plan.total_flow());
  out << plan.n1() << ' ' << plan.n2() << ' ' << buf << '\n';
  for (const auto& e : plan.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.flow);
    out << e.i << ' ' << e.j << ' ' << buf << '\n';
  }
}

void save_flow(const FlowPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  write_flow(out, plan);
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace geoalign
