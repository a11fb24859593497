#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "point_set.hpp"

namespace geoalign {

struct FlowEntry {
  std::int64_t i;  // index into the first set
  std::int64_t j;  // index into the second set
  double flow;     // strictly positive mass
};

// Sparse transport plan between a set of n1 sources and n2 sinks. Entries are
// kept sorted by (i, j); zero flows are dropped and duplicates rejected.
class FlowPlan {
 public:
  FlowPlan(std::int64_t n1, std::int64_t n2, std::vector<FlowEntry> entries);

  std::int64_t n1() const { return n1_; }
  std::int64_t n2() const { return n2_; }
  const std::vector<FlowEntry>& entries() const { return entries_; }
  double total_flow() const { return total_flow_; }

 private:
  std::int64_t n1_;
  std::int64_t n2_;
  std::vector<FlowEntry> entries_;
  double total_flow_;
};

struct EmdOptions {
  // The ground-cost matrix is materialized when n1*n2 is at most this many
  // entries; above it, cost rows are recomputed on demand with the exact same
  // arithmetic, trading time for memory.
  std::int64_t dense_threshold = 32'000'000;
  // Optional dual seed: potential_a of a previous solve against the same
  // first set and nearby costs (non-owning; must outlive the call). Sink
  // potentials are recomputed against the seed, so any seed keeps the start
  // dual-feasible; it changes the route to the optimum, never the optimum.
  const std::vector<double>* warm_potential_a = nullptr;
};

struct EmdSolution {
  FlowPlan plan;
  double value;  // normalized cost: sum f_ij ||a_i - b_j||^2 / min(W_A, W_B)
  // Dual potentials: c_ij >= potential_a[i] + potential_b[j] up to roundoff
  // on every edge, with equality on edges carrying flow. Together with
  // feasibility of the plan these certify optimality.
  std::vector<double> potential_a;
  std::vector<double> potential_b;
};

// Exact earth mover's distance under squared Euclidean ground cost, with
// unbalanced masses handled by shipping only min(W_A, W_B). Successive
// shortest augmenting paths with node potentials on the dense bipartite
// graph; a slack node with zero ground cost absorbs the surplus of the
// heavier side. Deterministic: shortest-path ties are broken by lowest node
// index. The returned plan is basic (at most n1 + n2 - 1 positive entries).
EmdSolution solve_emd(const WeightedPointSet& a, const WeightedPointSet& b,
                      const EmdOptions& opts = {});

// Empty string if the plan is feasible for (a, b); otherwise a message naming
// the violated constraint.
std::string check_flow(const FlowPlan& plan, const WeightedPointSet& a,
                       const WeightedPointSet& b);

// Normalized cost of a feasible plan; throws (infeasible) with the violated
// constraint in the message otherwise.
double emd_cost(const FlowPlan& plan, const WeightedPointSet& a,
                const WeightedPointSet& b);

struct DualGaps {
  double feasibility;  // max over edges of potential_a[i] + potential_b[j] - c_ij
  double slackness;    // max over plan entries of |c_ij - potential_a[i] - potential_b[j]|
};

// Worst dual-constraint violations of a solution; both should be tiny
// relative to the largest ground cost for an optimal solution.
DualGaps dual_gaps(const EmdSolution& sol, const WeightedPointSet& a,
                   const WeightedPointSet& b);

// Text serialization: header "n1 n2 total_flow", then one "i j f_ij" line per
// entry, 0-based indices.
void write_flow(std::ostream& out, const FlowPlan& plan);
void save_flow(const FlowPlan& plan, const std::string& path);

// Marginal feasibility slack, relative to min(W_A, W_B).
inline constexpr double kMarginalSlack = 1e-9;

}  // namespace geoalign
