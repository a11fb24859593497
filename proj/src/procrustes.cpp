#include "procrustes.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"
#include "svd.hpp"

namespace geoalign {

namespace {

void require_match(const WeightedPointSet& a, const WeightedPointSet& b,
                   const FlowPlan& f, const char* who) {
  if (a.dim() != b.dim())
    fail(ErrorKind::dimension_mismatch,
         std::string(who) + ": dimensions " + std::to_string(a.dim()) + " vs " +
             std::to_string(b.dim()));
  if (f.n1() != a.size() || f.n2() != b.size())
    fail(ErrorKind::invalid_argument,
         std::string(who) + ": plan shape does not match the sets");
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> flow_centroids(
    const WeightedPointSet& a, const WeightedPointSet& b, const FlowPlan& f) {
  require_match(a, b, f, "flow_centroids");
  const std::int64_t d = a.dim();
  const double total = f.total_flow();
  if (!(total > 0.0))
    fail(ErrorKind::invalid_argument, "flow_centroids: plan carries no mass");
  std::vector<double> mu_a(static_cast<std::size_t>(d), 0.0);
  std::vector<double> mu_b(static_cast<std::size_t>(d), 0.0);
  for (const auto& e : f.entries()) {
    const auto pa = a.point(e.i);
    const auto pb = b.point(e.j);
    for (std::int64_t k = 0; k < d; ++k) {
      mu_a[static_cast<std::size_t>(k)] += e.flow * pa[static_cast<std::size_t>(k)];
      mu_b[static_cast<std::size_t>(k)] += e.flow * pb[static_cast<std::size_t>(k)];
    }
  }
  for (auto& x : mu_a) x /= total;
  for (auto& x : mu_b) x /= total;
  return {std::move(mu_a), std::move(mu_b)};
}

std::vector<double> cross_covariance(const WeightedPointSet& a,
                                     const WeightedPointSet& b,
                                     const FlowPlan& f,
                                     const std::vector<double>& mu_a,
                                     const std::vector<double>& mu_b) {
  require_match(a, b, f, "cross_covariance");
  const std::int64_t d = a.dim();
  if (mu_a.size() != static_cast<std::size_t>(d) ||
      mu_b.size() != static_cast<std::size_t>(d))
    fail(ErrorKind::invalid_argument, "cross_covariance: centroid length != d");

  std::vector<double> m(static_cast<std::size_t>(d * d), 0.0);
  std::vector<double> row_accum(static_cast<std::size_t>(d), 0.0);
  const auto& entries = f.entries();
  std::size_t t = 0;
  while (t < entries.size()) {
    const std::int64_t i = entries[t].i;
    std::fill(row_accum.begin(), row_accum.end(), 0.0);
    // Entries are sorted by source, so one pass gathers the flow-weighted
    // centered b mass for this source.
    while (t < entries.size() && entries[t].i == i) {
      const auto pb = b.point(entries[t].j);
      const double fij = entries[t].flow;
      for (std::int64_t k = 0; k < d; ++k)
        row_accum[static_cast<std::size_t>(k)] +=
            fij * (pb[static_cast<std::size_t>(k)] - mu_b[static_cast<std::size_t>(k)]);
      ++t;
    }
    const auto pa = a.point(i);
    for (std::int64_t r = 0; r < d; ++r) {
      const double av = pa[static_cast<std::size_t>(r)] - mu_a[static_cast<std::size_t>(r)];
      if (av == 0.0) continue;
      double* mrow = m.data() + static_cast<std::size_t>(r * d);
      for (std::int64_t k = 0; k < d; ++k)
        mrow[k] += av * row_accum[static_cast<std::size_t>(k)];
    }
  }
  return m;
}

RigidTransform optimal_transform(const WeightedPointSet& a,
                                 const WeightedPointSet& b, const FlowPlan& f,
                                 bool proper_only) {
  require_match(a, b, f, "optimal_transform");
  const std::int64_t d = a.dim();
  auto [mu_a, mu_b] = flow_centroids(a, b, f);
  const std::vector<double> m = cross_covariance(a, b, f, mu_a, mu_b);
  SvdResult svd = svd_dxd(m, d);

  if (proper_only) {
    // det(U V^T) = det(U) det(V); flipping the last column of U (smallest
    // singular value) yields the best proper rotation.
    const double det_uv = determinant(svd.u, d) * determinant(svd.v, d);
    if (det_uv < 0.0)
      for (std::int64_t i = 0; i < d; ++i)
        svd.u[static_cast<std::size_t>(i * d + (d - 1))] =
            -svd.u[static_cast<std::size_t>(i * d + (d - 1))];
  }

  const std::vector<double> vt = mat_transpose(svd.v, d);
  std::vector<double> r = mat_mul(svd.u, vt, d);
  std::vector<double> rv = mat_vec(r, mu_b, d);
  std::vector<double> trans(static_cast<std::size_t>(d));
  for (std::int64_t k = 0; k < d; ++k)
    trans[static_cast<std::size_t>(k)] =
        mu_a[static_cast<std::size_t>(k)] - rv[static_cast<std::size_t>(k)];
  return RigidTransform(d, std::move(r), std::move(trans));
}

double flow_alignment_cost(const WeightedPointSet& a, const WeightedPointSet& b,
                           const FlowPlan& f, const RigidTransform& t) {
  require_match(a, b, f, "flow_alignment_cost");
  if (t.dim() != a.dim())
    fail(ErrorKind::dimension_mismatch, "flow_alignment_cost: transform dimension");
  const std::int64_t d = a.dim();
  std::vector<double> moved(static_cast<std::size_t>(d));
  CompensatedSum total;
  for (const auto& e : f.entries()) {
    t.apply_point(b.point(e.j), moved);
    total.add(e.flow * squared_distance(a.point(e.i), moved));
  }
  return total.value();
}

}  // namespace geoalign
