#include "clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace geoalign {

Clustering gonzalez(const WeightedPointSet& p, std::int64_t k, std::uint64_t seed) {
  if (k < 1) fail(ErrorKind::invalid_argument, "gonzalez: k must be >= 1");
  const std::int64_t n = p.size();
  if (k > n) k = n;

  Clustering out;
  out.centers.reserve(static_cast<std::size_t>(k));
  out.assignment.assign(static_cast<std::size_t>(n), 0);

  const std::int64_t first =
      seed == 0 ? 0
                : static_cast<std::int64_t>(
                      SplitMix64(seed).next_below(static_cast<std::uint64_t>(n)));
  out.centers.push_back(first);

  // min_sq[i]: squared distance to the nearest selected center.
  std::vector<double> min_sq(static_cast<std::size_t>(n));
  const auto c0 = p.point(first);
  for (std::int64_t i = 0; i < n; ++i)
    min_sq[static_cast<std::size_t>(i)] = squared_distance(p.point(i), c0);

  while (static_cast<std::int64_t>(out.centers.size()) < k) {
    std::int64_t far = 0;
    double far_sq = min_sq[0];
    for (std::int64_t i = 1; i < n; ++i) {
      if (min_sq[static_cast<std::size_t>(i)] > far_sq) {
        far_sq = min_sq[static_cast<std::size_t>(i)];
        far = i;
      }
    }
    if (far_sq == 0.0) break;  // every point already coincides with a center
    const std::int64_t center_pos = static_cast<std::int64_t>(out.centers.size());
    out.centers.push_back(far);
    const auto c = p.point(far);
    for (std::int64_t i = 0; i < n; ++i) {
      const double sq = squared_distance(p.point(i), c);
      if (sq < min_sq[static_cast<std::size_t>(i)]) {
        min_sq[static_cast<std::size_t>(i)] = sq;
        out.assignment[static_cast<std::size_t>(i)] = center_pos;
      }
    }
  }

  double worst = 0.0;
  for (std::int64_t i = 0; i < n; ++i) worst = std::max(worst, min_sq[static_cast<std::size_t>(i)]);
  out.radius = std::sqrt(worst);
  return out;
}

WeightedPointSet compress(const WeightedPointSet& p, std::int64_t k,
                          std::uint64_t seed, Clustering* info) {
  Clustering c = gonzalez(p, k, seed);
  const std::int64_t m = static_cast<std::int64_t>(c.centers.size());
  const std::int64_t d = p.dim();

  std::vector<CompensatedSum> cluster_weight(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < p.size(); ++i)
    cluster_weight[static_cast<std::size_t>(c.assignment[static_cast<std::size_t>(i)])].add(
        p.weight(i));

  // Emit centers by ascending original index so lossless compression (k >= n,
  // distinct positions) is the identity.
  std::vector<std::int64_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int64_t x, std::int64_t y) {
    return c.centers[static_cast<std::size_t>(x)] < c.centers[static_cast<std::size_t>(y)];
  });

  std::vector<double> coords(static_cast<std::size_t>(m * d));
  std::vector<double> weights(static_cast<std::size_t>(m));
  for (std::int64_t r = 0; r < m; ++r) {
    const std::int64_t pos = order[static_cast<std::size_t>(r)];
    const auto pt = p.point(c.centers[static_cast<std::size_t>(pos)]);
    std::copy(pt.begin(), pt.end(), coords.begin() + static_cast<std::ptrdiff_t>(r * d));
    weights[static_cast<std::size_t>(r)] =
        cluster_weight[static_cast<std::size_t>(pos)].value();
  }
  if (info) {
    // Relabel so the clustering describes the returned set's point order.
    std::vector<std::int64_t> inverse(static_cast<std::size_t>(m));
    for (std::int64_t r = 0; r < m; ++r)
      inverse[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
    Clustering relabeled;
    relabeled.radius = c.radius;
    relabeled.centers.resize(static_cast<std::size_t>(m));
    for (std::int64_t r = 0; r < m; ++r)
      relabeled.centers[static_cast<std::size_t>(r)] =
          c.centers[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    relabeled.assignment.resize(c.assignment.size());
    for (std::size_t i = 0; i < c.assignment.size(); ++i)
      relabeled.assignment[i] = inverse[static_cast<std::size_t>(c.assignment[i])];
    *info = std::move(relabeled);
  }
  return WeightedPointSet(m, d, std::move(coords), std::move(weights));
}

std::int64_t k_from_epsilon(double eps, double rho) {
  if (!(eps > 0.0) || !(eps < 1.0))
    fail(ErrorKind::invalid_argument, "k_from_epsilon: eps must lie in (0, 1)");
  if (!(rho > 0.0) || !std::isfinite(rho))
    fail(ErrorKind::invalid_argument, "k_from_epsilon: rho must be positive");
  const double v = std::pow(2.0 / eps, rho);
  if (!(v < 9.0e18))
    fail(ErrorKind::invalid_argument, "k_from_epsilon: (2/eps)^rho overflows");
  return static_cast<std::int64_t>(std::ceil(v));
}

void write_clustering(std::ostream& out, const Clustering& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c.radius);
  out << c.centers.size() << ' ' << buf << '\n';
  for (std::size_t i = 0; i < c.assignment.size(); ++i)
    out << i << ' ' << c.assignment[i] << '\n';
}

}  // namespace geoalign
