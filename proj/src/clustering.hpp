#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "point_set.hpp"

namespace geoalign {

// Result of farthest-point clustering: selected center indices (in selection
// order), per-point assignment to a position in that center list, and the
// covering radius max_i dist(p_i, nearest center).
struct Clustering {
  std::vector<std::int64_t> centers;     // indices into the clustered set
  std::vector<std::int64_t> assignment;  // values index into centers
  double radius = 0.0;
};

// Greedy farthest-point traversal (2-approximate k-center). The first center
// comes from the seed's pseudorandom stream; seed 0 is reserved to mean
// "index 0". Farthest-point and nearest-center ties break to the lowest
// index. Stops early once every point coincides with a center, so
// |centers| == min(k, number of distinct positions).
Clustering gonzalez(const WeightedPointSet& p, std::int64_t k, std::uint64_t seed);

// One weighted point per Gonzalez center: the center's coordinates carrying
// its cluster's total weight (compensated summation; total weight is
// preserved). Output points are ordered by ascending original center index,
// so k >= n on distinct points reproduces the input set exactly. If info is
// given it is relabeled to the output's point order.
WeightedPointSet compress(const WeightedPointSet& p, std::int64_t k,
                          std::uint64_t seed, Clustering* info = nullptr);

// Center budget that drives the covering radius below eps * diameter for
// doubling dimension rho: ceil((2/eps)^rho). Requires eps in (0, 1).
std::int64_t k_from_epsilon(double eps, double rho);

// Text serialization: "k radius" header, then one "point_index center_index"
// line per point (center_index positions into the center list).
void write_clustering(std::ostream& out, const Clustering& c);

}  // namespace geoalign
