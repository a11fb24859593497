// Independent reference implementations used to check the library from the
// outside: brute-force transport by vertex enumeration, exhaustive k-center,
// a rotation-grid search in the plane, and materialized-matrix covariance.
// All are deliberately naive and exponential/quadratic; keep inputs tiny.
#pragma once

#include <cstdint>
#include <vector>

#include "point_set.hpp"
#include "rng.hpp"
#include "transport.hpp"

namespace oracle {

// Exact optimum of the transport problem: balances the masses with a
// zero-cost slack node, enumerates every spanning tree of the complete
// bipartite graph, solves each tree by leaf stripping, and minimizes over
// the feasible ones. Sides of at most ~5 points.
double emd_by_enumeration(const geoalign::WeightedPointSet& a,
                          const geoalign::WeightedPointSet& b);

// Smallest covering radius over all k-subsets of the points themselves.
double exhaustive_kcenter_radius(const geoalign::WeightedPointSet& p,
                                 std::int64_t k);

// Minimum of sum_f ||a - (R(theta) b + v)||^2 over `angles` equally spaced
// rotation angles, with the translation chosen optimally per angle. d == 2.
double rotation_grid_min(const geoalign::WeightedPointSet& a,
                         const geoalign::WeightedPointSet& b,
                         const geoalign::FlowPlan& flow, int angles);

// Sum_ij f_ij (a_i - mu_a)(b_j - mu_b)^T computed by materializing one
// scaled column pair per flow entry and multiplying the two matrices.
std::vector<double> materialized_cross_covariance(
    const geoalign::WeightedPointSet& a, const geoalign::WeightedPointSet& b,
    const geoalign::FlowPlan& flow, const std::vector<double>& mu_a,
    const std::vector<double>& mu_b);

// Test-instance helpers (deterministic in the caller's stream).
geoalign::WeightedPointSet random_set(geoalign::SplitMix64& rng,
                                      std::int64_t n, std::int64_t d,
                                      double scale = 1.0,
                                      bool unit_weights = false);

// Integer-valued weights in {1, ..., max_w}, as doubles.
std::vector<double> random_int_weights(geoalign::SplitMix64& rng,
                                       std::int64_t n, int max_w);

// Uniformly random rotation matrix, advancing the caller's stream once.
std::vector<double> random_rotation(geoalign::SplitMix64& rng, std::int64_t d);

// Identity except for a rotation by theta in the (axis0, axis1) plane.
std::vector<double> plane_rotation(std::int64_t d, std::int64_t axis0,
                                   std::int64_t axis1, double theta);

}  // namespace oracle
