#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "point_set.hpp"
#include "rigid_transform.hpp"
#include "transport.hpp"

namespace geoalign {

// Flow-weighted centroids (mu_A, mu_B): mu_A = sum_ij f_ij a_i / F,
// mu_B = sum_ij f_ij b_j / F with F the total flow.
std::pair<std::vector<double>, std::vector<double>> flow_centroids(
    const WeightedPointSet& a, const WeightedPointSet& b, const FlowPlan& f);

// d-by-d matrix sum_ij f_ij (a_i - mu_a)(b_j - mu_b)^T, accumulated from the
// sparse plan without materializing any expanded point sets: per source row,
// the flow-weighted sum of centered b's is formed first, then one outer
// product is added.
std::vector<double> cross_covariance(const WeightedPointSet& a,
                                     const WeightedPointSet& b,
                                     const FlowPlan& f,
                                     const std::vector<double>& mu_a,
                                     const std::vector<double>& mu_b);

// Orthogonal transform minimizing sum_ij f_ij ||a_i - (R b_j + v)||^2: R from
// the SVD of the cross covariance (R = U V^T), v from matching the
// flow-weighted centroids. With proper_only, an improper optimum is projected
// to the best pure rotation by negating the last column of U.
RigidTransform optimal_transform(const WeightedPointSet& a,
                                 const WeightedPointSet& b, const FlowPlan& f,
                                 bool proper_only = false);

// sum_ij f_ij ||a_i - T(b_j)||^2 for a given transform; the quantity the
// transform step minimizes (unnormalized).
double flow_alignment_cost(const WeightedPointSet& a, const WeightedPointSet& b,
                           const FlowPlan& f, const RigidTransform& t);

}  // namespace geoalign
