#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "point_set.hpp"
#include "rigid_transform.hpp"
#include "transport.hpp"

namespace geoalign {

struct AlignConfig {
  double tolerance = 1e-3;          // stop when |obj_prev - obj| < tolerance
  std::int64_t max_iterations = 100;
  enum class Init { identity, centroid } init = Init::centroid;
  bool proper_rotations_only = false;
  EmdOptions emd;
};

struct AlignmentResult {
  RigidTransform transform;
  FlowPlan flow;                      // recomputed against the final transform
  std::vector<double> objective_trace;  // EMD value at each iteration
  std::int64_t iterations = 0;        // == objective_trace.size()
  bool converged = false;
  double final_emd = 0.0;             // value of the returned flow
};

// Alternating minimization: solve the exact EMD flow against the current
// transform, fit the optimal rigid transform for that flow, compose, repeat.
// The objective trace is non-increasing; zero change counts as convergence.
// On exit the flow is recomputed once against the final transform so the
// returned triple is mutually consistent.
AlignmentResult align(const WeightedPointSet& a, const WeightedPointSet& b,
                      const AlignConfig& config = {});

// Single transform equivalent to applying transforms[0], then transforms[1],
// and so on. Built by the right-to-left recursive product (suffix rotations
// first); the accumulated rotation is re-orthogonalized every 32 steps so
// long chains stay orthogonal.
RigidTransform compose(std::span<const RigidTransform> transforms);

// Projects a near-orthogonal matrix back onto the orthogonal group via its
// polar factor (U V^T from the SVD).
std::vector<double> reorthogonalize(const std::vector<double>& r, std::int64_t d);

inline constexpr int kReorthogonalizeEvery = 32;

}  // namespace geoalign
