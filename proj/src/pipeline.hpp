#pragma once

#include <cstdint>

#include "alignment.hpp"
#include "clustering.hpp"
#include "point_set.hpp"
#include "rigid_transform.hpp"
#include "transport.hpp"

namespace geoalign {

// Compressed-alignment pipeline: compress both sets with farthest-point
// clustering, run the alternating alignment on the compressed sets, apply the
// resulting transform to the full second set, and solve the full transport
// problem once to score it. The report carries sandwich-bound certificates
// relating the full and compressed objectives.

struct PipelineOptions {
  // Center budget. If k > 0 it is used directly for both sides; otherwise
  // epsilon in (0,1) and rho > 0 must be set and k = k_from_epsilon.
  std::int64_t k = 0;
  double epsilon = 0.0;
  double rho = 0.0;
  // Per-side overrides for experimentation; 0 means "use k".
  std::int64_t k_a_override = 0;
  std::int64_t k_b_override = 0;
  std::uint64_t seed = 0;  // drives both compressions via per-side substreams
  AlignConfig align;
};

// Certified two-sided bounds for a fixed transform T with measured radius
// ratio eps = max(r_A, r_B) / diameter and squared scale delta^2:
//   full       <= (1+2e)*compressed + (2e+4e^2)*delta^2   (ineq6)
//   compressed <= (1+2e)*full       + (2e+4e^2)*delta^2   (ineq7)
struct Certificates {
  double ineq6_lhs = 0.0;
  double ineq6_rhs = 0.0;
  double ineq7_lhs = 0.0;
  double ineq7_rhs = 0.0;
};

// Both inequalities within additive slack 1e-9 * diameter^2.
bool certificates_pass(const Certificates& c, double diameter);

struct PipelineReport {
  std::int64_t k_a = 0;  // actual compressed sizes (may be < requested k)
  std::int64_t k_b = 0;
  double radius_a = 0.0;
  double radius_b = 0.0;
  double diameter_a = 0.0;
  double diameter_b = 0.0;
  double eps_eff = 0.0;  // max radius / max diameter, measured
  RigidTransform transform = RigidTransform::identity(1);
  double emd_full = 0.0;        // on the original sets under transform
  double emd_compressed = 0.0;  // alignment objective on the compressed sets
  FlowPlan flow = FlowPlan(1, 1, {});  // optimal full-size plan under transform
  std::int64_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  Certificates certificates;
  double time_compress_ms = 0.0;
  double time_align_ms = 0.0;
  double time_final_emd_ms = 0.0;
  double time_total_ms = 0.0;
};

// Runs the whole pipeline. Compression uses substreams of options.seed (seed 0
// keeps both compressions in their deterministic-start mode). Requesting
// k >= max(n1, n2) makes compression lossless, so the report then matches a
// plain align() run on the original sets.
PipelineReport align_compressed(const WeightedPointSet& a,
                                const WeightedPointSet& b,
                                const PipelineOptions& options);

// Evaluates the certificate values from scratch for arbitrary compressed
// stand-ins s_a, s_b of a, b: solves both transport problems under t and
// plugs the objectives into the bounds with the supplied radius ratio.
Certificates certificate_check(const WeightedPointSet& a,
                               const WeightedPointSet& b,
                               const WeightedPointSet& s_a,
                               const WeightedPointSet& s_b,
                               const RigidTransform& t, double epsilon_eff,
                               const EmdOptions& emd = {});

// The bound arithmetic shared by certificate_check and the pipeline.
Certificates make_certificates(double emd_full, double emd_compressed,
                               double epsilon_eff, double diameter);

}  // namespace geoalign
