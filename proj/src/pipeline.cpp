#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <utility>

#include "errors.hpp"
#include "rng.hpp"

namespace geoalign {

namespace {

constexpr std::uint64_t kTagCompressA = 0x5eedc0de01;
constexpr std::uint64_t kTagCompressB = 0x5eedc0de02;

double ms_since(std::chrono::steady_clock::time_point start) {
  const auto now = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(now - start).count();
}

std::uint64_t side_seed(std::uint64_t seed, std::uint64_t tag) {
  // Seed 0 selects the deterministic-start mode of the clustering on both
  // sides; any other seed gets an independent substream per side.
  return seed == 0 ? 0 : SplitMix64::mix(seed + tag);
}

}  // namespace

Certificates make_certificates(double emd_full, double emd_compressed,
                               double epsilon_eff, double diameter) {
  const double e = epsilon_eff;
  const double factor = 1.0 + 2.0 * e;
  const double additive = (2.0 * e + 4.0 * e * e) * diameter * diameter;
  Certificates c;
  c.ineq6_lhs = emd_full;
  c.ineq6_rhs = factor * emd_compressed + additive;
  c.ineq7_lhs = emd_compressed;
  c.ineq7_rhs = factor * emd_full + additive;
  return c;
}

bool certificates_pass(const Certificates& c, double diameter) {
  const double slack = 1e-9 * diameter * diameter;
  return c.ineq6_lhs <= c.ineq6_rhs + slack &&
         c.ineq7_lhs <= c.ineq7_rhs + slack;
}

Certificates certificate_check(const WeightedPointSet& a,
                               const WeightedPointSet& b,
                               const WeightedPointSet& s_a,
                               const WeightedPointSet& s_b,
                               const RigidTransform& t, double epsilon_eff,
                               const EmdOptions& emd) {
  const double emd_full = solve_emd(a, apply_transform(t, b), emd).value;
  const double emd_compressed =
      solve_emd(s_a, apply_transform(t, s_b), emd).value;
  const double delta = std::max(diameter(a), diameter(b));
  return make_certificates(emd_full, emd_compressed, epsilon_eff, delta);
}

PipelineReport align_compressed(const WeightedPointSet& a,
                                const WeightedPointSet& b,
                                const PipelineOptions& options) {
  std::int64_t k = options.k;
  if (k <= 0) {
    if (!(options.epsilon > 0.0) || !(options.rho > 0.0))
      fail(ErrorKind::invalid_argument,
           "align_compressed: need k > 0, or epsilon in (0,1) with rho > 0");
    k = k_from_epsilon(options.epsilon, options.rho);
  }
  const std::int64_t k_a = options.k_a_override > 0 ? options.k_a_override : k;
  const std::int64_t k_b = options.k_b_override > 0 ? options.k_b_override : k;

  PipelineReport report;
  const auto t_total = std::chrono::steady_clock::now();
  report.diameter_a = diameter(a);
  report.diameter_b = diameter(b);

  const auto t_compress = std::chrono::steady_clock::now();
  Clustering info_a, info_b;
  const WeightedPointSet s_a =
      compress(a, k_a, side_seed(options.seed, kTagCompressA), &info_a);
  const WeightedPointSet s_b =
      compress(b, k_b, side_seed(options.seed, kTagCompressB), &info_b);
  report.time_compress_ms = ms_since(t_compress);
  report.k_a = s_a.size();
  report.k_b = s_b.size();
  report.radius_a = info_a.radius;
  report.radius_b = info_b.radius;
  const double delta = std::max(report.diameter_a, report.diameter_b);
  report.eps_eff =
      delta > 0.0 ? std::max(report.radius_a, report.radius_b) / delta : 0.0;

  const auto t_align = std::chrono::steady_clock::now();
  AlignmentResult aligned = align(s_a, s_b, options.align);
  report.time_align_ms = ms_since(t_align);
  report.transform = aligned.transform;
  report.emd_compressed = aligned.final_emd;
  report.iterations = aligned.iterations;
  report.converged = aligned.converged;
  report.objective_trace = std::move(aligned.objective_trace);

  const auto t_final = std::chrono::steady_clock::now();
  EmdSolution full =
      solve_emd(a, apply_transform(report.transform, b), options.align.emd);
  report.time_final_emd_ms = ms_since(t_final);
  report.emd_full = full.value;
  report.flow = std::move(full.plan);

  report.certificates = make_certificates(report.emd_full,
                                          report.emd_compressed,
                                          report.eps_eff, delta);
  report.time_total_ms = ms_since(t_total);
  return report;
}

}  // namespace geoalign
