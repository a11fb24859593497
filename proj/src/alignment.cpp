#include "alignment.hpp"

#include <cmath>
#include <utility>

#include "errors.hpp"
#include "linalg.hpp"
#include "procrustes.hpp"
#include "svd.hpp"

namespace geoalign {

std::vector<double> reorthogonalize(const std::vector<double>& r, std::int64_t d) {
  const SvdResult s = svd_dxd(r, d);
  return mat_mul(s.u, mat_transpose(s.v, d), d);
}

namespace {

RigidTransform initial_transform(const WeightedPointSet& a,
                                 const WeightedPointSet& b,
                                 AlignConfig::Init init) {
  const std::int64_t d = a.dim();
  if (init == AlignConfig::Init::identity) return RigidTransform::identity(d);
  const std::vector<double> ma = a.weighted_mean();
  const std::vector<double> mb = b.weighted_mean();
  std::vector<double> v(static_cast<std::size_t>(d));
  for (std::int64_t k = 0; k < d; ++k)
    v[static_cast<std::size_t>(k)] =
        ma[static_cast<std::size_t>(k)] - mb[static_cast<std::size_t>(k)];
  return RigidTransform(d, mat_identity(d), std::move(v));
}

}  // namespace

AlignmentResult align(const WeightedPointSet& a, const WeightedPointSet& b,
                      const AlignConfig& config) {
  if (a.dim() != b.dim())
    fail(ErrorKind::dimension_mismatch,
         "align: dimensions " + std::to_string(a.dim()) + " vs " +
             std::to_string(b.dim()));
  if (!(config.tolerance >= 0.0))
    fail(ErrorKind::invalid_argument, "align: tolerance must be >= 0");
  if (config.max_iterations < 1)
    fail(ErrorKind::invalid_argument, "align: max_iterations must be >= 1");

  RigidTransform t = initial_transform(a, b, config.init);
  int compositions = 0;

  std::vector<double> trace;
  trace.reserve(16);
  bool converged = false;
  bool have_solution_for_t = false;
  EmdSolution last{FlowPlan(1, 1, {}), 0.0, {}, {}};

  // Consecutive iterations solve transport problems with nearly identical
  // costs, so each solve seeds its duals from the previous one; the seed
  // affects only how fast the exact optimum is reached.
  EmdOptions emd_opts = config.emd;
  std::vector<double> warm;

  for (std::int64_t iter = 0; iter < config.max_iterations; ++iter) {
    const WeightedPointSet moved = apply_transform(t, b);
    emd_opts.warm_potential_a = warm.empty() ? nullptr : &warm;
    EmdSolution sol = solve_emd(a, moved, emd_opts);
    warm = sol.potential_a;
    const double obj = sol.value;
    trace.push_back(obj);
    if (trace.size() >= 2 &&
        std::fabs(trace[trace.size() - 2] - obj) < config.tolerance) {
      converged = true;
      last = std::move(sol);
      have_solution_for_t = true;
      break;
    }
    const RigidTransform step =
        optimal_transform(a, moved, sol.plan, config.proper_rotations_only);
    t = t.then(step);
    if (++compositions % kReorthogonalizeEvery == 0)
      t = RigidTransform(t.dim(), reorthogonalize(t.rotation(), t.dim()),
                         t.translation());
  }

  // Final flow against the final transform; when the loop broke right after a
  // solve the existing solution already is that flow.
  if (!have_solution_for_t) {
    emd_opts.warm_potential_a = warm.empty() ? nullptr : &warm;
    last = solve_emd(a, apply_transform(t, b), emd_opts);
  }

  AlignmentResult out{std::move(t),
                      std::move(last.plan),
                      std::move(trace),
                      0,
                      converged,
                      last.value};
  out.iterations = static_cast<std::int64_t>(out.objective_trace.size());
  return out;
}

RigidTransform compose(std::span<const RigidTransform> transforms) {
  if (transforms.empty())
    fail(ErrorKind::invalid_argument, "compose: need at least one transform");
  const std::int64_t d = transforms[0].dim();
  for (const auto& t : transforms)
    if (t.dim() != d)
      fail(ErrorKind::dimension_mismatch, "compose: mixed dimensions");

  // Suffix products: S_i = R_last * ... * R_i, then
  // v = sum_i S_{i+1} v_i (with S_{last+1} = I) and R = S_first.
  std::vector<double> suffix = mat_identity(d);
  std::vector<double> v(static_cast<std::size_t>(d), 0.0);
  int steps = 0;
  for (std::size_t idx = transforms.size(); idx-- > 0;) {
    const RigidTransform& t = transforms[idx];
    const std::vector<double> sv = mat_vec(suffix, t.translation(), d);
    for (std::int64_t k = 0; k < d; ++k)
      v[static_cast<std::size_t>(k)] += sv[static_cast<std::size_t>(k)];
    suffix = mat_mul(suffix, t.rotation(), d);
    if (++steps % kReorthogonalizeEvery == 0) suffix = reorthogonalize(suffix, d);
  }
  return RigidTransform(d, std::move(suffix), std::move(v));
}

}  // namespace geoalign
