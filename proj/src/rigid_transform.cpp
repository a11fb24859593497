#include "rigid_transform.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace geoalign {

RigidTransform::RigidTransform(std::int64_t d, std::vector<double> rotation,
                               std::vector<double> translation)
    : d_(d), rotation_(std::move(rotation)), translation_(std::move(translation)) {
  if (d_ < 1) fail(ErrorKind::invalid_argument, "transform needs dimension >= 1");
  if (rotation_.size() != static_cast<std::size_t>(d_ * d_))
    fail(ErrorKind::invalid_argument, "rotation matrix must be d*d");
  if (translation_.size() != static_cast<std::size_t>(d_))
    fail(ErrorKind::invalid_argument, "translation vector must have length d");
  for (double v : rotation_)
    if (!std::isfinite(v))
      fail(ErrorKind::invalid_argument, "rotation entries must be finite");
  for (double v : translation_)
    if (!std::isfinite(v))
      fail(ErrorKind::invalid_argument, "translation entries must be finite");
  const double ortho = orthogonality_error(rotation_, d_);
  if (ortho > kOrthogonalityTol)
    fail(ErrorKind::invalid_argument,
         "matrix is not orthogonal: max |R^T R - I| = " + std::to_string(ortho));
  const double det = determinant(rotation_, d_);
  if (std::fabs(std::fabs(det) - 1.0) > kOrthogonalityTol)
    fail(ErrorKind::invalid_argument,
         "matrix determinant " + std::to_string(det) + " is not +-1");
}

RigidTransform RigidTransform::identity(std::int64_t d) {
  return RigidTransform(d, mat_identity(d),
                        std::vector<double>(static_cast<std::size_t>(d), 0.0));
}

bool RigidTransform::is_proper() const { return determinant(rotation_, d_) > 0.0; }

void RigidTransform::apply_point(std::span<const double> in,
                                 std::span<double> out) const {
  for (std::int64_t i = 0; i < d_; ++i) {
    const double* row = rotation_.data() + static_cast<std::size_t>(i * d_);
    double s = translation_[static_cast<std::size_t>(i)];
    for (std::int64_t k = 0; k < d_; ++k) s += row[k] * in[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = s;
  }
}

RigidTransform RigidTransform::then(const RigidTransform& next) const {
  if (next.d_ != d_)
    fail(ErrorKind::dimension_mismatch, "composed transforms must share dimension");
  std::vector<double> r = mat_mul(next.rotation_, rotation_, d_);
  std::vector<double> v = mat_vec(next.rotation_, translation_, d_);
  for (std::int64_t i = 0; i < d_; ++i)
    v[static_cast<std::size_t>(i)] += next.translation_[static_cast<std::size_t>(i)];
  return RigidTransform(d_, std::move(r), std::move(v));
}

RigidTransform RigidTransform::inverse() const {
  std::vector<double> rt = mat_transpose(rotation_, d_);
  std::vector<double> v = mat_vec(rt, translation_, d_);
  for (auto& x : v) x = -x;
  return RigidTransform(d_, std::move(rt), std::move(v));
}

WeightedPointSet apply_transform(const RigidTransform& t,
                                 const WeightedPointSet& p) {
  if (t.dim() != p.dim())
    fail(ErrorKind::dimension_mismatch,
         "transform dimension " + std::to_string(t.dim()) +
             " does not match point set dimension " + std::to_string(p.dim()));
  const std::int64_t n = p.size(), d = p.dim();
  std::vector<double> out(static_cast<std::size_t>(n * d));
  for (std::int64_t i = 0; i < n; ++i) {
    t.apply_point(p.point(i),
                  {out.data() + static_cast<std::size_t>(i * d),
                   static_cast<std::size_t>(d)});
  }
  return WeightedPointSet(n, d, std::move(out), p.weights());
}

}  // namespace geoalign
