#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "point_set.hpp"

namespace geoalign {

// Distance-preserving map x -> R x + v with R orthogonal (rotation or
// reflection). The constructor enforces orthogonality (max entry of
// R^T R - I within 1e-9) and |det R| = 1 within 1e-9.
class RigidTransform {
 public:
  RigidTransform(std::int64_t d, std::vector<double> rotation,
                 std::vector<double> translation);

  static RigidTransform identity(std::int64_t d);

  std::int64_t dim() const { return d_; }
  const std::vector<double>& rotation() const { return rotation_; }
  const std::vector<double>& translation() const { return translation_; }
  bool is_proper() const;  // det(R) > 0

  void apply_point(std::span<const double> in, std::span<double> out) const;

  // The transform that applies *this first, then next: x -> R_n (R x + v) + v_n.
  RigidTransform then(const RigidTransform& next) const;

  RigidTransform inverse() const;

 private:
  std::int64_t d_;
  std::vector<double> rotation_;     // row-major d x d
  std::vector<double> translation_;  // d
};

// Transformed copy of a point set; weights are untouched.
WeightedPointSet apply_transform(const RigidTransform& t,
                                 const WeightedPointSet& p);

inline constexpr double kOrthogonalityTol = 1e-9;

}  // namespace geoalign
