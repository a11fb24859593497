#include "point_set.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace geoalign {

WeightedPointSet::WeightedPointSet(std::int64_t n, std::int64_t d,
                                   std::vector<double> coords,
                                   std::vector<double> weights)
    : n_(n), d_(d), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (n_ < 1) fail(ErrorKind::invalid_argument, "point set needs at least one point");
  if (d_ < 1) fail(ErrorKind::invalid_argument, "point set needs dimension >= 1");
  if (coords_.size() != static_cast<std::size_t>(n_ * d_))
    fail(ErrorKind::invalid_argument,
         "coordinate buffer has " + std::to_string(coords_.size()) +
             " values, expected " + std::to_string(n_ * d_));
  if (weights_.size() != static_cast<std::size_t>(n_))
    fail(ErrorKind::invalid_argument,
         "weight buffer has " + std::to_string(weights_.size()) +
             " values, expected " + std::to_string(n_));
  for (std::size_t i = 0; i < coords_.size(); ++i)
    if (!std::isfinite(coords_[i]))
      fail(ErrorKind::invalid_argument,
           "coordinate " + std::to_string(i) + " is not finite");
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w) || w <= 0.0)
      fail(ErrorKind::invalid_argument,
           "weight " + std::to_string(i) + " must be finite and > 0");
    total += w;
  }
  total_weight_ = total;
}

std::vector<double> WeightedPointSet::weighted_mean() const {
  std::vector<double> mean(static_cast<std::size_t>(d_), 0.0);
  for (std::int64_t i = 0; i < n_; ++i) {
    const double w = weight(i);
    const auto p = point(i);
    for (std::int64_t k = 0; k < d_; ++k)
      mean[static_cast<std::size_t>(k)] += w * p[static_cast<std::size_t>(k)];
  }
  for (auto& v : mean) v /= total_weight_;
  return mean;
}

double squared_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    fail(ErrorKind::dimension_mismatch,
         "squared_distance: dimensions " + std::to_string(p.size()) + " vs " +
             std::to_string(q.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double diff = p[k] - q[k];
    s += diff * diff;
  }
  return s;
}

double diameter(const WeightedPointSet& p) {
  const std::int64_t n = p.size();
  double best = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto pi = p.point(i);
    for (std::int64_t j = i + 1; j < n; ++j) {
      const double s = squared_distance(pi, p.point(j));
      if (s > best) best = s;
    }
  }
  return std::sqrt(best);
}

}  // namespace geoalign
