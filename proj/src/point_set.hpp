#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace geoalign {

// Finite weighted point set in R^d: row-major n-by-d coordinates plus one
// strictly positive weight per point. Immutable after construction; the
// constructor rejects empty sets, non-finite values and nonpositive weights.
class WeightedPointSet {
 public:
  WeightedPointSet(std::int64_t n, std::int64_t d, std::vector<double> coords,
                   std::vector<double> weights);

  std::int64_t size() const { return n_; }
  std::int64_t dim() const { return d_; }

  std::span<const double> point(std::int64_t i) const {
    return {coords_.data() + static_cast<std::size_t>(i * d_),
            static_cast<std::size_t>(d_)};
  }
  double weight(std::int64_t i) const {
    return weights_[static_cast<std::size_t>(i)];
  }

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }

  // Sum of weights, fixed left-to-right order (cached at construction).
  double total_weight() const { return total_weight_; }

  // (1/W) * sum_i w_i x_i
  std::vector<double> weighted_mean() const;

 private:
  std::int64_t n_;
  std::int64_t d_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  double total_weight_;
};

// ||p - q||^2 for two points of equal dimension.
double squared_distance(std::span<const double> p, std::span<const double> q);

// Exact max pairwise distance, full O(n^2 d) scan.
double diameter(const WeightedPointSet& p);

}  // namespace geoalign
