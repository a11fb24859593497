#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "point_set.hpp"
#include "rng.hpp"

namespace geoalign {

// Synthetic low-intrinsic-dimension instance: two separate random polynomial
// maps [0,1]^latent_dim -> R^ambient_dim (coefficients uniform in [-1, 1],
// total degree <= degree), sampled at n1 resp. n2 latent points drawn
// uniformly. Weights are uniform in (weight_low, weight_high]; the default
// range is (0, 1]. Every draw comes from a per-point substream of the seed,
// so output is reproducible and independent of generation order.
struct ManifoldSpec {
  std::int64_t latent_dim = 2;
  std::int64_t ambient_dim = 10;
  std::int64_t degree = 2;
  std::int64_t n1 = 100;
  std::int64_t n2 = 100;
  double weight_low = 0.0;
  double weight_high = 1.0;
  std::uint64_t seed = 0;
};

std::pair<WeightedPointSet, WeightedPointSet> random_manifold_instance(
    const ManifoldSpec& spec);

// Adds iid Gaussian noise with standard deviation eta * diameter(p) to every
// coordinate (diameter measured before the noise). Weights are untouched.
WeightedPointSet add_gaussian_noise(const WeightedPointSet& p, double eta,
                                    std::uint64_t seed);

// n unit-weight points uniform in [0,1]^rho embedded in the first rho of d
// coordinates, then mapped through a random d-dimensional rotation, so the
// intrinsic dimension is rho while the ambient dimension is d.
WeightedPointSet hypercube_instance(std::int64_t rho, std::int64_t d,
                                    std::int64_t n, std::uint64_t seed);

// Haar-ish random rotation (det +1) via Gram-Schmidt of a Gaussian matrix.
std::vector<double> random_rotation_matrix(std::int64_t d, SplitMix64 rng);

// Exponent vectors of all monomials in `vars` variables with total degree at
// most `degree`, in a fixed deterministic order (grouped by total degree).
std::vector<std::vector<int>> monomial_exponents(std::int64_t vars,
                                                 std::int64_t degree);

}  // namespace geoalign
