#include "datagen.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace geoalign {

namespace {

// Substream tags for the independent draws of one instance.
constexpr std::uint64_t kTagCoefficientsA = 1;
constexpr std::uint64_t kTagCoefficientsB = 2;
constexpr std::uint64_t kTagPointsA = 3;
constexpr std::uint64_t kTagPointsB = 4;
constexpr std::uint64_t kTagRotation = 5;
constexpr std::uint64_t kTagNoise = 6;
constexpr std::uint64_t kTagCube = 7;

void enumerate_monomials(std::int64_t vars, std::int64_t degree,
                         std::int64_t target, std::size_t pos,
                         std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (pos + 1 == current.size()) {
    current[pos] = static_cast<int>(target);
    out.push_back(current);
    return;
  }
  for (std::int64_t e = target; e >= 0; --e) {
    current[pos] = static_cast<int>(e);
    enumerate_monomials(vars, degree, target - e, pos + 1, current, out);
  }
}

// One sampled set on its own random polynomial map.
WeightedPointSet sample_manifold(const ManifoldSpec& spec, std::int64_t n,
                                 std::uint64_t coef_tag, std::uint64_t point_tag) {
  const std::int64_t rho = spec.latent_dim, d = spec.ambient_dim;
  const auto monomials = monomial_exponents(rho, spec.degree);
  const std::size_t m = monomials.size();

  SplitMix64 base(spec.seed);
  SplitMix64 coef_rng = base.substream(coef_tag);
  std::vector<double> coef(static_cast<std::size_t>(d) * m);
  for (auto& c : coef) c = 2.0 * coef_rng.next_double() - 1.0;

  std::vector<double> coords(static_cast<std::size_t>(n * d));
  std::vector<double> weights(static_cast<std::size_t>(n));
  std::vector<double> latent(static_cast<std::size_t>(rho));
  std::vector<double> mono_val(m);
  const SplitMix64 points_base = base.substream(point_tag);
  for (std::int64_t i = 0; i < n; ++i) {
    SplitMix64 rng = points_base.substream(static_cast<std::uint64_t>(i));
    for (std::int64_t k = 0; k < rho; ++k)
      latent[static_cast<std::size_t>(k)] = rng.next_double();
    weights[static_cast<std::size_t>(i)] =
        spec.weight_high -
        (spec.weight_high - spec.weight_low) * rng.next_double();
    for (std::size_t t = 0; t < m; ++t) {
      double v = 1.0;
      for (std::int64_t k = 0; k < rho; ++k)
        for (int e = 0; e < monomials[t][static_cast<std::size_t>(k)]; ++e)
          v *= latent[static_cast<std::size_t>(k)];
      mono_val[t] = v;
    }
    double* row = coords.data() + static_cast<std::size_t>(i * d);
    for (std::int64_t c = 0; c < d; ++c) {
      double s = 0.0;
      const double* cc = coef.data() + static_cast<std::size_t>(c) * m;
      for (std::size_t t = 0; t < m; ++t) s += cc[t] * mono_val[t];
      row[c] = s;
    }
  }
  return WeightedPointSet(n, d, std::move(coords), std::move(weights));
}

}  // namespace

std::vector<std::vector<int>> monomial_exponents(std::int64_t vars,
                                                 std::int64_t degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(vars));
  for (std::int64_t total = 0; total <= degree; ++total)
    enumerate_monomials(vars, degree, total, 0, current, out);
  return out;
}

std::pair<WeightedPointSet, WeightedPointSet> random_manifold_instance(
    const ManifoldSpec& spec) {
  if (spec.latent_dim < 1 || spec.ambient_dim < 1)
    fail(ErrorKind::invalid_argument, "manifold instance needs positive dimensions");
  if (spec.degree < 1)
    fail(ErrorKind::invalid_argument, "manifold instance needs degree >= 1");
  if (spec.n1 < 1 || spec.n2 < 1)
    fail(ErrorKind::invalid_argument, "manifold instance needs n1, n2 >= 1");
  if (!(spec.weight_low >= 0.0) || !(spec.weight_high > spec.weight_low))
    fail(ErrorKind::invalid_argument,
         "manifold instance needs 0 <= weight_low < weight_high");
  WeightedPointSet a =
      sample_manifold(spec, spec.n1, kTagCoefficientsA, kTagPointsA);
  WeightedPointSet b =
      sample_manifold(spec, spec.n2, kTagCoefficientsB, kTagPointsB);
  return {std::move(a), std::move(b)};
}

WeightedPointSet add_gaussian_noise(const WeightedPointSet& p, double eta,
                                    std::uint64_t seed) {
  if (!(eta >= 0.0))
    fail(ErrorKind::invalid_argument, "add_gaussian_noise: eta must be >= 0");
  const double sigma = eta * diameter(p);
  const std::int64_t n = p.size(), d = p.dim();
  std::vector<double> coords = p.coords();
  const SplitMix64 noise_base = SplitMix64(seed).substream(kTagNoise);
  for (std::int64_t i = 0; i < n; ++i) {
    SplitMix64 rng = noise_base.substream(static_cast<std::uint64_t>(i));
    double* row = coords.data() + static_cast<std::size_t>(i * d);
    for (std::int64_t k = 0; k < d; ++k) row[k] += sigma * rng.next_gaussian();
  }
  return WeightedPointSet(n, d, std::move(coords), p.weights());
}

std::vector<double> random_rotation_matrix(std::int64_t d, SplitMix64 rng) {
  std::vector<double> q(static_cast<std::size_t>(d * d));
  for (auto& x : q) x = rng.next_gaussian();
  // Modified Gram-Schmidt on columns, two passes for orthogonality.
  for (std::int64_t j = 0; j < d; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::int64_t jp = 0; jp < j; ++jp) {
        double dot = 0.0;
        for (std::int64_t i = 0; i < d; ++i)
          dot += q[static_cast<std::size_t>(i * d + j)] * q[static_cast<std::size_t>(i * d + jp)];
        for (std::int64_t i = 0; i < d; ++i)
          q[static_cast<std::size_t>(i * d + j)] -= dot * q[static_cast<std::size_t>(i * d + jp)];
      }
    }
    double norm = 0.0;
    for (std::int64_t i = 0; i < d; ++i) {
      const double v = q[static_cast<std::size_t>(i * d + j)];
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12)
      fail(ErrorKind::numeric, "random_rotation_matrix: degenerate draw");
    for (std::int64_t i = 0; i < d; ++i) q[static_cast<std::size_t>(i * d + j)] /= norm;
  }
  // Force det = +1 by flipping the last column if needed.
  double det = 1.0;
  {
    std::vector<double> copy = q;
    // Small d: reuse a simple LU determinant (signs only matter).
    std::int64_t dd = d;
    for (std::int64_t col = 0; col < dd; ++col) {
      std::int64_t piv = col;
      double best = std::fabs(copy[static_cast<std::size_t>(col * dd + col)]);
      for (std::int64_t r = col + 1; r < dd; ++r) {
        const double v = std::fabs(copy[static_cast<std::size_t>(r * dd + col)]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best == 0.0) {
        det = 0.0;
        break;
      }
      if (piv != col) {
        for (std::int64_t jj = 0; jj < dd; ++jj)
          std::swap(copy[static_cast<std::size_t>(piv * dd + jj)],
                    copy[static_cast<std::size_t>(col * dd + jj)]);
        det = -det;
      }
      const double pivot = copy[static_cast<std::size_t>(col * dd + col)];
      det *= pivot;
      for (std::int64_t r = col + 1; r < dd; ++r) {
        const double factor = copy[static_cast<std::size_t>(r * dd + col)] / pivot;
        for (std::int64_t jj = col; jj < dd; ++jj)
          copy[static_cast<std::size_t>(r * dd + jj)] -=
              factor * copy[static_cast<std::size_t>(col * dd + jj)];
      }
    }
  }
  if (det < 0.0)
    for (std::int64_t i = 0; i < d; ++i)
      q[static_cast<std::size_t>(i * d + (d - 1))] =
          -q[static_cast<std::size_t>(i * d + (d - 1))];
  return q;
}

WeightedPointSet hypercube_instance(std::int64_t rho, std::int64_t d,
                                    std::int64_t n, std::uint64_t seed) {
  if (rho < 1 || d < rho)
    fail(ErrorKind::invalid_argument, "hypercube_instance needs 1 <= rho <= d");
  if (n < 1) fail(ErrorKind::invalid_argument, "hypercube_instance needs n >= 1");

  SplitMix64 base(seed);
  const std::vector<double> rot =
      random_rotation_matrix(d, base.substream(kTagRotation));

  std::vector<double> coords(static_cast<std::size_t>(n * d), 0.0);
  std::vector<double> latent(static_cast<std::size_t>(rho));
  const SplitMix64 cube_base = base.substream(kTagCube);
  for (std::int64_t i = 0; i < n; ++i) {
    SplitMix64 rng = cube_base.substream(static_cast<std::uint64_t>(i));
    for (std::int64_t k = 0; k < rho; ++k)
      latent[static_cast<std::size_t>(k)] = rng.next_double();
    double* row = coords.data() + static_cast<std::size_t>(i * d);
    for (std::int64_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::int64_t k = 0; k < rho; ++k)
        s += rot[static_cast<std::size_t>(r * d + k)] * latent[static_cast<std::size_t>(k)];
      row[r] = s;
    }
  }
  return WeightedPointSet(n, d, std::move(coords),
                          std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

}  // namespace geoalign
