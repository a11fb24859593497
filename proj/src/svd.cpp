#include "svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace geoalign {

namespace {

constexpr double kOrthTol = 1e-12;  // relative column-pair orthogonality target
constexpr int kMaxSweeps = 60;

inline double col_dot(const std::vector<double>& g, std::int64_t d,
                      std::int64_t p, std::int64_t q) {
  double s = 0.0;
  for (std::int64_t i = 0; i < d; ++i)
    s += g[static_cast<std::size_t>(i * d + p)] * g[static_cast<std::size_t>(i * d + q)];
  return s;
}

inline void rotate_cols(std::vector<double>& m, std::int64_t d, std::int64_t p,
                        std::int64_t q, double c, double s) {
  for (std::int64_t i = 0; i < d; ++i) {
    const double mp = m[static_cast<std::size_t>(i * d + p)];
    const double mq = m[static_cast<std::size_t>(i * d + q)];
    m[static_cast<std::size_t>(i * d + p)] = c * mp - s * mq;
    m[static_cast<std::size_t>(i * d + q)] = s * mp + c * mq;
  }
}

}  // namespace

SvdResult svd_dxd(const std::vector<double>& m, std::int64_t d) {
  if (d < 1) fail(ErrorKind::invalid_argument, "svd_dxd needs d >= 1");
  if (m.size() != static_cast<std::size_t>(d * d))
    fail(ErrorKind::invalid_argument, "svd_dxd: matrix must be d*d");
  for (double x : m)
    if (!std::isfinite(x))
      fail(ErrorKind::invalid_argument, "svd_dxd: matrix entries must be finite");

  std::vector<double> g = m;  // columns get orthogonalized in place
  std::vector<double> v(static_cast<std::size_t>(d * d), 0.0);
  for (std::int64_t i = 0; i < d; ++i) v[static_cast<std::size_t>(i * d + i)] = 1.0;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::int64_t p = 0; p < d - 1; ++p) {
      for (std::int64_t q = p + 1; q < d; ++q) {
        const double alpha = col_dot(g, d, p, p);
        const double beta = col_dot(g, d, q, q);
        const double gamma = col_dot(g, d, p, q);
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0 || std::fabs(gamma) <= kOrthTol * scale) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_cols(g, d, p, q, c, s);
        rotate_cols(v, d, p, q, c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(static_cast<std::size_t>(d), 0.0);
  for (std::int64_t j = 0; j < d; ++j)
    sigma[static_cast<std::size_t>(j)] = std::sqrt(col_dot(g, d, j, j));

  // Stable descending order of singular values, columns of G and V permuted
  // alongside.
  std::vector<std::int64_t> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return sigma[static_cast<std::size_t>(a)] > sigma[static_cast<std::size_t>(b)];
  });

  SvdResult out;
  out.sigma.resize(static_cast<std::size_t>(d));
  out.u.assign(static_cast<std::size_t>(d * d), 0.0);
  out.v.assign(static_cast<std::size_t>(d * d), 0.0);
  for (std::int64_t jj = 0; jj < d; ++jj) {
    const std::int64_t src = order[static_cast<std::size_t>(jj)];
    out.sigma[static_cast<std::size_t>(jj)] = sigma[static_cast<std::size_t>(src)];
    for (std::int64_t i = 0; i < d; ++i) {
      out.u[static_cast<std::size_t>(i * d + jj)] = g[static_cast<std::size_t>(i * d + src)];
      out.v[static_cast<std::size_t>(i * d + jj)] = v[static_cast<std::size_t>(i * d + src)];
    }
  }

  // Normalize the nonzero columns of U; complete null columns to an
  // orthonormal basis from coordinate vectors (largest residual, lowest index
  // on ties), so U stays orthogonal even for rank-deficient input.
  const double sigma_max = out.sigma.empty() ? 0.0 : out.sigma[0];
  const double null_threshold = sigma_max * 1e-13;
  for (std::int64_t j = 0; j < d; ++j) {
    const double sj = out.sigma[static_cast<std::size_t>(j)];
    if (sj > null_threshold && sj > 0.0) {
      for (std::int64_t i = 0; i < d; ++i)
        out.u[static_cast<std::size_t>(i * d + j)] /= sj;
      continue;
    }
    std::vector<double> best_col;
    double best_norm = -1.0;
    for (std::int64_t e = 0; e < d; ++e) {
      std::vector<double> cand(static_cast<std::size_t>(d), 0.0);
      cand[static_cast<std::size_t>(e)] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::int64_t jp = 0; jp < j; ++jp) {
          double dot = 0.0;
          for (std::int64_t i = 0; i < d; ++i)
            dot += cand[static_cast<std::size_t>(i)] *
                   out.u[static_cast<std::size_t>(i * d + jp)];
          for (std::int64_t i = 0; i < d; ++i)
            cand[static_cast<std::size_t>(i)] -=
                dot * out.u[static_cast<std::size_t>(i * d + jp)];
        }
      }
      double norm = 0.0;
      for (double x : cand) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > best_norm + 1e-12) {
        best_norm = norm;
        best_col = std::move(cand);
      }
    }
    if (best_norm <= 0.0)
      fail(ErrorKind::numeric, "svd_dxd: failed to complete orthonormal basis");
    for (std::int64_t i = 0; i < d; ++i)
      out.u[static_cast<std::size_t>(i * d + j)] =
          best_col[static_cast<std::size_t>(i)] / best_norm;
    out.sigma[static_cast<std::size_t>(j)] = 0.0;
  }

  // Sign convention: the largest-magnitude entry of each U column (lowest row
  // index on ties) is made positive; V flips jointly so the product is
  // unchanged.
  for (std::int64_t j = 0; j < d; ++j) {
    std::int64_t arg = 0;
    double best = -1.0;
    for (std::int64_t i = 0; i < d; ++i) {
      const double mag = std::fabs(out.u[static_cast<std::size_t>(i * d + j)]);
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (out.u[static_cast<std::size_t>(arg * d + j)] < 0.0) {
      for (std::int64_t i = 0; i < d; ++i) {
        out.u[static_cast<std::size_t>(i * d + j)] = -out.u[static_cast<std::size_t>(i * d + j)];
        out.v[static_cast<std::size_t>(i * d + j)] = -out.v[static_cast<std::size_t>(i * d + j)];
      }
    }
  }
  return out;
}

}  // namespace geoalign
