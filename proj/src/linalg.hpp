#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

// Small dense helpers for row-major d-by-d matrices stored in std::vector.
// Everything here is deterministic straight-line arithmetic; d stays modest
// (ambient dimension), so no blocking or external kernels are warranted.

namespace geoalign {

inline std::vector<double> mat_identity(std::int64_t d) {
  std::vector<double> m(static_cast<std::size_t>(d * d), 0.0);
  for (std::int64_t i = 0; i < d; ++i) m[static_cast<std::size_t>(i * d + i)] = 1.0;
  return m;
}

// C = A * B
inline std::vector<double> mat_mul(std::span<const double> a,
                                   std::span<const double> b, std::int64_t d) {
  std::vector<double> c(static_cast<std::size_t>(d * d), 0.0);
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t k = 0; k < d; ++k) {
      const double aik = a[static_cast<std::size_t>(i * d + k)];
      if (aik == 0.0) continue;
      const double* brow = &b[static_cast<std::size_t>(k * d)];
      double* crow = &c[static_cast<std::size_t>(i * d)];
      for (std::int64_t j = 0; j < d; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// y = A * x
inline std::vector<double> mat_vec(std::span<const double> a,
                                   std::span<const double> x, std::int64_t d) {
  std::vector<double> y(static_cast<std::size_t>(d), 0.0);
  for (std::int64_t i = 0; i < d; ++i) {
    double s = 0.0;
    const double* row = &a[static_cast<std::size_t>(i * d)];
    for (std::int64_t j = 0; j < d; ++j) s += row[j] * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

inline std::vector<double> mat_transpose(std::span<const double> a, std::int64_t d) {
  std::vector<double> t(static_cast<std::size_t>(d * d));
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      t[static_cast<std::size_t>(j * d + i)] = a[static_cast<std::size_t>(i * d + j)];
  return t;
}

// max_ij |(R^T R - I)_ij|
inline double orthogonality_error(std::span<const double> r, std::int64_t d) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::int64_t k = 0; k < d; ++k)
        s += r[static_cast<std::size_t>(k * d + i)] * r[static_cast<std::size_t>(k * d + j)];
      const double dev = std::fabs(s - (i == j ? 1.0 : 0.0));
      if (dev > worst) worst = dev;
    }
  }
  return worst;
}

// Determinant by LU with partial pivoting.
inline double determinant(std::span<const double> a, std::int64_t d) {
  std::vector<double> m(a.begin(), a.end());
  double det = 1.0;
  for (std::int64_t col = 0; col < d; ++col) {
    std::int64_t piv = col;
    double best = std::fabs(m[static_cast<std::size_t>(col * d + col)]);
    for (std::int64_t r = col + 1; r < d; ++r) {
      const double v = std::fabs(m[static_cast<std::size_t>(r * d + col)]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (std::int64_t j = 0; j < d; ++j)
        std::swap(m[static_cast<std::size_t>(piv * d + j)], m[static_cast<std::size_t>(col * d + j)]);
      det = -det;
    }
    const double pivot = m[static_cast<std::size_t>(col * d + col)];
    det *= pivot;
    for (std::int64_t r = col + 1; r < d; ++r) {
      const double factor = m[static_cast<std::size_t>(r * d + col)] / pivot;
      if (factor == 0.0) continue;
      for (std::int64_t j = col; j < d; ++j)
        m[static_cast<std::size_t>(r * d + j)] -= factor * m[static_cast<std::size_t>(col * d + j)];
    }
  }
  return det;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dev = std::fabs(a[i] - b[i]);
    if (dev > worst) worst = dev;
  }
  return worst;
}

// Neumaier compensated accumulator; used where the contract pins loss-free
// totals (cluster weights) or where sums span many magnitudes.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace geoalign
