#pragma once

#include <cstdint>
#include <vector>

namespace geoalign {

// Full SVD M = U * diag(sigma) * V^T of a square d-by-d matrix (row-major).
//
// Computed by one-sided cyclic Jacobi orthogonalization: columns of a working
// copy are rotated pairwise until every pair is orthogonal to relative
// precision 1e-12, with at most 60 sweeps. Deterministic output conventions:
// singular values sorted descending (stable under ties), and each column of U
// sign-fixed so its largest-magnitude entry (lowest index on ties) is
// positive, with V flipped jointly. Rank-deficient inputs get their null
// columns of U completed to an orthonormal basis deterministically.
struct SvdResult {
  std::vector<double> u;      // d x d, row-major
  std::vector<double> sigma;  // d, descending, nonnegative
  std::vector<double> v;      // d x d, row-major
};

SvdResult svd_dxd(const std::vector<double>& m, std::int64_t d);

}  // namespace geoalign
