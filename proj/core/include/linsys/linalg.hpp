#pragma once

#include <optional>

#include "linsys/types.hpp"

namespace linsys {

inline constexpr double kDefaultRankTol = 1e-10;

// Moore-Penrose pseudoinverse via SVD. Singular values sigma_i are treated
// as zero when sigma_i <= tol * sigma_max (relative threshold); a zero
// matrix maps to the zero matrix of transposed shape.
Matrix pseudoinverse(const Matrix& m, double rank_tol = kDefaultRankTol);

// Singular values, descending. Length min(rows, cols).
Vector singular_values(const Matrix& m);

// Numerical rank: count of sigma_i > tol * sigma_max.
Index matrix_rank(const Matrix& m, double rank_tol = kDefaultRankTol);

// Projection I - A0 A0^+ onto the orthocomplement of col(A0). With a0
// absent, the identity of size p. Symmetric and idempotent by construction.
Matrix annihilator(const std::optional<Matrix>& a0, Index p,
                   double rank_tol = kDefaultRankTol);

// Kronecker product of column vectors: (a (x) b)[i*len(b)+k] = a[i]*b[k].
Vector kron(const Vector& a, const Vector& b);

// Column-major vectorization, so vec(ABC) = (C^T (x) A) vec(B).
Vector vec(const Matrix& m);

}  // namespace linsys
