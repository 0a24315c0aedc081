#pragma once

#include <Eigen/Dense>

namespace lowrr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative singular-value cutoff used by pinv and rank decisions.
inline constexpr double kDefaultPinvRelTol = 1e-8;

/// Throws ValidationError if any entry of m is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

/// Column-major stacking: out[(k-1)p + j] = M(j,k) (1-based).
Vector vec(const Matrix& m);

/// Inverse of vec for the given shape.
Matrix unvec(const Vector& v, Index rows, Index cols);

/// Commutation matrix K_{q,r} of size qr x qr with K * vec(B) = vec(B^T)
/// for every q x r matrix B.
Matrix commutation_matrix(Index q, Index r);

/// Kronecker product, (rows_a*rows_b) x (cols_a*cols_b).
Matrix kron(const Matrix& a, const Matrix& b);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero; the all-zero matrix maps to
/// the all-zero matrix of transposed shape.
Matrix pinv(const Matrix& s, double rel_tol = kDefaultPinvRelTol);

/// Number of singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& m, double rel_tol = kDefaultPinvRelTol);

/// q x r matrix whose columns are right singular vectors of m ordered by
/// descending singular value. Columns are orthonormal even past the
/// numerical rank. Sign convention: the first entry of each column with
/// magnitude above 1e-12 is nonnegative, so results are reproducible.
Matrix leading_right_singular_vectors(const Matrix& m, Index r);

/// Sum of squared entries.
double frobenius_norm_sq(const Matrix& m);

}  // namespace lowrr
