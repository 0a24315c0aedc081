#pragma once

#include "lowrr/data.hpp"
#include "lowrr/design_cache.hpp"

namespace lowrr {

/// Sandwich asymptotic covariance of beta_hat and the metadata needed to
/// reuse it in test statistics.
struct SandwichCovariance {
  Matrix matrix;  // (1+m+pq)^2, symmetric
  double lambda_used = 0.0;
  double pinv_rel_tol = kDefaultPinvRelTol;
  Index m = 0, p = 0, q = 0;

  /// Trailing pq x pq principal submatrix: covariance of vec(eta_hat).
  Matrix eta_block() const {
    return matrix.bottomRightCorner(p * q, p * q);
  }
};

/// d beta / d theta: block matrix
///   [ I_{1+m}        0                 0            ]
///   [ 0        B (x) I_p   (I_q (x) A) K_{q,r}      ]
/// of size (1+m+pq) x (1+m+(p+q)r).
Matrix jacobian_delta(const FactorParams& theta);

/// Degrees-of-freedom-corrected residual variance
/// (1/(n-s_r)) sum (y_i - beta^T x_i)^2. Requires n > s_r.
double sigma_sq_hat(const MatrixDataset& data, const CoefVector& beta_hat,
                    Index s_r);

/// Normal: (1/sigma_sq) (1/n) sum X_i X_i^T.
/// Logistic: (1/n) sum nu_i X_i X_i^T with nu_i = mu_i (1 - mu_i).
/// sigma_sq is ignored for the logistic family.
Matrix v_hat(const MatrixDataset& data, const FactorParams& theta_hat,
             Family family, double sigma_sq,
             const DesignCache* cache = nullptr);

/// Sandwich covariance
///   Delta {Delta^T (V + lambda I) Delta}^+ Delta^T V Delta
///         {Delta^T (V + lambda I) Delta}^+ Delta^T,
/// symmetrized as (S + S^T)/2.
SandwichCovariance sandwich_sigma(const Matrix& delta_hat, const Matrix& v,
                                  double lambda, Index m, Index p, Index q,
                                  double pinv_rel_tol = kDefaultPinvRelTol);

/// Same value as sandwich_sigma(jacobian_delta(theta), v, ...) but with the
/// products organized around the Jacobian's block-Kronecker structure;
/// this is what replicate loops call.
SandwichCovariance sandwich_sigma_factored(
    const FactorParams& theta, const Matrix& v, double lambda,
    double pinv_rel_tol = kDefaultPinvRelTol);

/// rank(Delta(theta)) = 1 + m + rank(Delta_eta), computed from the small
/// (p+q)r eigenproblem rather than an SVD of the full Jacobian.
Index jacobian_rank(const FactorParams& theta,
                    double rel_tol = kDefaultPinvRelTol);

/// beta_j +- z_{1-alpha/2} sqrt([Sigma]_j) / sqrt(n). Diagonal entries in
/// [-1e-10, 0) are clamped to zero; more negative values are an error.
std::pair<double, double> confidence_interval(const CoefVector& beta_hat,
                                              const SandwichCovariance& sigma,
                                              Index j, double alpha, Index n);

/// (1 - alpha/2)-quantile of the standard normal distribution.
double normal_quantile_two_sided(double alpha);

}  // namespace lowrr
