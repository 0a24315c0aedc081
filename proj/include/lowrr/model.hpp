#pragma once

#include "lowrr/data.hpp"

namespace lowrr {

/// X_i = (1, Z_i^T, vec(M_i)^T)^T.
Vector design_row(const Vector& z_i, const Matrix& m_i);
Vector design_row(const Matrix& m_i);
Vector design_row(const MatrixDataset& data, Index i);

/// n x (1+m+pq) matrix with rows X_i^T.
Matrix design_matrix(const MatrixDataset& data);

CoefVector beta_of_theta(const FactorParams& theta);

/// s_r = 1 + m + (p+q-r)r, the identifiable parameter count at rank r.
Index effective_params(Index m, Index p, Index q, Index r);

/// log(1 + exp(u)) without overflow.
double log1pexp(double u);

/// 1 / (1 + exp(-u)).
double logistic_cdf(double u);

/// Normal: -(1/2n) sum (y_i - beta^T x_i)^2, no constants and no sigma^2.
/// Logistic: (1/n) sum [y_i u_i - log(1+exp(u_i))].
double log_likelihood(const CoefVector& beta, const MatrixDataset& data,
                      Family family);
double log_likelihood_from_predictor(const Vector& linear_predictor,
                                     const Vector& y, Family family);

/// Linear predictor X beta for all observations.
Vector linear_predictor(const CoefVector& beta, const MatrixDataset& data);

/// log_likelihood(beta(theta)) - (lambda/2) ||A||_F^2 ||B||_F^2.
double penalized_objective(const FactorParams& theta, const MatrixDataset& data,
                           Family family, double lambda);

/// Gradient of the penalized objective with respect to
/// (gamma, xi, vec(A), vec(B)), length 1+m+(p+q)r.
Vector penalized_objective_gradient(const FactorParams& theta,
                                    const MatrixDataset& data, Family family,
                                    double lambda);

}  // namespace lowrr
