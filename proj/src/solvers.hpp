#pragma once

// Internal solver utilities shared by the estimator and the resampling
// engine. Not part of the public headers.

#include "lowrr/data.hpp"

namespace lowrr::detail {

/// Solves the PSD system h w = g. Coordinates whose diagonal is exactly
/// degenerate (vanished covariates) are pinned to zero and removed; a
/// singular reduced system throws NumericalError.
Vector solve_spd_system(const Matrix& h, const Vector& g, const char* context);

/// [1 Z vec(M_i B)] row per observation.
Matrix astep_design(const MatrixDataset& data, const Matrix& b);

/// [1 Z vec(M_i^T A)] row per observation.
Matrix bstep_design(const MatrixDataset& data, const Matrix& a);

struct LogisticSolveOut {
  Vector coef;
  double objective = 0.0;
};

/// Newton with step halving for
///   (1/n) sum [y_i u_i - log(1+e^{u_i})] - (rho/2) ||w_tail||^2,
/// with the penalized tail starting at column pen_start. Converges at
/// gradient norm 1e-8; throws NumericalError after 100 iterations.
LogisticSolveOut logistic_ridge_newton(const Matrix& x, const Vector& y,
                                       Index pen_start, double rho, Vector w0,
                                       const char* context);

}  // namespace lowrr::detail
