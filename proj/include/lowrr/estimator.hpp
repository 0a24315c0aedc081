#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "lowrr/data.hpp"
#include "lowrr/design_cache.hpp"

namespace lowrr {

/// Unrestricted-model ridge fit (L2 penalty ridge_eps on the eta block only;
/// intercept and confounders unpenalized). Returns the eta block as p x q.
Matrix ridge_full_fit(const MatrixDataset& data, Family family,
                      double ridge_eps, const DesignCache* cache = nullptr);

/// Leading r right singular vectors of eta_ridge with the deterministic
/// sign convention; the exact-zero matrix yields the first r canonical
/// basis columns.
Matrix init_b(const Matrix& eta_ridge, Index r);

struct BlockSolution {
  double gamma = 0.0;
  Vector xi;
  Matrix factor;  // A for solve_given_b, B for solve_given_a
};

/// Maximizes the penalized likelihood over (gamma, xi, A) with B fixed,
/// covariates (Z_i, M_i B) and ridge strength lambda * ||B||_F^2 on A.
/// Normal: closed form. Logistic: Newton with step halving to gradient
/// norm <= 1e-8. warm seeds the Newton iterations.
BlockSolution solve_given_b(const MatrixDataset& data, Family family,
                            const Matrix& b_fixed, double lambda,
                            const FactorParams* warm = nullptr,
                            const DesignCache* cache = nullptr);

/// Mirror of solve_given_b: covariates (Z_i, M_i^T A), penalty on B.
BlockSolution solve_given_a(const MatrixDataset& data, Family family,
                            const Matrix& a_fixed, double lambda,
                            const FactorParams* warm = nullptr,
                            const DesignCache* cache = nullptr);

struct FitOptions {
  std::optional<Matrix> init_b;  // overrides the ridge initializer
  double ridge_eps = -1.0;       // < 0 means the default s_r / n
  bool compute_sigma = true;     // populate sigma_hat (and sigma_sq_hat)
  const DesignCache* cache = nullptr;
};

/// The alternating maximizer of the rank-r penalized likelihood at a fixed
/// nominal lambda. The penalty enters the n-averaged objective at weight
/// lambda/n, matching the sum-scale calibration of the default CV grid;
/// lambda_used in the result records the nominal value. Convergence:
/// relative change of beta(theta) below spec.beta_rel_tol. Non-convergence
/// returns the best iterate with converged = false.
FitResult fit_alternating(const MatrixDataset& data, const ModelSpec& spec,
                          double lambda, const FitOptions& opts = {});

struct CvReport {
  double best_lambda = 0.0;
  std::vector<std::pair<double, double>> table;  // (lambda, held-out score)
  int folds = 0;
  std::uint64_t seed = 0;
};

/// K-fold selection over grid.lambdas with seed-determined folds. Score is
/// held-out MSE (Normal) or held-out mean negative log-likelihood
/// (Logistic); ties break toward the larger lambda; a fold that fails to
/// converge scores +inf for that lambda.
CvReport select_lambda_cv(const MatrixDataset& data, const ModelSpec& spec,
                          const CvGrid& grid, std::uint64_t seed);

/// Resolves the lambda policy in spec.penalty (running CV when asked),
/// then delegates to fit_alternating.
FitResult fit(const MatrixDataset& data, const ModelSpec& spec,
              std::uint64_t seed, const FitOptions& opts = {});

}  // namespace lowrr
