#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "lowrr/numkit.hpp"

namespace lowrr {

enum class Family { kNormal, kLogistic };

const char* family_name(Family f);

/// n observations of (response, optional confounders, p x q matrix covariate).
struct MatrixDataset {
  Vector y;                  // length n
  Matrix z;                  // n x m, m == 0 when there are no confounders
  std::vector<Matrix> mats;  // n matrices, all p x q
  Index p = 0;
  Index q = 0;

  Index n() const { return y.size(); }
  Index m() const { return z.cols(); }

  /// Validates dimensions and finiteness; checks y in {0,1} when a family
  /// is given and it is logistic.
  static MatrixDataset create(Vector y, Matrix z, std::vector<Matrix> mats,
                              std::optional<Family> family = std::nullopt);
};

void validate_for_family(const MatrixDataset& data, Family family);

/// Cross-validation setup for the ridge penalty.
struct CvGrid {
  std::vector<double> lambdas;
  int folds = 5;

  /// {s_r/n^{3/2}, s_r/n, s_r/(sqrt(n) log n)}.
  static CvGrid defaults(Index s_r, Index n, int folds = 5);
};

using LambdaPolicy = std::variant<double, CvGrid>;

struct ModelSpec {
  Family family = Family::kNormal;
  Index rank = 1;
  LambdaPolicy penalty = 0.0;
  int max_outer_iters = 200;
  double beta_rel_tol = 1e-6;
};

/// Factor parametrization theta = (gamma, xi, A, B) with eta = A B^T.
struct FactorParams {
  double gamma = 0.0;
  Vector xi;   // length m
  Matrix a;    // p x r
  Matrix b;    // q x r
};

/// Identifiable parameter beta = (gamma, xi, vec(A B^T)).
struct CoefVector {
  double gamma = 0.0;
  Vector xi;       // length m
  Vector eta_vec;  // length pq

  Index size() const { return 1 + xi.size() + eta_vec.size(); }
  Vector stacked() const;
  static CoefVector from_stacked(const Vector& v, Index m_dim);
};

struct FitResult {
  FactorParams theta_hat;
  CoefVector beta_hat;
  Matrix sigma_hat;                    // (1+m+pq)^2 sandwich covariance
  std::optional<double> sigma_sq_hat;  // Normal family only
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double lambda_used = 0.0;
  Index s_r = 0;
};

}  // namespace lowrr
