#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowrr/data.hpp"
#include "lowrr/estimator.hpp"

namespace lowrr {

enum class StatisticKind { kWald, kMax, kCombined, kGesat, kCombinedGesat };

const char* statistic_name(StatisticKind k);
std::optional<StatisticKind> statistic_from_name(const std::string& name);

enum class ResamplingMethod { kParametricBootstrap, kPermutation };

const char* method_name(ResamplingMethod m);

/// Restricted MLE of (gamma, xi) under eta = 0. sigma_sq is the
/// bootstrap-box residual variance with divisor n - (m+1), Normal only.
struct NullFit {
  double gamma = 0.0;
  Vector xi;
  std::optional<double> sigma_sq;
};

NullFit null_fit(const MatrixDataset& data, Family family);

/// vec(eta_hat)^T {[Sigma]_eta / n}^+ vec(eta_hat).
double t_wald(const FitResult& fit, Index n,
              double pinv_rel_tol = kDefaultPinvRelTol);

/// max over eta coordinates of beta_j^2 / ([Sigma]_j / n). Coordinates whose
/// diagonal falls below 1e-12 times the largest eta diagonal are excluded as
/// structurally degenerate; if every coordinate is excluded the statistic is
/// 0 for eta_hat = 0 and an error otherwise.
double t_max(const FitResult& fit, Index n, Index m, Index p, Index q);

double t_combined(const FitResult& fit, Index n, Index m, Index p, Index q);

/// || sum_i (y_i - gamma~ - xi~^T z_i) vec(M_i) ||^2, the same residual form
/// for both families.
double t_gesat(const MatrixDataset& data, const NullFit& nf);

double t_star(const FitResult& fit, const MatrixDataset& data,
              const NullFit& nf, Index n, Index m, Index p, Index q);

struct TestResult {
  StatisticKind kind = StatisticKind::kCombined;
  double observed = 0.0;
  std::vector<double> resample_values;
  double p_value = 1.0;
  ResamplingMethod method = ResamplingMethod::kParametricBootstrap;
  int reps = 0;  // replicates that produced a value
  std::uint64_t seed = 0;
  int failed_reps = 0;
};

struct ResamplingOptions {
  int reps = 999;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  /// Reuse the observed fit's lambda in replicates instead of re-running the
  /// selection policy. Approximate but much faster for CV policies.
  bool freeze_lambda = false;
  /// Start bootstrap replicate fits from the observed fit's B factor instead
  /// of running the ridge initializer on each replicate. Fixed points are
  /// unchanged; permutation replicates always run the full pipeline so an
  /// identity relabeling reproduces the observed statistic exactly.
  bool warm_start = true;
  /// Also collect per-eta-coordinate squared standardized coefficients and
  /// their resampling p-values.
  bool collect_coordinates = false;
};

/// Everything one resampling pass produces: global tests sharing the same
/// replicate fits, plus optional per-coordinate p-values.
struct ResamplingOutcome {
  std::vector<TestResult> tests;
  FitResult observed_fit;  // empty when no requested statistic needs a fit
  bool has_observed_fit = false;
  NullFit observed_null;
  double lambda_observed = 0.0;
  int failed_reps = 0;
  Vector coord_observed_z2;  // pq, only when collect_coordinates
  Vector coord_p_values;     // pq
};

ResamplingOutcome resampling_test(const MatrixDataset& data,
                                  const ModelSpec& spec,
                                  const std::vector<StatisticKind>& kinds,
                                  ResamplingMethod method,
                                  const ResamplingOptions& opts);

TestResult parametric_bootstrap_pvalue(const MatrixDataset& data,
                                       const ModelSpec& spec,
                                       StatisticKind kind, int reps,
                                       std::uint64_t seed);

/// Permutation test for the no-confounder model; data with m > 0 is a hard
/// error because permuting M would also break its tie to Z.
TestResult permutation_pvalue(const MatrixDataset& data, const ModelSpec& spec,
                              StatisticKind kind, int reps, std::uint64_t seed);

/// Statistic values for one explicit relabeling of the matrix covariates,
/// through the exact pipeline permutation replicates use. The identity
/// permutation reproduces the observed statistics.
std::vector<double> permuted_statistics(const MatrixDataset& data,
                                        const ModelSpec& spec,
                                        const std::vector<StatisticKind>& kinds,
                                        const std::vector<Index>& perm,
                                        std::uint64_t cv_seed);

/// (1 + #{values >= observed}) / (1 + #values).
double add_one_p_value(double observed, const std::vector<double>& values);

}  // namespace lowrr
