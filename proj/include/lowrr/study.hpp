#pragma once

#include <string>
#include <vector>

#include "lowrr/hypotest.hpp"
#include "lowrr/scenario.hpp"

namespace lowrr {

struct EstimationStudyRow {
  std::string name;
  double true_value = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double se_mean = 0.0;  // mean of sqrt([Sigma]_jj / n) across replicates
};

struct EstimationStudyReport {
  std::vector<EstimationStudyRow> rows;
  double amse_mean = 0.0;  // mean over replicates of mean_j beta_j^2, true-zero j
  double amse_sd = 0.0;
  int replicates = 0;
  int nonconverged = 0;
};

/// Repeated-fit study of (beta_hat, Sigma_hat) under the FixedCorner truth:
/// per-coordinate Mean/SD/SE for the intercept, the nonzero confounder
/// effects, and the two eta_1 entries, plus the AMSE summary over the
/// true-zero coordinates.
EstimationStudyReport run_estimation_study(const ScenarioConfig& config,
                                           const ModelSpec& spec, int threads);

struct PowerStudyRow {
  StatisticKind kind = StatisticKind::kCombined;
  double c = 0.0;
  double rate = 0.0;
  double mc_se = 0.0;
  int datasets = 0;
};

struct PowerStudyReport {
  std::vector<PowerStudyRow> rows;
  ResamplingMethod method = ResamplingMethod::kParametricBootstrap;
  int reps_per_test = 0;
  double alpha = 0.05;
};

/// Rejection rate at level alpha for each (statistic, effect size) pair.
/// The resampling method follows the design: parametric bootstrap with
/// confounders, permutation without.
PowerStudyReport run_power_study(const ScenarioConfig& config,
                                 const ModelSpec& spec,
                                 const std::vector<StatisticKind>& kinds,
                                 const std::vector<double>& c_grid,
                                 int reps_per_test, double alpha, int threads,
                                 bool freeze_lambda = true);

struct CoordinateRow {
  Index index = 0;  // position in the stacked beta vector
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = -1.0;  // < 0 when not resampled (gamma, xi rows)
  bool significant = false;
};

struct AnalysisReport {
  FitResult fit;
  Matrix eta_hat;
  std::vector<CoordinateRow> coefficients;  // all 1+m+pq coordinates
  std::vector<TestResult> global_tests;
  double alpha = 0.05;
  double bonferroni_level = 0.0;  // alpha / pq, applied to eta p-values
  int failed_reps = 0;
};

/// Full workflow: fit, global tests, per-eta-coordinate resampling p-values
/// with Bonferroni flags, and normal-quantile confidence intervals.
AnalysisReport analyze(const MatrixDataset& data, const ModelSpec& spec,
                       const std::vector<StatisticKind>& kinds,
                       ResamplingMethod method, int reps, double alpha,
                       std::uint64_t seed, int threads,
                       bool freeze_lambda = false);

/// Serialization used by the CLI: a CSV table plus a "key: value" metadata
/// sidecar at <path>.meta.
void write_estimation_report(const std::string& csv_path,
                             const EstimationStudyReport& report,
                             const ScenarioConfig& config,
                             const ModelSpec& spec);
void write_power_report(const std::string& csv_path,
                        const PowerStudyReport& report,
                        const ScenarioConfig& config, const ModelSpec& spec);

std::string coefficient_name(Index j, Index m, Index p, Index q);

}  // namespace lowrr
