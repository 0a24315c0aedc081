#include "lowrr/study.hpp"

#include <cmath>
#include <sstream>

#include "lowrr/errors.hpp"
#include "lowrr/inference.hpp"
#include "lowrr/io.hpp"
#include "lowrr/model.hpp"
#include "lowrr/parallel.hpp"

namespace lowrr {

std::string coefficient_name(Index j, Index m, Index p, Index q) {
  (void)q;
  if (j == 0) return "gamma";
  if (j <= m) return "z" + std::to_string(j);
  const Index e = j - 1 - m;
  const Index row = e % p + 1;
  const Index col = e / p + 1;
  return "eta_" + std::to_string(row) + "_" + std::to_string(col);
}

namespace {

std::vector<Index> tracked_indices(const ScenarioConfig& config, Index m,
                                   Index p) {
  std::vector<Index> idx;
  idx.push_back(0);  // gamma
  if (config.tmpl == ScenarioTemplate::kPsqiNormal) {
    for (Index j = 0; j < 5; ++j) idx.push_back(1 + j);        // xi_G
    for (Index j = 0; j < 3; ++j) idx.push_back(1 + p + j);    // xi_E
  }
  idx.push_back(1 + m);      // eta(1,1)
  idx.push_back(1 + m + 1);  // eta(2,1)
  return idx;
}

}  // namespace

EstimationStudyReport run_estimation_study(const ScenarioConfig& config,
                                           const ModelSpec& spec,
                                           int threads) {
  if (config.pattern != EtaPattern::kFixedCorner) {
    throw ValidationError(
        "estimation study requires the fixed-corner eta pattern");
  }
  if (config.replicates < 2) {
    throw ValidationError("estimation study needs at least 2 replicates");
  }
  const Index p = template_p(config.tmpl);
  const Index m = template_m(config.tmpl);
  const std::vector<Index> tracked = tracked_indices(config, m, p);
  const size_t nt = tracked.size();
  const int reps = config.replicates;

  Matrix estimates(reps, static_cast<Index>(nt));
  Matrix ses(reps, static_cast<Index>(nt));
  Vector amse(reps);
  std::vector<char> converged(reps, 1);
  Vector true_beta_ref;

  {
    ScenarioConfig probe = config;
    probe.seed = derive_seed(config.seed, 0);
    true_beta_ref = generate_scenario(probe).true_beta.stacked();
  }

  parallel_for(reps, threads, [&](int k) {
    ScenarioConfig rc = config;
    rc.seed = derive_seed(config.seed, k);
    const Scenario sc = generate_scenario(rc);
    const FitResult fr =
        fit(sc.data, spec, derive_seed(rc.seed, 0xF17ULL));
    converged[k] = fr.converged ? 1 : 0;
    const Vector beta = fr.beta_hat.stacked();
    const Vector truth = sc.true_beta.stacked();
    const double n = static_cast<double>(sc.data.n());
    for (size_t t = 0; t < nt; ++t) {
      const Index j = tracked[t];
      estimates(k, static_cast<Index>(t)) = beta(j);
      ses(k, static_cast<Index>(t)) =
          std::sqrt(std::max(0.0, fr.sigma_hat(j, j)) / n);
    }
    double acc = 0.0;
    Index zeros = 0;
    for (Index j = 0; j < beta.size(); ++j) {
      if (truth(j) == 0.0) {
        acc += beta(j) * beta(j);
        ++zeros;
      }
    }
    amse(k) = zeros > 0 ? acc / static_cast<double>(zeros) : 0.0;
  });

  EstimationStudyReport report;
  report.replicates = reps;
  for (char c : converged) {
    if (!c) ++report.nonconverged;
  }
  const Index q = template_q(config.tmpl);
  for (size_t t = 0; t < nt; ++t) {
    EstimationStudyRow row;
    row.name = coefficient_name(tracked[t], m, p, q);
    row.true_value = true_beta_ref(tracked[t]);
    const auto col = estimates.col(static_cast<Index>(t));
    row.mean = col.mean();
    row.sd = std::sqrt((col.array() - row.mean).square().sum() /
                       static_cast<double>(reps - 1));
    row.se_mean = ses.col(static_cast<Index>(t)).mean();
    report.rows.push_back(std::move(row));
  }
  report.amse_mean = amse.mean();
  report.amse_sd = std::sqrt((amse.array() - report.amse_mean).square().sum() /
                             static_cast<double>(reps - 1));
  return report;
}

PowerStudyReport run_power_study(const ScenarioConfig& config,
                                 const ModelSpec& spec,
                                 const std::vector<StatisticKind>& kinds,
                                 const std::vector<double>& c_grid,
                                 int reps_per_test, double alpha, int threads,
                                 bool freeze_lambda) {
  if (c_grid.empty()) throw ValidationError("power study: empty effect grid");
  if (kinds.empty()) throw ValidationError("power study: no statistics");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("power study: alpha must be in (0,1)");
  }
  const ResamplingMethod method = template_m(config.tmpl) > 0
                                      ? ResamplingMethod::kParametricBootstrap
                                      : ResamplingMethod::kPermutation;
  PowerStudyReport report;
  report.method = method;
  report.reps_per_test = reps_per_test;
  report.alpha = alpha;

  const int datasets = config.replicates;
  for (size_t ci = 0; ci < c_grid.size(); ++ci) {
    Matrix rejected = Matrix::Zero(datasets, static_cast<Index>(kinds.size()));
    parallel_for(datasets, threads, [&](int k) {
      ScenarioConfig rc = config;
      rc.effect_c = c_grid[ci];
      rc.seed = derive_seed(derive_seed(config.seed, ci), k);
      const Scenario sc = generate_scenario(rc);
      ResamplingOptions opts;
      opts.reps = reps_per_test;
      opts.seed = derive_seed(rc.seed, 0x7E57ULL);
      opts.threads = 1;
      opts.freeze_lambda = freeze_lambda;
      const ResamplingOutcome outcome =
          resampling_test(sc.data, spec, kinds, method, opts);
      for (size_t t = 0; t < kinds.size(); ++t) {
        rejected(k, static_cast<Index>(t)) =
            outcome.tests[t].p_value <= alpha ? 1.0 : 0.0;
      }
    });
    for (size_t t = 0; t < kinds.size(); ++t) {
      PowerStudyRow row;
      row.kind = kinds[t];
      row.c = c_grid[ci];
      row.datasets = datasets;
      row.rate = rejected.col(static_cast<Index>(t)).mean();
      row.mc_se =
          std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(datasets));
      report.rows.push_back(row);
    }
  }
  return report;
}

AnalysisReport analyze(const MatrixDataset& data, const ModelSpec& spec,
                       const std::vector<StatisticKind>& kinds,
                       ResamplingMethod method, int reps, double alpha,
                       std::uint64_t seed, int threads, bool freeze_lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("analyze: alpha must be in (0,1)");
  }
  ResamplingOptions opts;
  opts.reps = reps;
  opts.seed = seed;
  opts.threads = threads;
  opts.freeze_lambda = freeze_lambda;
  opts.collect_coordinates = true;

  std::vector<StatisticKind> requested = kinds;
  if (requested.empty()) {
    requested = {StatisticKind::kCombined, StatisticKind::kCombinedGesat,
                 StatisticKind::kGesat};
  }
  const ResamplingOutcome outcome =
      resampling_test(data, spec, requested, method, opts);

  const Index n = data.n();
  const Index m = data.m();
  const Index p = data.p;
  const Index q = data.q;
  const Index pq = p * q;

  AnalysisReport report;
  report.fit = outcome.observed_fit;
  report.eta_hat = unvec(report.fit.beta_hat.eta_vec, p, q);
  report.global_tests = outcome.tests;
  report.alpha = alpha;
  report.bonferroni_level = alpha / static_cast<double>(pq);
  report.failed_reps = outcome.failed_reps;

  SandwichCovariance sigma;
  sigma.matrix = report.fit.sigma_hat;
  sigma.lambda_used = report.fit.lambda_used;
  sigma.m = m;
  sigma.p = p;
  sigma.q = q;

  const Vector beta = report.fit.beta_hat.stacked();
  for (Index j = 0; j < beta.size(); ++j) {
    CoordinateRow row;
    row.index = j;
    row.name = coefficient_name(j, m, p, q);
    row.estimate = beta(j);
    row.se = std::sqrt(std::max(0.0, sigma.matrix(j, j)) /
                       static_cast<double>(n));
    const auto [lo, hi] =
        confidence_interval(report.fit.beta_hat, sigma, j, alpha, n);
    row.ci_lo = lo;
    row.ci_hi = hi;
    if (j >= 1 + m) {
      row.p_value = outcome.coord_p_values(j - 1 - m);
      row.significant = row.p_value <= report.bonferroni_level;
    }
    report.coefficients.push_back(std::move(row));
  }
  return report;
}

namespace {

std::vector<std::pair<std::string, std::string>> scenario_metadata(
    const ScenarioConfig& config, const ModelSpec& spec) {
  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("template", template_name(config.tmpl));
  md.emplace_back("pattern", pattern_name(config.pattern));
  md.emplace_back("effect_c", format_double(config.effect_c));
  md.emplace_back("n", std::to_string(config.n > 0
                                          ? config.n
                                          : template_default_n(config.tmpl)));
  md.emplace_back("replicates", std::to_string(config.replicates));
  md.emplace_back("seed", std::to_string(config.seed));
  md.emplace_back("noise_sigma", format_double(config.noise_sigma));
  md.emplace_back("family", family_name(spec.family));
  md.emplace_back("rank", std::to_string(spec.rank));
  if (const double* l = std::get_if<double>(&spec.penalty)) {
    md.emplace_back("lambda_policy", "fixed " + format_double(*l));
  } else {
    const CvGrid& g = std::get<CvGrid>(spec.penalty);
    std::string s = "cv{";
    for (size_t i = 0; i < g.lambdas.size(); ++i) {
      if (i) s += ",";
      s += format_double(g.lambdas[i]);
    }
    s += "} folds=" + std::to_string(g.folds);
    md.emplace_back("lambda_policy", s);
  }
  md.emplace_back("beta_rel_tol", format_double(spec.beta_rel_tol));
  md.emplace_back("max_outer_iters", std::to_string(spec.max_outer_iters));
  return md;
}

}  // namespace

void write_estimation_report(const std::string& csv_path,
                             const EstimationStudyReport& report,
                             const ScenarioConfig& config,
                             const ModelSpec& spec) {
  std::ostringstream out;
  out << "name,true,mean,sd,se\n";
  for (const auto& row : report.rows) {
    out << row.name << "," << format_double(row.true_value) << ","
        << format_double(row.mean) << "," << format_double(row.sd) << ","
        << format_double(row.se_mean) << "\n";
  }
  out << "amse," << format_double(0.0) << "," << format_double(report.amse_mean)
      << "," << format_double(report.amse_sd) << ",\n";
  write_text_file(csv_path, out.str());

  auto md = scenario_metadata(config, spec);
  md.emplace_back("nonconverged", std::to_string(report.nonconverged));
  write_metadata(csv_path + ".meta", md);
}

void write_power_report(const std::string& csv_path,
                        const PowerStudyReport& report,
                        const ScenarioConfig& config, const ModelSpec& spec) {
  std::ostringstream out;
  out << "statistic,c,rate,mc_se,datasets\n";
  for (const auto& row : report.rows) {
    out << statistic_name(row.kind) << "," << format_double(row.c) << ","
        << format_double(row.rate) << "," << format_double(row.mc_se) << ","
        << row.datasets << "\n";
  }
  write_text_file(csv_path, out.str());

  auto md = scenario_metadata(config, spec);
  md.emplace_back("method", method_name(report.method));
  md.emplace_back("reps_per_test", std::to_string(report.reps_per_test));
  md.emplace_back("alpha", format_double(report.alpha));
  write_metadata(csv_path + ".meta", md);
}

}  // namespace lowrr
