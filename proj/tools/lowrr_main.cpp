// lowrr: low-rank matrix-covariate regression with resampling-based tests.
//
// Verbs: fit, cv, test, simulate, analyze. Every output is a CSV table plus
// a "key: value" metadata sidecar at <out>.meta. Exit codes: 0 success,
// 2 input/validation error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lowrr/errors.hpp"
#include "lowrr/estimator.hpp"
#include "lowrr/hypotest.hpp"
#include "lowrr/inference.hpp"
#include "lowrr/io.hpp"
#include "lowrr/model.hpp"
#include "lowrr/scenario.hpp"
#include "lowrr/study.hpp"

namespace {

using namespace lowrr;

struct DataArgs {
  std::string response;
  std::string matrices;
  std::string covariates;
};

struct ModelArgs {
  std::string family = "normal";
  Index rank = 1;
  std::string lambda = "cv";
  int folds = 5;
  double ridge_eps = -1.0;
  int max_iters = 200;
  double tol = 1e-6;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--response", args.response, "response file, one value per line")
      ->required();
  cmd->add_option("--matrices", args.matrices,
                  "matrix-covariate file: 'p q' header, then n CSV rows of "
                  "p*q column-major values")
      ->required();
  cmd->add_option("--covariates", args.covariates,
                  "optional confounder CSV (n rows, m columns)");
}

void add_model_options(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--family", args.family, "normal|logistic")
      ->check(CLI::IsMember({"normal", "logistic"}));
  cmd->add_option("--rank", args.rank, "rank r of the coefficient matrix");
  cmd->add_option("--lambda", args.lambda,
                  "ridge penalty: a number, or 'cv' for cross-validation");
  cmd->add_option("--folds", args.folds, "CV fold count");
  cmd->add_option("--ridge-eps", args.ridge_eps,
                  "initializer ridge strength (default s_r/n)");
  cmd->add_option("--max-iters", args.max_iters, "outer iteration cap");
  cmd->add_option("--tol", args.tol, "relative beta convergence tolerance");
}

Family parse_family(const std::string& name) {
  return name == "logistic" ? Family::kLogistic : Family::kNormal;
}

MatrixDataset load_from(const DataArgs& args, Family family) {
  std::optional<std::string> cov;
  if (!args.covariates.empty()) cov = args.covariates;
  return load_dataset(args.response, args.matrices, cov, family);
}

ModelSpec build_spec(const ModelArgs& args, const MatrixDataset& data) {
  ModelSpec spec;
  spec.family = parse_family(args.family);
  spec.rank = args.rank;
  spec.max_outer_iters = args.max_iters;
  spec.beta_rel_tol = args.tol;
  if (args.lambda == "cv") {
    const Index s_r = effective_params(data.m(), data.p, data.q, args.rank);
    spec.penalty = CvGrid::defaults(s_r, data.n(), args.folds);
  } else {
    double value = 0.0;
    try {
      value = std::stod(args.lambda);
    } catch (const std::exception&) {
      throw ValidationError("--lambda must be a number or 'cv'");
    }
    if (value < 0.0) throw ValidationError("--lambda must be >= 0");
    spec.penalty = value;
  }
  return spec;
}

std::vector<StatisticKind> parse_stats(const std::string& csv) {
  std::vector<StatisticKind> kinds;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto kind = statistic_from_name(token);
    if (!kind) {
      throw ValidationError(
          "unknown statistic '" + token +
          "' (use wald,max,combined,gesat,combined-gesat)");
    }
    kinds.push_back(*kind);
  }
  if (kinds.empty()) throw ValidationError("--stats is empty");
  return kinds;
}

void warn_sample_size(const MatrixDataset& data, Index rank) {
  const Index s_r = effective_params(data.m(), data.p, data.q, rank);
  const double ratio = static_cast<double>(data.n()) / static_cast<double>(s_r);
  if (ratio < 5.0) {
    std::fprintf(stderr,
                 "warning: n/s_r = %.2f is small; rank-%lld estimates may be "
                 "unstable (aim for n/s_r >= 5)\n",
                 ratio, static_cast<long long>(rank));
  }
}

void warn_failed_reps(int failed, int requested) {
  if (failed > 0 && failed * 50 > requested) {  // > 2%
    std::fprintf(stderr,
                 "warning: %d of %d replicate fits failed and were excluded\n",
                 failed, requested);
  }
}

std::vector<std::pair<std::string, std::string>> fit_metadata(
    const ModelArgs& margs, const MatrixDataset& data, const FitResult& fr,
    std::uint64_t seed) {
  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("family", margs.family);
  md.emplace_back("n", std::to_string(data.n()));
  md.emplace_back("p", std::to_string(data.p));
  md.emplace_back("q", std::to_string(data.q));
  md.emplace_back("m", std::to_string(data.m()));
  md.emplace_back("rank", std::to_string(fr.s_r > 0 ? margs.rank : margs.rank));
  md.emplace_back("s_r", std::to_string(fr.s_r));
  md.emplace_back("lambda_policy", margs.lambda);
  md.emplace_back("lambda_used", format_double(fr.lambda_used));
  md.emplace_back("iterations", std::to_string(fr.iterations));
  md.emplace_back("converged", fr.converged ? "true" : "false");
  if (fr.sigma_sq_hat) {
    md.emplace_back("sigma_sq_hat", format_double(*fr.sigma_sq_hat));
  }
  md.emplace_back("beta_rel_tol", format_double(margs.tol));
  md.emplace_back("seed", std::to_string(seed));
  return md;
}

void write_fit_outputs(const std::string& out, const MatrixDataset& data,
                       const FitResult& fr, const ModelArgs& margs,
                       std::uint64_t seed, double alpha) {
  const Index m = data.m();
  const Index p = data.p;
  const Index q = data.q;
  SandwichCovariance sigma;
  sigma.matrix = fr.sigma_hat;
  sigma.lambda_used = fr.lambda_used;
  sigma.m = m;
  sigma.p = p;
  sigma.q = q;
  const Vector beta = fr.beta_hat.stacked();

  std::ostringstream csv;
  csv << "index,name,estimate,se,ci_lo,ci_hi\n";
  for (Index j = 0; j < beta.size(); ++j) {
    const auto [lo, hi] =
        confidence_interval(fr.beta_hat, sigma, j, alpha, data.n());
    const double se = std::sqrt(std::max(0.0, sigma.matrix(j, j)) /
                                static_cast<double>(data.n()));
    csv << j + 1 << "," << coefficient_name(j, m, p, q) << ","
        << format_double(beta(j)) << "," << format_double(se) << ","
        << format_double(lo) << "," << format_double(hi) << "\n";
  }
  write_text_file(out + ".csv", csv.str());

  std::ostringstream eta;
  const Matrix eta_hat = unvec(fr.beta_hat.eta_vec, p, q);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < q; ++j) {
      if (j > 0) eta << ",";
      eta << format_double(eta_hat(i, j));
    }
    eta << "\n";
  }
  write_text_file(out + ".eta.csv", eta.str());

  auto md = fit_metadata(margs, data, fr, seed);
  md.emplace_back("alpha", format_double(alpha));
  const Index jrank = jacobian_rank(fr.theta_hat);
  md.emplace_back("jacobian_rank", std::to_string(jrank));
  if (jrank != fr.s_r) {
    std::fprintf(stderr,
                 "warning: Jacobian rank %lld differs from s_r = %lld; the "
                 "sandwich covariance may be unreliable at this point\n",
                 static_cast<long long>(jrank),
                 static_cast<long long>(fr.s_r));
    md.emplace_back("rank_warning", "true");
  }
  write_metadata(out + ".meta", md);
}

void write_test_outputs(const std::string& out,
                        const std::vector<TestResult>& tests,
                        const std::vector<std::pair<std::string, std::string>>&
                            extra_metadata) {
  std::ostringstream csv;
  csv << "statistic,observed,p_value,reps,failed,method,seed\n";
  for (const auto& t : tests) {
    csv << statistic_name(t.kind) << "," << format_double(t.observed) << ","
        << format_double(t.p_value) << "," << t.reps << "," << t.failed_reps
        << "," << method_name(t.method) << "," << t.seed << "\n";
  }
  write_text_file(out + ".csv", csv.str());

  std::ostringstream res;
  res << "statistic,replicate,value\n";
  for (const auto& t : tests) {
    for (size_t b = 0; b < t.resample_values.size(); ++b) {
      res << statistic_name(t.kind) << "," << b + 1 << ","
          << format_double(t.resample_values[b]) << "\n";
    }
  }
  write_text_file(out + ".resamples.csv", res.str());
  write_metadata(out + ".meta", extra_metadata);
}

int run_fit(const DataArgs& dargs, const ModelArgs& margs,
            const std::string& out, std::uint64_t seed, double alpha) {
  const MatrixDataset data = load_from(dargs, parse_family(margs.family));
  const ModelSpec spec = build_spec(margs, data);
  warn_sample_size(data, margs.rank);
  const FitResult fr = fit(data, spec, seed);
  if (!fr.converged) {
    throw NumericalError("fit did not converge in " +
                         std::to_string(fr.iterations) + " iterations");
  }
  write_fit_outputs(out, data, fr, margs, seed, alpha);
  std::printf("fit: lambda=%s iterations=%d objective=%s -> %s.csv\n",
              format_double(fr.lambda_used).c_str(), fr.iterations,
              format_double(fr.objective_trace.empty()
                                ? 0.0
                                : fr.objective_trace.back())
                  .c_str(),
              out.c_str());
  return 0;
}

int run_cv(const DataArgs& dargs, const ModelArgs& margs,
           const std::string& out, std::uint64_t seed) {
  const MatrixDataset data = load_from(dargs, parse_family(margs.family));
  ModelArgs cv_args = margs;
  cv_args.lambda = "cv";
  const ModelSpec spec = build_spec(cv_args, data);
  const CvReport report =
      select_lambda_cv(data, spec, std::get<CvGrid>(spec.penalty), seed);
  std::ostringstream csv;
  csv << "lambda,score\n";
  for (const auto& [lambda, score] : report.table) {
    csv << format_double(lambda) << "," << format_double(score) << "\n";
  }
  write_text_file(out + ".csv", csv.str());
  write_metadata(out + ".meta",
                 {{"best_lambda", format_double(report.best_lambda)},
                  {"folds", std::to_string(report.folds)},
                  {"seed", std::to_string(seed)},
                  {"family", margs.family},
                  {"rank", std::to_string(margs.rank)}});
  std::printf("cv: best lambda = %s -> %s.csv\n",
              format_double(report.best_lambda).c_str(), out.c_str());
  return 0;
}

int run_test(const DataArgs& dargs, const ModelArgs& margs,
             const std::string& stats, const std::string& method_name_arg,
             int reps, std::uint64_t seed, int threads, bool freeze,
             const std::string& out) {
  const MatrixDataset data = load_from(dargs, parse_family(margs.family));
  const ModelSpec spec = build_spec(margs, data);
  warn_sample_size(data, margs.rank);
  const ResamplingMethod method = method_name_arg == "permutation"
                                      ? ResamplingMethod::kPermutation
                                      : ResamplingMethod::kParametricBootstrap;
  ResamplingOptions opts;
  opts.reps = reps;
  opts.seed = seed;
  opts.threads = threads;
  opts.freeze_lambda = freeze;
  const ResamplingOutcome outcome =
      resampling_test(data, spec, parse_stats(stats), method, opts);
  warn_failed_reps(outcome.failed_reps, reps);

  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("method", method_name(method));
  md.emplace_back("reps_requested", std::to_string(reps));
  md.emplace_back("seed", std::to_string(seed));
  md.emplace_back("family", margs.family);
  md.emplace_back("rank", std::to_string(margs.rank));
  md.emplace_back("lambda_policy", margs.lambda);
  md.emplace_back("lambda_observed", format_double(outcome.lambda_observed));
  md.emplace_back("freeze_lambda", freeze ? "true" : "false");
  write_test_outputs(out, outcome.tests, md);
  for (const auto& t : outcome.tests) {
    std::printf("test %s: observed=%s p=%s (reps=%d)\n",
                statistic_name(t.kind), format_double(t.observed).c_str(),
                format_double(t.p_value).c_str(), t.reps);
  }
  return 0;
}

int run_analyze(const DataArgs& dargs, const ModelArgs& margs,
                const std::string& stats, const std::string& method_name_arg,
                int reps, double alpha, std::uint64_t seed, int threads,
                bool freeze, const std::string& out) {
  const MatrixDataset data = load_from(dargs, parse_family(margs.family));
  const ModelSpec spec = build_spec(margs, data);
  warn_sample_size(data, margs.rank);
  const ResamplingMethod method = method_name_arg == "permutation"
                                      ? ResamplingMethod::kPermutation
                                      : ResamplingMethod::kParametricBootstrap;
  const AnalysisReport report = analyze(data, spec, parse_stats(stats), method,
                                        reps, alpha, seed, threads, freeze);
  warn_failed_reps(report.failed_reps, reps);

  std::ostringstream coef;
  coef << "index,name,estimate,se,ci_lo,ci_hi,p_value,significant\n";
  for (const auto& row : report.coefficients) {
    coef << row.index + 1 << "," << row.name << ","
         << format_double(row.estimate) << "," << format_double(row.se) << ","
         << format_double(row.ci_lo) << "," << format_double(row.ci_hi) << ",";
    if (row.p_value >= 0.0) {
      coef << format_double(row.p_value) << ","
           << (row.significant ? "yes" : "no");
    } else {
      coef << ",";
    }
    coef << "\n";
  }
  write_text_file(out + ".coef.csv", coef.str());

  std::ostringstream eta;
  for (Index i = 0; i < report.eta_hat.rows(); ++i) {
    for (Index j = 0; j < report.eta_hat.cols(); ++j) {
      if (j > 0) eta << ",";
      eta << format_double(report.eta_hat(i, j));
    }
    eta << "\n";
  }
  write_text_file(out + ".eta.csv", eta.str());

  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("method", method_name(method));
  md.emplace_back("reps", std::to_string(reps));
  md.emplace_back("alpha", format_double(alpha));
  md.emplace_back("bonferroni_level", format_double(report.bonferroni_level));
  md.emplace_back("seed", std::to_string(seed));
  md.emplace_back("family", margs.family);
  md.emplace_back("rank", std::to_string(margs.rank));
  md.emplace_back("lambda_policy", margs.lambda);
  md.emplace_back("lambda_used", format_double(report.fit.lambda_used));
  md.emplace_back("jacobian_rank",
                  std::to_string(jacobian_rank(report.fit.theta_hat)));
  write_test_outputs(out + ".tests", report.global_tests, md);
  write_metadata(out + ".meta", md);

  for (const auto& t : report.global_tests) {
    std::printf("analyze %s: p=%s\n", statistic_name(t.kind),
                format_double(t.p_value).c_str());
  }
  int flagged = 0;
  for (const auto& row : report.coefficients) flagged += row.significant ? 1 : 0;
  std::printf("analyze: %d coordinate(s) significant after Bonferroni -> "
              "%s.coef.csv\n",
              flagged, out.c_str());
  return 0;
}

struct SimArgs {
  std::string tmpl = "psqi-normal";
  std::string pattern = "fixed-corner";
  std::string mode = "generate";
  double effect_c = 1.0;
  Index n = 0;
  int replicates = 100;
  double noise_sigma = 1.0;
  std::string c_grid = "0,0.25,0.5,1";
  std::string stats = "combined,combined-gesat,gesat";
  int reps = 199;
  double alpha = 0.05;
  bool exact_lambda = false;
};

int run_simulate(const SimArgs& sargs, const ModelArgs& margs,
                 std::uint64_t seed, int threads, const std::string& out) {
  const auto tmpl = template_from_name(sargs.tmpl);
  if (!tmpl) throw ValidationError("unknown template '" + sargs.tmpl + "'");
  const auto pattern = pattern_from_name(sargs.pattern);
  if (!pattern) throw ValidationError("unknown pattern '" + sargs.pattern + "'");

  ScenarioConfig cfg;
  cfg.tmpl = *tmpl;
  cfg.pattern = *pattern;
  cfg.effect_c = sargs.effect_c;
  cfg.n = sargs.n;
  cfg.replicates = sargs.replicates;
  cfg.seed = seed;
  cfg.noise_sigma = sargs.noise_sigma;

  ModelArgs model = margs;
  model.family = family_name(template_family(cfg.tmpl));
  if (model.rank <= 1 && template_default_rank(cfg.tmpl) > 1) {
    model.rank = template_default_rank(cfg.tmpl);
  }

  if (sargs.mode == "generate") {
    const Scenario sc = generate_scenario(cfg);
    std::optional<std::string> cov;
    if (sc.data.m() > 0) cov = out + ".covariates.csv";
    save_dataset(sc.data, out + ".response.txt", out + ".matrices.csv", cov);
    std::ostringstream truth;
    truth << "index,name,value\n";
    const Vector tb = sc.true_beta.stacked();
    for (Index j = 0; j < tb.size(); ++j) {
      truth << j + 1 << ","
            << coefficient_name(j, sc.data.m(), sc.data.p, sc.data.q) << ","
            << format_double(tb(j)) << "\n";
    }
    write_text_file(out + ".truth.csv", truth.str());
    write_metadata(out + ".meta",
                   {{"template", sargs.tmpl},
                    {"pattern", sargs.pattern},
                    {"effect_c", format_double(sargs.effect_c)},
                    {"n", std::to_string(sc.data.n())},
                    {"seed", std::to_string(seed)},
                    {"noise_sigma", format_double(sargs.noise_sigma)}});
    std::printf("simulate: wrote %s.response.txt, %s.matrices.csv%s\n",
                out.c_str(), out.c_str(),
                sc.data.m() > 0 ? ", covariates" : "");
    return 0;
  }

  const MatrixDataset probe = generate_scenario(cfg).data;
  const ModelSpec spec = build_spec(model, probe);

  if (sargs.mode == "estimation") {
    const EstimationStudyReport report =
        run_estimation_study(cfg, spec, threads);
    write_estimation_report(out + ".csv", report, cfg, spec);
    std::printf("simulate estimation: %d replicates, AMSE %s (sd %s) -> "
                "%s.csv\n",
                report.replicates, format_double(report.amse_mean).c_str(),
                format_double(report.amse_sd).c_str(), out.c_str());
    return 0;
  }
  if (sargs.mode == "power") {
    std::vector<double> c_grid;
    std::stringstream ss(sargs.c_grid);
    std::string token;
    while (std::getline(ss, token, ',')) c_grid.push_back(std::stod(token));
    const PowerStudyReport report =
        run_power_study(cfg, spec, parse_stats(sargs.stats), c_grid,
                        sargs.reps, sargs.alpha, threads, !sargs.exact_lambda);
    write_power_report(out + ".csv", report, cfg, spec);
    std::printf("simulate power: %zu rows -> %s.csv\n", report.rows.size(),
                out.c_str());
    return 0;
  }
  throw ValidationError("unknown --mode '" + sargs.mode +
                        "' (generate|estimation|power)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank matrix-covariate regression"};
  app.require_subcommand(1);

  DataArgs dargs;
  ModelArgs margs;
  SimArgs sargs;
  std::string out = "lowrr_out";
  std::string stats = "combined,combined-gesat,gesat";
  std::string method = "bootstrap";
  std::uint64_t seed = 0;
  int reps = 999;
  int threads = 0;
  double alpha = 0.05;
  bool freeze = false;

  auto* fit_cmd = app.add_subcommand("fit", "fit the rank-r model");
  add_data_options(fit_cmd, dargs);
  add_model_options(fit_cmd, margs);
  fit_cmd->add_option("--seed", seed, "seed (used by CV folds)");
  fit_cmd->add_option("--alpha", alpha, "CI level for the coefficient table");
  fit_cmd->add_option("--out", out, "output path prefix");

  auto* cv_cmd = app.add_subcommand("cv", "cross-validate the penalty");
  add_data_options(cv_cmd, dargs);
  add_model_options(cv_cmd, margs);
  cv_cmd->add_option("--seed", seed, "fold-assignment seed");
  cv_cmd->add_option("--out", out, "output path prefix");

  auto* test_cmd =
      app.add_subcommand("test", "global tests of eta = 0 with resampling");
  add_data_options(test_cmd, dargs);
  add_model_options(test_cmd, margs);
  test_cmd->add_option("--stats", stats,
                       "comma list: wald,max,combined,gesat,combined-gesat");
  test_cmd->add_option("--method", method, "bootstrap|permutation")
      ->check(CLI::IsMember({"bootstrap", "permutation"}));
  test_cmd->add_option("--reps", reps, "resampling replicates");
  test_cmd->add_option("--seed", seed, "resampling seed");
  test_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
  test_cmd->add_flag("--freeze-lambda", freeze,
                     "reuse the observed lambda in replicates (approximate)");
  test_cmd->add_option("--out", out, "output path prefix");

  auto* sim_cmd = app.add_subcommand("simulate",
                                     "synthetic datasets and study engines");
  sim_cmd->add_option("--template", sargs.tmpl, "psqi-normal|eeg-logistic");
  sim_cmd->add_option("--pattern", sargs.pattern,
                      "fixed-corner|sparse2|lowrank-cols2");
  sim_cmd->add_option("--mode", sargs.mode, "generate|estimation|power");
  sim_cmd->add_option("--effect-c", sargs.effect_c, "effect size c");
  sim_cmd->add_option("--n", sargs.n, "sample size (0 = template default)");
  sim_cmd->add_option("--replicates", sargs.replicates,
                      "study replicates / datasets per grid point");
  sim_cmd->add_option("--noise-sigma", sargs.noise_sigma,
                      "Gaussian noise sd (normal template)");
  sim_cmd->add_option("--c-grid", sargs.c_grid, "comma list for power mode");
  sim_cmd->add_option("--stats", sargs.stats, "statistics for power mode");
  sim_cmd->add_option("--reps", sargs.reps, "resampling replicates per test");
  sim_cmd->add_option("--alpha", sargs.alpha, "test level");
  sim_cmd->add_flag("--exact-lambda", sargs.exact_lambda,
                    "re-run lambda selection inside every replicate");
  add_model_options(sim_cmd, margs);
  sim_cmd->add_option("--seed", seed, "master seed");
  sim_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
  sim_cmd->add_option("--out", out, "output path prefix");

  auto* an_cmd = app.add_subcommand(
      "analyze", "fit + global tests + per-coordinate p-values");
  add_data_options(an_cmd, dargs);
  add_model_options(an_cmd, margs);
  an_cmd->add_option("--stats", stats, "global statistics");
  an_cmd->add_option("--method", method, "bootstrap|permutation")
      ->check(CLI::IsMember({"bootstrap", "permutation"}));
  an_cmd->add_option("--reps", reps, "resampling replicates");
  an_cmd->add_option("--alpha", alpha, "level for CIs and Bonferroni flags");
  an_cmd->add_option("--seed", seed, "resampling seed");
  an_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
  an_cmd->add_flag("--freeze-lambda", freeze,
                   "reuse the observed lambda in replicates (approximate)");
  an_cmd->add_option("--out", out, "output path prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return run_fit(dargs, margs, out, seed, alpha);
    if (cv_cmd->parsed()) return run_cv(dargs, margs, out, seed);
    if (test_cmd->parsed()) {
      return run_test(dargs, margs, stats, method, reps, seed, threads, freeze,
                      out);
    }
    if (sim_cmd->parsed()) return run_simulate(sargs, margs, seed, threads, out);
    if (an_cmd->parsed()) {
      return run_analyze(dargs, margs, stats, method, reps, alpha, seed,
                         threads, freeze, out);
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error code=2 message=\"%s\"\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error code=3 message=\"%s\"\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error code=2 message=\"%s\"\n", e.what());
    return 2;
  }
  return 0;
}
