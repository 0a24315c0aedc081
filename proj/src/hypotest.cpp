#include "lowrr/hypotest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lowrr/errors.hpp"
#include "lowrr/inference.hpp"
#include "lowrr/model.hpp"
#include "lowrr/parallel.hpp"
#include "solvers.hpp"

namespace lowrr {

const char* statistic_name(StatisticKind k) {
  switch (k) {
    case StatisticKind::kWald: return "wald";
    case StatisticKind::kMax: return "max";
    case StatisticKind::kCombined: return "combined";
    case StatisticKind::kGesat: return "gesat";
    case StatisticKind::kCombinedGesat: return "combined-gesat";
  }
  return "?";
}

std::optional<StatisticKind> statistic_from_name(const std::string& name) {
  if (name == "wald") return StatisticKind::kWald;
  if (name == "max") return StatisticKind::kMax;
  if (name == "combined") return StatisticKind::kCombined;
  if (name == "gesat") return StatisticKind::kGesat;
  if (name == "combined-gesat") return StatisticKind::kCombinedGesat;
  return std::nullopt;
}

const char* method_name(ResamplingMethod m) {
  return m == ResamplingMethod::kParametricBootstrap ? "parametric-bootstrap"
                                                     : "permutation";
}

namespace {

NullFit null_fit_normal_from_moments(const Matrix& g_ww, const Vector& wty,
                                     double yty, Index n, Index m) {
  const Vector w =
      detail::solve_spd_system(g_ww / static_cast<double>(n),
                               wty / static_cast<double>(n), "null_fit");
  NullFit nf;
  nf.gamma = w(0);
  nf.xi = w.segment(1, m);
  const double rss = yty - w.dot(wty);
  nf.sigma_sq = std::max(0.0, rss) / static_cast<double>(n - (m + 1));
  return nf;
}

Vector null_residuals(const MatrixDataset& data, const NullFit& nf) {
  Vector r = data.y.array() - nf.gamma;
  if (data.m() > 0) r -= data.z * nf.xi;
  return r;
}

}  // namespace

NullFit null_fit(const MatrixDataset& data, Family family) {
  const Index n = data.n();
  const Index m = data.m();
  if (n <= m + 1) {
    throw ValidationError("null_fit: need n > m + 1");
  }
  if (family == Family::kNormal) {
    Matrix w(n, 1 + m);
    w.col(0).setOnes();
    if (m > 0) w.rightCols(m) = data.z;
    return null_fit_normal_from_moments(w.transpose() * w,
                                        w.transpose() * data.y,
                                        data.y.squaredNorm(), n, m);
  }
  validate_for_family(data, family);
  if (m == 0) {
    const double ybar = data.y.mean();
    if (ybar <= 0.0 || ybar >= 1.0) {
      throw NumericalError("null_fit: all responses equal (separable)");
    }
    NullFit nf;
    nf.gamma = std::log(ybar / (1.0 - ybar));
    nf.xi = Vector(0);
    return nf;
  }
  Matrix w(n, 1 + m);
  w.col(0).setOnes();
  w.rightCols(m) = data.z;
  const detail::LogisticSolveOut out = detail::logistic_ridge_newton(
      w, data.y, 1 + m, 0.0, Vector::Zero(1 + m), "null_fit");
  NullFit nf;
  nf.gamma = out.coef(0);
  nf.xi = out.coef.segment(1, m);
  return nf;
}

namespace {

// Squared standardized coefficients for the eta coordinates, with the
// degenerate-diagonal exclusion rule. Excluded coordinates report 0.
// any_included is false when every coordinate fell below the floor.
Vector eta_z2_vector(const FitResult& fit, Index n, Index m, Index pq,
                     bool* any_included) {
  if (fit.sigma_hat.size() == 0) {
    throw ValidationError("statistic needs a fit with a covariance matrix");
  }
  const Vector beta = fit.beta_hat.stacked();
  Vector z2 = Vector::Zero(pq);
  const Vector diag = fit.sigma_hat.diagonal().tail(pq);
  const double dmax = std::max(0.0, diag.maxCoeff());
  const double floor = 1e-12 * dmax;
  bool included = false;
  for (Index j = 0; j < pq; ++j) {
    if (diag(j) > floor && dmax > 0.0) {
      z2(j) = beta(1 + m + j) * beta(1 + m + j) /
              (diag(j) / static_cast<double>(n));
      included = true;
    }
  }
  if (any_included != nullptr) *any_included = included;
  return z2;
}

}  // namespace

double t_wald(const FitResult& fit, Index n, double pinv_rel_tol) {
  if (fit.sigma_hat.size() == 0) {
    throw ValidationError("t_wald needs a fit with a covariance matrix");
  }
  const Vector& eta = fit.beta_hat.eta_vec;
  const Index pq = eta.size();
  const Matrix scaled =
      fit.sigma_hat.bottomRightCorner(pq, pq) / static_cast<double>(n);
  return eta.dot(pinv(scaled, pinv_rel_tol) * eta);
}

double t_max(const FitResult& fit, Index n, Index m, Index p, Index q) {
  bool any = false;
  const Vector z2 = eta_z2_vector(fit, n, m, p * q, &any);
  if (!any) {
    if (fit.beta_hat.eta_vec.isZero(0.0)) return 0.0;
    throw NumericalError("t_max: every eta coordinate has a degenerate variance");
  }
  return z2.maxCoeff();
}

double t_combined(const FitResult& fit, Index n, Index m, Index p, Index q) {
  return t_wald(fit, n) * t_max(fit, n, m, p, q);
}

double t_gesat(const MatrixDataset& data, const NullFit& nf) {
  const Vector r = null_residuals(data, nf);
  Vector score = Vector::Zero(data.p * data.q);
  for (Index i = 0; i < data.n(); ++i) {
    score += r(i) * vec(data.mats[i]);
  }
  return score.squaredNorm();
}

double t_star(const FitResult& fit, const MatrixDataset& data,
              const NullFit& nf, Index n, Index m, Index p, Index q) {
  return t_combined(fit, n, m, p, q) * t_gesat(data, nf);
}

double add_one_p_value(double observed, const std::vector<double>& values) {
  std::size_t exceed = 0;
  for (double v : values) {
    if (v >= observed) ++exceed;
  }
  return static_cast<double>(1 + exceed) /
         static_cast<double>(1 + values.size());
}

namespace {

bool kind_needs_fit(StatisticKind k) { return k != StatisticKind::kGesat; }

double resolve_lambda(const MatrixDataset& data, const ModelSpec& spec,
                      std::uint64_t cv_seed) {
  if (const double* fixed = std::get_if<double>(&spec.penalty)) return *fixed;
  return select_lambda_cv(data, spec, std::get<CvGrid>(spec.penalty), cv_seed)
      .best_lambda;
}

// One dataset -> all requested statistics. lambda_override < 0 means
// "resolve the spec's policy with cv_seed"; otherwise the value is used
// directly. nf_reuse skips refitting the null model (permutation replicates,
// whose responses are untouched).
std::vector<double> evaluate_dataset(const MatrixDataset& data,
                                     const ModelSpec& spec,
                                     const std::vector<StatisticKind>& kinds,
                                     double lambda_override,
                                     std::uint64_t cv_seed,
                                     const DesignCache* cache,
                                     const NullFit* nf_reuse,
                                     Vector* coord_z2_out, FitResult* fit_out,
                                     NullFit* nf_out, double* lambda_out,
                                     const Matrix* init_b_override = nullptr) {
  const Index n = data.n();
  const Index m = data.m();
  const Index p = data.p;
  const Index q = data.q;

  bool needs_fit = coord_z2_out != nullptr;
  bool needs_null = false;
  for (StatisticKind k : kinds) {
    needs_fit = needs_fit || kind_needs_fit(k);
    needs_null = needs_null || k == StatisticKind::kGesat ||
                 k == StatisticKind::kCombinedGesat;
  }

  NullFit nf;
  if (needs_null || nf_out != nullptr) {
    nf = nf_reuse != nullptr ? *nf_reuse : null_fit(data, spec.family);
    if (nf_out != nullptr) *nf_out = nf;
  }

  FitResult fit;
  double lambda = lambda_override;
  if (needs_fit) {
    if (lambda < 0.0) lambda = resolve_lambda(data, spec, cv_seed);
    FitOptions fopts;
    fopts.cache = cache;
    if (init_b_override != nullptr) fopts.init_b = *init_b_override;
    fit = fit_alternating(data, spec, lambda, fopts);
    if (coord_z2_out != nullptr) {
      *coord_z2_out = eta_z2_vector(fit, n, m, p * q, nullptr);
    }
  }
  if (lambda_out != nullptr) *lambda_out = lambda;

  std::vector<double> values;
  values.reserve(kinds.size());
  for (StatisticKind k : kinds) {
    double v = 0.0;
    switch (k) {
      case StatisticKind::kWald: v = t_wald(fit, n); break;
      case StatisticKind::kMax: v = t_max(fit, n, m, p, q); break;
      case StatisticKind::kCombined: v = t_combined(fit, n, m, p, q); break;
      case StatisticKind::kGesat: v = t_gesat(data, nf); break;
      case StatisticKind::kCombinedGesat:
        v = t_star(fit, data, nf, n, m, p, q);
        break;
    }
    if (!std::isfinite(v)) {
      throw NumericalError(std::string("statistic ") + statistic_name(k) +
                           " is not finite");
    }
    values.push_back(v);
  }
  if (fit_out != nullptr) *fit_out = std::move(fit);
  return values;
}

MatrixDataset permute_mats(const MatrixDataset& data,
                           const std::vector<Index>& perm) {
  if (perm.size() != static_cast<size_t>(data.n())) {
    throw ValidationError("permutation has wrong length");
  }
  std::vector<Matrix> mats(data.mats.size());
  for (Index i = 0; i < data.n(); ++i) mats[i] = data.mats[perm[i]];
  return MatrixDataset::create(data.y, data.z, std::move(mats));
}

}  // namespace

std::vector<double> permuted_statistics(const MatrixDataset& data,
                                        const ModelSpec& spec,
                                        const std::vector<StatisticKind>& kinds,
                                        const std::vector<Index>& perm,
                                        std::uint64_t cv_seed) {
  const MatrixDataset permuted = permute_mats(data, perm);
  return evaluate_dataset(permuted, spec, kinds, -1.0, cv_seed, nullptr,
                          nullptr, nullptr, nullptr, nullptr, nullptr);
}

ResamplingOutcome resampling_test(const MatrixDataset& data,
                                  const ModelSpec& spec,
                                  const std::vector<StatisticKind>& kinds,
                                  ResamplingMethod method,
                                  const ResamplingOptions& opts) {
  if (kinds.empty()) throw ValidationError("no statistics requested");
  if (opts.reps < 1) throw ValidationError("reps must be >= 1");
  validate_for_family(data, spec.family);
  if (method == ResamplingMethod::kPermutation && data.m() > 0) {
    throw ValidationError(
        "the permutation test cannot be applied in the presence of "
        "confounders; use the parametric bootstrap");
  }

  const Index n = data.n();
  const Index pq = data.p * data.q;
  const size_t nk = kinds.size();

  ResamplingOutcome out;
  out.observed_null = null_fit(data, spec.family);

  bool needs_fit = opts.collect_coordinates;
  for (StatisticKind k : kinds) needs_fit = needs_fit || kind_needs_fit(k);

  // Observed pass. Bootstrap replicates reuse this cache because Z and M
  // never change; permutation replicates rebuild their own.
  DesignCache cache(data);
  if (needs_fit && spec.family == Family::kNormal) {
    const Index s_r = effective_params(data.m(), data.p, data.q, spec.rank);
    cache.prime_ridge(static_cast<double>(s_r) / static_cast<double>(n));
  }
  Vector coord_obs;
  const std::vector<double> observed = evaluate_dataset(
      data, spec, kinds, -1.0, derive_seed(opts.seed, 0), &cache,
      &out.observed_null, opts.collect_coordinates ? &coord_obs : nullptr,
      needs_fit ? &out.observed_fit : nullptr, nullptr, &out.lambda_observed);
  out.has_observed_fit = needs_fit;

  const double lambda_override = opts.freeze_lambda ? out.lambda_observed : -1.0;

  std::vector<std::vector<double>> rep_values(nk);
  for (auto& v : rep_values) v.assign(opts.reps, 0.0);
  std::vector<char> ok(opts.reps, 0);
  Matrix rep_z2;
  if (opts.collect_coordinates) rep_z2 = Matrix::Zero(opts.reps, pq);

  parallel_for(opts.reps, opts.threads, [&](int bi) {
    const std::uint64_t rep_seed = derive_seed(opts.seed, bi + 1);
    std::mt19937_64 rng(rep_seed);
    try {
      Vector coord;
      Vector* coord_ptr = opts.collect_coordinates ? &coord : nullptr;
      std::vector<double> vals;
      if (method == ResamplingMethod::kParametricBootstrap) {
        Vector mean = Vector::Constant(n, out.observed_null.gamma);
        if (data.m() > 0) mean += data.z * out.observed_null.xi;
        Vector ystar(n);
        if (spec.family == Family::kNormal) {
          const double sd = std::sqrt(*out.observed_null.sigma_sq);
          std::normal_distribution<double> gauss(0.0, 1.0);
          for (Index i = 0; i < n; ++i) ystar(i) = mean(i) + sd * gauss(rng);
        } else {
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          for (Index i = 0; i < n; ++i) {
            ystar(i) = unif(rng) < logistic_cdf(mean(i)) ? 1.0 : 0.0;
          }
        }
        MatrixDataset rep = data;
        rep.y = std::move(ystar);
        const Matrix* warm = opts.warm_start && out.has_observed_fit
                                 ? &out.observed_fit.theta_hat.b
                                 : nullptr;
        vals = evaluate_dataset(rep, spec, kinds, lambda_override,
                                derive_seed(rep_seed, 1), &cache, nullptr,
                                coord_ptr, nullptr, nullptr, nullptr, warm);
      } else {
        std::vector<Index> perm(n);
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const MatrixDataset rep = permute_mats(data, perm);
        // y is untouched, so the observed null fit carries over.
        vals = evaluate_dataset(rep, spec, kinds, lambda_override,
                                derive_seed(rep_seed, 1), nullptr,
                                &out.observed_null, coord_ptr, nullptr,
                                nullptr, nullptr);
      }
      for (size_t k = 0; k < nk; ++k) rep_values[k][bi] = vals[k];
      if (opts.collect_coordinates) rep_z2.row(bi) = coord.transpose();
      ok[bi] = 1;
    } catch (const NumericalError&) {
      ok[bi] = 0;
    }
  });

  int valid = 0;
  for (char c : ok) valid += c;
  out.failed_reps = opts.reps - valid;
  if (valid == 0) {
    throw NumericalError("resampling: every replicate fit failed");
  }

  out.tests.reserve(nk);
  for (size_t k = 0; k < nk; ++k) {
    TestResult tr;
    tr.kind = kinds[k];
    tr.observed = observed[k];
    tr.method = method;
    tr.seed = opts.seed;
    tr.failed_reps = out.failed_reps;
    tr.resample_values.reserve(valid);
    for (int b = 0; b < opts.reps; ++b) {
      if (ok[b]) tr.resample_values.push_back(rep_values[k][b]);
    }
    tr.reps = valid;
    tr.p_value = add_one_p_value(tr.observed, tr.resample_values);
    out.tests.push_back(std::move(tr));
  }

  if (opts.collect_coordinates) {
    out.coord_observed_z2 = coord_obs;
    out.coord_p_values.resize(pq);
    for (Index j = 0; j < pq; ++j) {
      int exceed = 0;
      for (int b = 0; b < opts.reps; ++b) {
        if (ok[b] && rep_z2(b, j) >= coord_obs(j)) ++exceed;
      }
      out.coord_p_values(j) =
          static_cast<double>(1 + exceed) / static_cast<double>(1 + valid);
    }
  }
  return out;
}

TestResult parametric_bootstrap_pvalue(const MatrixDataset& data,
                                       const ModelSpec& spec,
                                       StatisticKind kind, int reps,
                                       std::uint64_t seed) {
  ResamplingOptions opts;
  opts.reps = reps;
  opts.seed = seed;
  return resampling_test(data, spec, {kind},
                         ResamplingMethod::kParametricBootstrap, opts)
      .tests[0];
}

TestResult permutation_pvalue(const MatrixDataset& data, const ModelSpec& spec,
                              StatisticKind kind, int reps,
                              std::uint64_t seed) {
  ResamplingOptions opts;
  opts.reps = reps;
  opts.seed = seed;
  return resampling_test(data, spec, {kind}, ResamplingMethod::kPermutation,
                         opts)
      .tests[0];
}

}  // namespace lowrr
