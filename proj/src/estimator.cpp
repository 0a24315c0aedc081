#include "lowrr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "lowrr/errors.hpp"
#include "lowrr/inference.hpp"
#include "lowrr/model.hpp"
#include "lowrr/parallel.hpp"
#include "solvers.hpp"

namespace lowrr {

namespace {

using detail::astep_design;
using detail::bstep_design;
using detail::logistic_ridge_newton;
using detail::solve_spd_system;

struct YMoments {
  Vector wty;    // [1 Z]^T y
  Vector mty;    // Mstack^T y
  Vector mty_t;  // permuted to vec(M^T) order
  double yty = 0.0;
};

YMoments compute_y_moments(const DesignCache& cache, const Vector& y) {
  YMoments ym;
  ym.wty = cache.wty(y);
  ym.mty = cache.mty(y);
  ym.mty_t.resize(ym.mty.size());
  for (Index j = 0; j < ym.mty.size(); ++j) ym.mty_t(j) = ym.mty(cache.tmap[j]);
  ym.yty = y.squaredNorm();
  return ym;
}

struct NormalSolveOut {
  Vector coef;       // (gamma, xi, vec(factor))
  double objective;  // penalized objective at the optimum
};

// Exact Normal-family block solve from cached Gram blocks; a_step picks the
// (M_i B) reduction, otherwise the (M_i^T A) one. rho is the effective
// ridge on the factor coordinates.
NormalSolveOut solve_normal_cached(const DesignCache& cache, const YMoments& ym,
                                   const Matrix& f, bool a_step, double rho,
                                   const char* context) {
  const Index inner = a_step ? cache.p : cache.q;
  const Index contracted = a_step ? cache.q : cache.p;
  const Matrix& gmm = a_step ? cache.g_mm : cache.g_mm_t;
  const Matrix& gwm = a_step ? cache.g_wm : cache.g_wm_t;
  const Vector& mty = a_step ? ym.mty : ym.mty_t;
  const Index r = f.cols();
  const Index mw = cache.m;
  const double n = static_cast<double>(cache.n);

  // gmm * (f kron I_inner), then the left contraction, block by block.
  Matrix gf = Matrix::Zero(inner * contracted, inner * r);
  for (Index a = 0; a < r; ++a) {
    for (Index k = 0; k < contracted; ++k) {
      if (f(k, a) != 0.0) {
        gf.middleCols(a * inner, inner) +=
            f(k, a) * gmm.middleCols(k * inner, inner);
      }
    }
  }
  Matrix fgf = Matrix::Zero(inner * r, inner * r);
  Matrix wf = Matrix::Zero(1 + mw, inner * r);
  for (Index a = 0; a < r; ++a) {
    for (Index k = 0; k < contracted; ++k) {
      if (f(k, a) != 0.0) {
        fgf.middleRows(a * inner, inner) +=
            f(k, a) * gf.middleRows(k * inner, inner);
        wf.middleCols(a * inner, inner) +=
            f(k, a) * gwm.middleCols(k * inner, inner);
      }
    }
  }

  const Index d = 1 + mw + inner * r;
  Matrix h(d, d);
  h.topLeftCorner(1 + mw, 1 + mw) = cache.g_ww;
  h.topRightCorner(1 + mw, inner * r) = wf;
  h.bottomLeftCorner(inner * r, 1 + mw) = wf.transpose();
  h.bottomRightCorner(inner * r, inner * r) = fgf;
  h /= n;
  h.diagonal().tail(inner * r).array() += rho;

  Vector g(d);
  g.head(1 + mw) = ym.wty;
  g.tail(inner * r) = vec(unvec(mty, inner, contracted) * f);
  g /= n;

  NormalSolveOut out;
  out.coef = solve_spd_system(h, g, context);
  out.objective = 0.5 * (out.coef.dot(g) - ym.yty / n);
  return out;
}

BlockSolution unpack(const Vector& coef, Index m, Index rows, Index r) {
  BlockSolution s;
  s.gamma = coef(0);
  s.xi = coef.segment(1, m);
  s.factor = unvec(coef.tail(rows * r), rows, r);
  return s;
}

Vector pack_warm(const FactorParams* warm, bool a_step, Index d, Index m,
                 Index rows, Index r) {
  Vector w = Vector::Zero(d);
  if (warm != nullptr && warm->xi.size() == m) {
    const Matrix& factor = a_step ? warm->a : warm->b;
    if (factor.rows() == rows && factor.cols() == r) {
      w(0) = warm->gamma;
      w.segment(1, m) = warm->xi;
      w.tail(rows * r) = vec(factor);
    }
  }
  return w;
}

struct BlockSolveResult {
  BlockSolution solution;
  double objective = 0.0;
};

BlockSolveResult solve_block(const MatrixDataset& data, Family family,
                             const Matrix& fixed, bool a_step, double lambda,
                             const FactorParams* warm, const DesignCache* cache,
                             const YMoments* ym) {
  const Index m = data.m();
  const Index rows = a_step ? data.p : data.q;
  const Index r = fixed.cols();
  const double rho = lambda * frobenius_norm_sq(fixed);
  const char* context = a_step ? "solve_given_b" : "solve_given_a";

  if (family == Family::kNormal) {
    NormalSolveOut out;
    if (cache != nullptr) {
      YMoments local;
      if (ym == nullptr) local = compute_y_moments(*cache, data.y);
      out = solve_normal_cached(*cache, ym != nullptr ? *ym : local, fixed,
                                a_step, rho, context);
    } else {
      // Direct route from the explicit design; the cached route must agree.
      const Matrix x =
          a_step ? astep_design(data, fixed) : bstep_design(data, fixed);
      const double n = static_cast<double>(data.n());
      Matrix h = Matrix::Zero(x.cols(), x.cols());
      h.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0);
      h = h.selfadjointView<Eigen::Lower>();
      h /= n;
      h.diagonal().tail(rows * r).array() += rho;
      const Vector g = x.transpose() * data.y / n;
      out.coef = solve_spd_system(h, g, context);
      out.objective = 0.5 * (out.coef.dot(g) - data.y.squaredNorm() / n);
    }
    return {unpack(out.coef, m, rows, r), out.objective};
  }

  const Matrix x =
      a_step ? astep_design(data, fixed) : bstep_design(data, fixed);
  Vector w0 = pack_warm(warm, a_step, x.cols(), m, rows, r);
  const detail::LogisticSolveOut out =
      logistic_ridge_newton(x, data.y, 1 + m, rho, std::move(w0), context);
  return {unpack(out.coef, m, rows, r), out.objective};
}

double default_ridge_eps(const MatrixDataset& data, Index r) {
  const Index s_r = effective_params(data.m(), data.p, data.q, r);
  return static_cast<double>(s_r) / static_cast<double>(data.n());
}

}  // namespace

Matrix ridge_full_fit(const MatrixDataset& data, Family family,
                      double ridge_eps, const DesignCache* cache) {
  if (ridge_eps <= 0.0) {
    throw ValidationError("ridge_full_fit: ridge_eps must be > 0");
  }
  const Index m = data.m();
  const Index d = 1 + m + data.p * data.q;
  const double n = static_cast<double>(data.n());

  std::unique_ptr<DesignCache> local;
  if (cache == nullptr) {
    local = std::make_unique<DesignCache>(data);
    cache = local.get();
  }

  if (family == Family::kNormal) {
    Vector rhs(d);
    rhs.head(1 + m) = cache->wty(data.y);
    rhs.tail(data.p * data.q) = cache->mty(data.y);
    rhs /= n;
    cache->prime_ridge(ridge_eps);
    const Vector beta = cache->ridge_solve(rhs);
    if (!beta.allFinite()) {
      throw NumericalError("ridge_full_fit: non-finite solution");
    }
    return unvec(beta.tail(data.p * data.q), data.p, data.q);
  }

  Matrix x(data.n(), d);
  x.leftCols(1 + m) = cache->w;
  x.rightCols(data.p * data.q) = cache->mstack;
  const detail::LogisticSolveOut out = logistic_ridge_newton(
      x, data.y, 1 + m, ridge_eps, Vector::Zero(d), "ridge_full_fit");
  return unvec(out.coef.tail(data.p * data.q), data.p, data.q);
}

Matrix init_b(const Matrix& eta_ridge, Index r) {
  if (r < 1 || r > std::min(eta_ridge.rows(), eta_ridge.cols())) {
    throw ValidationError("init_b: rank out of range");
  }
  if (eta_ridge.isZero(0.0)) {
    return Matrix::Identity(eta_ridge.cols(), r);
  }
  return leading_right_singular_vectors(eta_ridge, r);
}

BlockSolution solve_given_b(const MatrixDataset& data, Family family,
                            const Matrix& b_fixed, double lambda,
                            const FactorParams* warm, const DesignCache* cache) {
  require_finite(b_fixed, "solve_given_b factor");
  return solve_block(data, family, b_fixed, true, lambda, warm, cache, nullptr)
      .solution;
}

BlockSolution solve_given_a(const MatrixDataset& data, Family family,
                            const Matrix& a_fixed, double lambda,
                            const FactorParams* warm, const DesignCache* cache) {
  require_finite(a_fixed, "solve_given_a factor");
  return solve_block(data, family, a_fixed, false, lambda, warm, cache, nullptr)
      .solution;
}

FitResult fit_alternating(const MatrixDataset& data, const ModelSpec& spec,
                          double lambda, const FitOptions& opts) {
  const Index m = data.m();
  const Index p = data.p;
  const Index q = data.q;
  const Index r = spec.rank;
  if (r < 1 || r > std::min(p, q)) {
    throw ValidationError("fit: rank must be in [1, min(p,q)]");
  }
  if (lambda < 0.0) throw ValidationError("fit: lambda must be >= 0");
  if (spec.max_outer_iters < 1 || spec.beta_rel_tol <= 0.0) {
    throw ValidationError("fit: bad convergence controls");
  }
  validate_for_family(data, spec.family);

  std::unique_ptr<DesignCache> local;
  const DesignCache* cache = opts.cache;
  if (cache == nullptr) {
    local = std::make_unique<DesignCache>(data);
    cache = local.get();
  }
  const YMoments ym = compute_y_moments(*cache, data.y);

  // The nominal lambda (the CV-grid scale, e.g. s_r/n) is applied at weight
  // lambda/n against the n-averaged likelihood. The default grid is
  // calibrated for a sum-scale likelihood; without this the grid's larger
  // elements flatten eta outright instead of stabilizing it.
  const double lambda_eff = lambda / static_cast<double>(data.n());

  FactorParams theta;
  theta.gamma = 0.0;
  theta.xi = Vector::Zero(m);
  theta.a = Matrix::Zero(p, r);
  if (opts.init_b) {
    if (opts.init_b->rows() != q || opts.init_b->cols() != r) {
      throw ValidationError("fit: init_b has wrong dimensions");
    }
    theta.b = *opts.init_b;
  } else {
    const double eps =
        opts.ridge_eps > 0.0 ? opts.ridge_eps : default_ridge_eps(data, r);
    theta.b = init_b(ridge_full_fit(data, spec.family, eps, cache), r);
  }

  FitResult result;
  result.lambda_used = lambda;
  result.s_r = effective_params(m, p, q, r);
  result.objective_trace.reserve(16);

  Vector beta_prev;
  int k = 0;
  for (; k < spec.max_outer_iters; ++k) {
    try {
      const BlockSolveResult s2 = solve_block(data, spec.family, theta.b, true,
                                              lambda_eff, &theta, cache, &ym);
      theta.gamma = s2.solution.gamma;
      theta.xi = s2.solution.xi;
      theta.a = s2.solution.factor;
      const BlockSolveResult s3 = solve_block(data, spec.family, theta.a, false,
                                              lambda_eff, &theta, cache, &ym);
      theta.gamma = s3.solution.gamma;
      theta.xi = s3.solution.xi;
      theta.b = s3.solution.factor;
      result.objective_trace.push_back(s3.objective);
    } catch (const NumericalError& e) {
      throw NumericalError("fit iteration " + std::to_string(k + 1) + ": " +
                           e.what());
    }
    const Vector beta = beta_of_theta(theta).stacked();
    if (beta_prev.size() > 0) {
      const double rel =
          (beta - beta_prev).norm() / std::max(1.0, beta_prev.norm());
      if (rel < spec.beta_rel_tol) {
        result.converged = true;
        ++k;
        break;
      }
    }
    beta_prev = beta;
  }
  result.iterations = k;
  result.theta_hat = theta;
  result.beta_hat = beta_of_theta(theta);

  if (opts.compute_sigma) {
    double sigma_sq = 1.0;
    if (spec.family == Family::kNormal) {
      sigma_sq = sigma_sq_hat(data, result.beta_hat, result.s_r);
      result.sigma_sq_hat = sigma_sq;
    }
    const Matrix v = v_hat(data, theta, spec.family, sigma_sq, cache);
    SandwichCovariance sw = sandwich_sigma_factored(theta, v, lambda_eff);
    result.sigma_hat = std::move(sw.matrix);
  }
  return result;
}

CvReport select_lambda_cv(const MatrixDataset& data, const ModelSpec& spec,
                          const CvGrid& grid, std::uint64_t seed) {
  if (grid.lambdas.empty()) throw ValidationError("cv: empty lambda grid");
  for (double l : grid.lambdas) {
    if (l < 0.0) throw ValidationError("cv: negative lambda");
  }
  if (grid.folds < 2 || grid.folds > data.n()) {
    throw ValidationError("cv: folds must be in [2, n]");
  }

  CvReport report;
  report.folds = grid.folds;
  report.seed = seed;

  if (grid.lambdas.size() == 1) {
    report.best_lambda = grid.lambdas[0];
    report.table = {
        {grid.lambdas[0], std::numeric_limits<double>::quiet_NaN()}};
    return report;
  }

  const Index n = data.n();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(derive_seed(seed, 0xCF01D5EEDULL));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(n);
  for (Index i = 0; i < n; ++i) {
    fold_of[order[i]] = static_cast<int>(i % grid.folds);
  }

  struct Fold {
    MatrixDataset train;
    std::vector<Index> test_index;
    std::unique_ptr<DesignCache> cache;
  };
  std::vector<Fold> folds(grid.folds);
  for (int f = 0; f < grid.folds; ++f) {
    std::vector<Index> tr;
    for (Index i = 0; i < n; ++i) {
      (fold_of[i] == f ? folds[f].test_index : tr).push_back(i);
    }
    Vector ytr(tr.size());
    Matrix ztr(tr.size(), data.m());
    std::vector<Matrix> mtr(tr.size());
    for (size_t i = 0; i < tr.size(); ++i) {
      ytr(static_cast<Index>(i)) = data.y(tr[i]);
      if (data.m() > 0) ztr.row(static_cast<Index>(i)) = data.z.row(tr[i]);
      mtr[i] = data.mats[tr[i]];
    }
    folds[f].train =
        MatrixDataset::create(std::move(ytr), std::move(ztr), std::move(mtr));
    folds[f].cache = std::make_unique<DesignCache>(folds[f].train);
  }

  double best_lambda = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (double lambda : grid.lambdas) {
    double total_loss = 0.0;
    bool failed = false;
    for (int f = 0; f < grid.folds && !failed; ++f) {
      FitOptions fopts;
      fopts.compute_sigma = false;
      fopts.cache = folds[f].cache.get();
      FitResult fr;
      try {
        fr = fit_alternating(folds[f].train, spec, lambda, fopts);
      } catch (const NumericalError&) {
        failed = true;
        break;
      }
      if (!fr.converged) {
        failed = true;
        break;
      }
      const Vector beta = fr.beta_hat.stacked();
      for (Index i : folds[f].test_index) {
        const double u = beta.dot(design_row(data, i));
        if (spec.family == Family::kNormal) {
          const double e = data.y(i) - u;
          total_loss += e * e;
        } else {
          total_loss += log1pexp(u) - data.y(i) * u;
        }
      }
    }
    const double score = failed ? std::numeric_limits<double>::infinity()
                                : total_loss / static_cast<double>(n);
    report.table.emplace_back(lambda, score);
    if (!have_best || score < best_score ||
        (score == best_score && lambda > best_lambda)) {
      have_best = true;
      best_score = score;
      best_lambda = lambda;
    }
  }
  report.best_lambda = best_lambda;
  return report;
}

FitResult fit(const MatrixDataset& data, const ModelSpec& spec,
              std::uint64_t seed, const FitOptions& opts) {
  double lambda = 0.0;
  if (const double* fixed = std::get_if<double>(&spec.penalty)) {
    lambda = *fixed;
  } else {
    const CvGrid& grid = std::get<CvGrid>(spec.penalty);
    lambda = select_lambda_cv(data, spec, grid, seed).best_lambda;
  }
  return fit_alternating(data, spec, lambda, opts);
}

}  // namespace lowrr
