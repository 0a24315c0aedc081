#include "solvers.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "lowrr/errors.hpp"
#include "lowrr/model.hpp"

namespace lowrr::detail {

Vector solve_spd_system(const Matrix& h, const Vector& g, const char* context) {
  const Index d = h.rows();
  const Vector diag = h.diagonal();
  const double dmax = diag.maxCoeff();
  const double gmax = g.cwiseAbs().maxCoeff();
  if (dmax <= 0.0) {
    if (gmax <= 1e-12) return Vector::Zero(d);
    throw NumericalError(std::string(context) +
                         ": inconsistent degenerate system");
  }
  std::vector<Index> active;
  active.reserve(d);
  for (Index j = 0; j < d; ++j) {
    if (diag(j) > dmax * 1e-14) {
      active.push_back(j);
    } else if (std::abs(g(j)) > 1e-12 * (gmax + 1.0)) {
      throw NumericalError(std::string(context) +
                           ": gradient on a degenerate coordinate");
    }
  }
  const Index da = static_cast<Index>(active.size());
  if (da == d) {
    Eigen::LDLT<Matrix> ldlt(h);
    const Vector pivots = ldlt.vectorD();
    const double pmax = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() < pmax * 1e-13) {
      throw NumericalError(
          std::string(context) +
          ": singular normal equations (ill-posed subproblem)");
    }
    const Vector w = ldlt.solve(g);
    if (!w.allFinite()) {
      throw NumericalError(std::string(context) + ": non-finite solution");
    }
    return w;
  }
  Matrix ha(da, da);
  Vector ga(da);
  for (Index i = 0; i < da; ++i) {
    ga(i) = g(active[i]);
    for (Index j = 0; j < da; ++j) ha(i, j) = h(active[i], active[j]);
  }
  Eigen::LDLT<Matrix> ldlt(ha);
  const Vector pivots = ldlt.vectorD();
  const double pmax = pivots.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || pivots.minCoeff() < pmax * 1e-13) {
    throw NumericalError(std::string(context) +
                         ": singular normal equations (ill-posed subproblem)");
  }
  const Vector wa = ldlt.solve(ga);
  if (!wa.allFinite()) {
    throw NumericalError(std::string(context) + ": non-finite solution");
  }
  Vector w = Vector::Zero(d);
  for (Index i = 0; i < da; ++i) w(active[i]) = wa(i);
  return w;
}

Matrix astep_design(const MatrixDataset& data, const Matrix& b) {
  const Index n = data.n();
  const Index m = data.m();
  const Index cols = data.p * b.cols();
  Matrix x(n, 1 + m + cols);
  x.col(0).setOnes();
  if (m > 0) x.middleCols(1, m) = data.z;
  for (Index i = 0; i < n; ++i) {
    x.row(i).tail(cols) = vec(data.mats[i] * b).transpose();
  }
  return x;
}

Matrix bstep_design(const MatrixDataset& data, const Matrix& a) {
  const Index n = data.n();
  const Index m = data.m();
  const Index cols = data.q * a.cols();
  Matrix x(n, 1 + m + cols);
  x.col(0).setOnes();
  if (m > 0) x.middleCols(1, m) = data.z;
  for (Index i = 0; i < n; ++i) {
    x.row(i).tail(cols) = vec(data.mats[i].transpose() * a).transpose();
  }
  return x;
}

LogisticSolveOut logistic_ridge_newton(const Matrix& x, const Vector& y,
                                       Index pen_start, double rho, Vector w,
                                       const char* context) {
  const Index n = x.rows();
  const Index d = x.cols();
  const double dn = static_cast<double>(n);
  if (w.size() != d) w = Vector::Zero(d);

  auto objective = [&](const Vector& coef) {
    const Vector u = x * coef;
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += y(i) * u(i) - log1pexp(u(i));
    return acc / dn - 0.5 * rho * coef.tail(d - pen_start).squaredNorm();
  };

  double f = objective(w);
  constexpr int kMaxNewton = 100;
  constexpr double kGradTol = 1e-8;
  for (int it = 0; it < kMaxNewton; ++it) {
    const Vector u = x * w;
    Vector resid(n);
    Vector nu(n);
    for (Index i = 0; i < n; ++i) {
      const double mu = logistic_cdf(u(i));
      resid(i) = y(i) - mu;
      nu(i) = mu * (1.0 - mu);
    }
    Vector grad = (x.transpose() * resid) / dn;
    grad.tail(d - pen_start) -= rho * w.tail(d - pen_start);
    if (grad.norm() <= kGradTol) {
      return {w, f};
    }
    Matrix h = Matrix::Zero(d, d);
    h.selfadjointView<Eigen::Lower>().rankUpdate(
        (x.array().colwise() * nu.array().sqrt()).matrix().transpose(), 1.0);
    h = h.selfadjointView<Eigen::Lower>();
    h /= dn;
    h.diagonal().tail(d - pen_start).array() += rho;
    const Vector dir = solve_spd_system(h, grad, context);

    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 50; ++half) {
      const Vector cand = w + t * dir;
      const double fc = objective(cand);
      // Acceptance slack sits at rounding scale so a full fit cannot drift
      // below its starting objective by more than ~1e-13.
      if (fc >= f - 1e-15 * (1.0 + std::abs(f))) {
        w = cand;
        f = fc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      throw NumericalError(std::string(context) +
                           ": Newton line search stalled (gradient " +
                           std::to_string(grad.norm()) + ")");
    }
  }
  throw NumericalError(std::string(context) +
                       ": Newton did not reach gradient tolerance in 100 "
                       "iterations");
}

}  // namespace lowrr::detail
