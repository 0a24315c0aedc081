#include "lowrr/inference.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "lowrr/errors.hpp"
#include "lowrr/model.hpp"

namespace lowrr {

Matrix jacobian_delta(const FactorParams& theta) {
  const Index m = theta.xi.size();
  const Index p = theta.a.rows();
  const Index q = theta.b.rows();
  const Index r = theta.a.cols();
  Matrix delta = Matrix::Zero(1 + m + p * q, 1 + m + (p + q) * r);
  delta.topLeftCorner(1 + m, 1 + m).setIdentity();
  delta.block(1 + m, 1 + m, p * q, p * r) = kron(theta.b, Matrix::Identity(p, p));
  delta.block(1 + m, 1 + m + p * r, p * q, q * r) =
      kron(Matrix::Identity(q, q), theta.a) * commutation_matrix(q, r);
  return delta;
}

double sigma_sq_hat(const MatrixDataset& data, const CoefVector& beta_hat,
                    Index s_r) {
  const Index n = data.n();
  if (n <= s_r) {
    throw NumericalError("sigma_sq_hat: need n > s_r, got n=" +
                         std::to_string(n) + ", s_r=" + std::to_string(s_r));
  }
  const Vector u = linear_predictor(beta_hat, data);
  const double rss = (data.y - u).squaredNorm();
  return rss / static_cast<double>(n - s_r);
}

Matrix v_hat(const MatrixDataset& data, const FactorParams& theta_hat,
             Family family, double sigma_sq, const DesignCache* cache) {
  const Index n = data.n();
  if (family == Family::kNormal) {
    Matrix gram;
    if (cache) {
      gram = cache->full_gram();
    } else {
      const Matrix x = design_matrix(data);
      gram.noalias() = x.transpose() * x;
    }
    return gram / (sigma_sq * static_cast<double>(n));
  }
  const CoefVector beta = beta_of_theta(theta_hat);
  const Vector u = linear_predictor(beta, data);
  const Index d = 1 + data.m() + data.p * data.q;
  Matrix v = Matrix::Zero(d, d);
  Vector x(d);
  for (Index i = 0; i < n; ++i) {
    const double mu = logistic_cdf(u(i));
    const double nu = mu * (1.0 - mu);
    x = design_row(data, i);
    v.selfadjointView<Eigen::Lower>().rankUpdate(x, nu);
  }
  v = v.selfadjointView<Eigen::Lower>();
  return v / static_cast<double>(n);
}

SandwichCovariance sandwich_sigma(const Matrix& delta_hat, const Matrix& v,
                                  double lambda, Index m, Index p, Index q,
                                  double pinv_rel_tol) {
  if (delta_hat.rows() != v.rows()) {
    throw ValidationError("sandwich_sigma: dimension mismatch");
  }
  Matrix vd = v * delta_hat;                                     // d x t
  Matrix inner = delta_hat.transpose() * vd;                     // Delta^T V Delta
  Matrix bread = inner + lambda * (delta_hat.transpose() * delta_hat);
  bread = 0.5 * (bread + bread.transpose()).eval();
  Matrix bread_pinv = pinv(bread, pinv_rel_tol);
  Matrix core = bread_pinv * inner * bread_pinv;                 // t x t
  Matrix sigma = delta_hat * core * delta_hat.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  SandwichCovariance out;
  out.matrix = std::move(sigma);
  out.lambda_used = lambda;
  out.pinv_rel_tol = pinv_rel_tol;
  out.m = m;
  out.p = p;
  out.q = q;
  return out;
}

namespace {

// X (k x pq) -> X * Delta_eta with Delta_eta = [B kron I_p, (I_q kron A) K].
Matrix right_mult_delta_eta(const Matrix& x, const Matrix& a, const Matrix& b) {
  const Index p = a.rows();
  const Index q = b.rows();
  const Index r = a.cols();
  Matrix out = Matrix::Zero(x.rows(), (p + q) * r);
  for (Index col = 0; col < r; ++col) {
    for (Index k = 0; k < q; ++k) {
      if (b(k, col) != 0.0) {
        out.middleCols(col * p, p) += b(k, col) * x.middleCols(k * p, p);
      }
    }
  }
  for (Index j = 0; j < q; ++j) {
    const Matrix z = x.middleCols(j * p, p) * a;  // k x r
    for (Index col = 0; col < r; ++col) {
      out.col(p * r + col * q + j) = z.col(col);
    }
  }
  return out;
}

// Y ((p+q)r x k) -> Delta_eta * Y.
Matrix left_mult_delta_eta(const Matrix& y, const Matrix& a, const Matrix& b) {
  const Index p = a.rows();
  const Index q = b.rows();
  const Index r = a.cols();
  Matrix out = Matrix::Zero(p * q, y.cols());
  for (Index k = 0; k < q; ++k) {
    for (Index col = 0; col < r; ++col) {
      if (b(k, col) != 0.0) {
        out.middleRows(k * p, p) += b(k, col) * y.middleRows(col * p, p);
      }
    }
  }
  for (Index j = 0; j < q; ++j) {
    Matrix z(r, y.cols());
    for (Index col = 0; col < r; ++col) {
      z.row(col) = y.row(p * r + col * q + j);
    }
    out.middleRows(j * p, p) += a * z;
  }
  return out;
}

}  // namespace

SandwichCovariance sandwich_sigma_factored(const FactorParams& theta,
                                           const Matrix& v, double lambda,
                                           double pinv_rel_tol) {
  const Index m = theta.xi.size();
  const Index p = theta.a.rows();
  const Index q = theta.b.rows();
  const Index r = theta.a.cols();
  const Index pq = p * q;
  const Index teta = (p + q) * r;
  const Index d = 1 + m + pq;
  const Index t = 1 + m + teta;
  if (v.rows() != d || v.cols() != d) {
    throw ValidationError("sandwich_sigma_factored: dimension mismatch");
  }

  Matrix vd(d, t);
  vd.leftCols(1 + m) = v.leftCols(1 + m);
  vd.rightCols(teta) = right_mult_delta_eta(v.rightCols(pq), theta.a, theta.b);

  Matrix inner(t, t);
  inner.topRows(1 + m) = vd.topRows(1 + m);
  inner.bottomRows(teta) =
      right_mult_delta_eta(vd.bottomRows(pq).transpose(), theta.a, theta.b)
          .transpose();

  const Matrix delta_eta =
      right_mult_delta_eta(Matrix::Identity(pq, pq), theta.a, theta.b);
  Matrix bread = inner;
  bread.diagonal().head(1 + m).array() += lambda;
  bread.bottomRightCorner(teta, teta) +=
      lambda *
      right_mult_delta_eta(delta_eta.transpose(), theta.a, theta.b);
  bread = 0.5 * (bread + bread.transpose()).eval();

  const Matrix bread_pinv = pinv(bread, pinv_rel_tol);
  const Matrix core = bread_pinv * inner * bread_pinv;

  Matrix left(d, t);
  left.topRows(1 + m) = core.topRows(1 + m);
  left.bottomRows(pq) =
      left_mult_delta_eta(core.bottomRows(teta), theta.a, theta.b);
  Matrix sigma(d, d);
  sigma.leftCols(1 + m) = left.leftCols(1 + m);
  sigma.rightCols(pq) =
      left_mult_delta_eta(left.rightCols(teta).transpose(), theta.a, theta.b)
          .transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  SandwichCovariance out;
  out.matrix = std::move(sigma);
  out.lambda_used = lambda;
  out.pinv_rel_tol = pinv_rel_tol;
  out.m = m;
  out.p = p;
  out.q = q;
  return out;
}

Index jacobian_rank(const FactorParams& theta, double rel_tol) {
  // The Jacobian is blockdiag(I_{1+m}, Delta_eta), so its singular values
  // are 1 (repeated 1+m times) plus those of the eta block.
  const Index m = theta.xi.size();
  const Index pq = theta.a.rows() * theta.b.rows();
  const Matrix delta_eta =
      right_mult_delta_eta(Matrix::Identity(pq, pq), theta.a, theta.b);
  Eigen::BDCSVD<Matrix> svd(delta_eta);
  const Vector& sv = svd.singularValues();
  const double smax = std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  const double cut = rel_tol * smax;
  Index rank = 1.0 > cut ? 1 + m : 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  return rank;
}

double normal_quantile_two_sided(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must be in (0,1)");
  }
  boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, 1.0 - alpha / 2.0);
}

std::pair<double, double> confidence_interval(const CoefVector& beta_hat,
                                              const SandwichCovariance& sigma,
                                              Index j, double alpha, Index n) {
  if (j < 0 || j >= sigma.matrix.rows()) {
    throw ValidationError("confidence_interval: coordinate out of range");
  }
  double var_j = sigma.matrix(j, j);
  if (var_j < 0.0) {
    if (var_j < -1e-10) {
      throw NumericalError(
          "confidence_interval: covariance diagonal " + std::to_string(var_j) +
          " below -1e-10; numerical rank setup is off");
    }
    var_j = 0.0;
  }
  const double z = normal_quantile_two_sided(alpha);
  const double half =
      z * std::sqrt(var_j) / std::sqrt(static_cast<double>(n));
  const double center = beta_hat.stacked()(j);
  return {center - half, center + half};
}

}  // namespace lowrr
