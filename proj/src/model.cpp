#include "lowrr/model.hpp"

#include <cmath>
#include <set>

#include "lowrr/errors.hpp"

namespace lowrr {

const char* family_name(Family f) {
  return f == Family::kNormal ? "normal" : "logistic";
}

MatrixDataset MatrixDataset::create(Vector y, Matrix z,
                                    std::vector<Matrix> mats,
                                    std::optional<Family> family) {
  MatrixDataset d;
  const Index n = y.size();
  if (n < 1) throw ValidationError("dataset: n must be >= 1");
  if (mats.size() != static_cast<size_t>(n)) {
    throw ValidationError("dataset: response and matrix counts differ");
  }
  if (z.size() > 0 && z.rows() != n) {
    throw ValidationError("dataset: confounder row count differs from n");
  }
  if (z.size() == 0) z = Matrix(n, 0);
  d.p = mats[0].rows();
  d.q = mats[0].cols();
  if (d.p < 1 || d.q < 1) throw ValidationError("dataset: empty matrix covariate");
  for (size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != d.p || mats[i].cols() != d.q) {
      throw ValidationError("dataset: matrix " + std::to_string(i + 1) +
                            " has inconsistent dimensions");
    }
    require_finite(mats[i], "dataset matrix covariate");
  }
  require_finite(y, "dataset response");
  require_finite(z, "dataset confounders");
  d.y = std::move(y);
  d.z = std::move(z);
  d.mats = std::move(mats);
  if (family) validate_for_family(d, *family);
  return d;
}

void validate_for_family(const MatrixDataset& data, Family family) {
  if (family != Family::kLogistic) return;
  for (Index i = 0; i < data.n(); ++i) {
    if (data.y(i) != 0.0 && data.y(i) != 1.0) {
      throw ValidationError("logistic response must be 0 or 1 (row " +
                            std::to_string(i + 1) + ")");
    }
  }
}

CvGrid CvGrid::defaults(Index s_r, Index n, int folds) {
  const double s = static_cast<double>(s_r);
  const double nn = static_cast<double>(n);
  CvGrid g;
  g.lambdas = {s / std::pow(nn, 1.5), s / nn, s / (std::sqrt(nn) * std::log(nn))};
  g.folds = folds;
  return g;
}

Vector CoefVector::stacked() const {
  Vector out(size());
  out(0) = gamma;
  out.segment(1, xi.size()) = xi;
  out.tail(eta_vec.size()) = eta_vec;
  return out;
}

CoefVector CoefVector::from_stacked(const Vector& v, Index m_dim) {
  CoefVector b;
  b.gamma = v(0);
  b.xi = v.segment(1, m_dim);
  b.eta_vec = v.tail(v.size() - 1 - m_dim);
  return b;
}

Vector design_row(const Vector& z_i, const Matrix& m_i) {
  Vector x(1 + z_i.size() + m_i.size());
  x(0) = 1.0;
  x.segment(1, z_i.size()) = z_i;
  x.tail(m_i.size()) = vec(m_i);
  return x;
}

Vector design_row(const Matrix& m_i) { return design_row(Vector(0), m_i); }

Vector design_row(const MatrixDataset& data, Index i) {
  return design_row(data.z.row(i).transpose(), data.mats[i]);
}

Matrix design_matrix(const MatrixDataset& data) {
  const Index n = data.n();
  Matrix x(n, 1 + data.m() + data.p * data.q);
  for (Index i = 0; i < n; ++i) x.row(i) = design_row(data, i).transpose();
  return x;
}

CoefVector beta_of_theta(const FactorParams& theta) {
  CoefVector b;
  b.gamma = theta.gamma;
  b.xi = theta.xi;
  b.eta_vec = vec(theta.a * theta.b.transpose());
  return b;
}

Index effective_params(Index m, Index p, Index q, Index r) {
  if (r < 0 || r > std::min(p, q)) {
    throw ValidationError("effective_params: rank out of range");
  }
  return 1 + m + (p + q - r) * r;
}

double log1pexp(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double logistic_cdf(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Vector linear_predictor(const CoefVector& beta, const MatrixDataset& data) {
  const Index n = data.n();
  Vector u = Vector::Constant(n, beta.gamma);
  if (data.m() > 0) u += data.z * beta.xi;
  for (Index i = 0; i < n; ++i) {
    u(i) += vec(data.mats[i]).dot(beta.eta_vec);
  }
  return u;
}

double log_likelihood_from_predictor(const Vector& u, const Vector& y,
                                     Family family) {
  const Index n = y.size();
  double acc = 0.0;
  if (family == Family::kNormal) {
    for (Index i = 0; i < n; ++i) {
      const double r = y(i) - u(i);
      acc += r * r;
    }
    return -acc / (2.0 * static_cast<double>(n));
  }
  for (Index i = 0; i < n; ++i) acc += y(i) * u(i) - log1pexp(u(i));
  return acc / static_cast<double>(n);
}

double log_likelihood(const CoefVector& beta, const MatrixDataset& data,
                      Family family) {
  return log_likelihood_from_predictor(linear_predictor(beta, data), data.y,
                                       family);
}

double penalized_objective(const FactorParams& theta, const MatrixDataset& data,
                           Family family, double lambda) {
  const double penalty = 0.5 * lambda * frobenius_norm_sq(theta.a) *
                         frobenius_norm_sq(theta.b);
  return log_likelihood(beta_of_theta(theta), data, family) - penalty;
}

Vector penalized_objective_gradient(const FactorParams& theta,
                                    const MatrixDataset& data, Family family,
                                    double lambda) {
  const Index n = data.n();
  const Index m = theta.xi.size();
  const Index p = theta.a.rows();
  const Index q = theta.b.rows();
  const Index r = theta.a.cols();

  const CoefVector beta = beta_of_theta(theta);
  const Vector u = linear_predictor(beta, data);

  // d ell / d beta, accumulated as (scalar_i / n) * X_i.
  Vector gbeta = Vector::Zero(1 + m + p * q);
  for (Index i = 0; i < n; ++i) {
    const double w = (family == Family::kNormal)
                         ? (data.y(i) - u(i))
                         : (data.y(i) - logistic_cdf(u(i)));
    gbeta(0) += w;
    if (m > 0) gbeta.segment(1, m) += w * data.z.row(i).transpose();
    gbeta.tail(p * q) += w * vec(data.mats[i]);
  }
  gbeta /= static_cast<double>(n);

  // Chain rule through eta = A B^T, then subtract the penalty gradient.
  const Matrix geta = unvec(gbeta.tail(p * q), p, q);
  Vector grad(1 + m + (p + q) * r);
  grad(0) = gbeta(0);
  grad.segment(1, m) = gbeta.segment(1, m);
  const Matrix ga = geta * theta.b - lambda * frobenius_norm_sq(theta.b) * theta.a;
  const Matrix gb =
      geta.transpose() * theta.a - lambda * frobenius_norm_sq(theta.a) * theta.b;
  grad.segment(1 + m, p * r) = vec(ga);
  grad.tail(q * r) = vec(gb);
  return grad;
}

}  // namespace lowrr
