#include "lowrr/numkit.hpp"

#include <cmath>
#include <string>

#include "lowrr/errors.hpp"

namespace lowrr {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entries");
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entries");
  }
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw ValidationError("unvec: size mismatch");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix commutation_matrix(Index q, Index r) {
  Matrix k = Matrix::Zero(q * r, q * r);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < r; ++j) {
      // vec(B) index j*q+i holds B(i,j); it lands at vec(B^T) index i*r+j.
      k(i * r + j, j * q + i) = 1.0;
    }
  }
  return k;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix pinv(const Matrix& s, double rel_tol) {
  if (s.size() == 0) return Matrix(s.cols(), s.rows());
  if (s.rows() == s.cols() &&
      (s.array() == s.transpose().array()).all()) {
    // Symmetric route: the eigendecomposition gives the same pseudoinverse
    // at roughly half the cost of an SVD.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const Vector& ev = eig.eigenvalues();
    const double emax = ev.cwiseAbs().maxCoeff();
    if (emax == 0.0) return Matrix::Zero(s.cols(), s.rows());
    const double cut = rel_tol * emax;
    Vector inv_ev = Vector::Zero(ev.size());
    for (Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) > cut) inv_ev(i) = 1.0 / ev(i);
    }
    return eig.eigenvectors() * inv_ev.asDiagonal() *
           eig.eigenvectors().transpose();
  }
  Eigen::BDCSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Matrix::Zero(s.cols(), s.rows());
  const double cut = rel_tol * sv(0);
  Vector inv_sv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  return rank;
}

namespace {

// Flip column signs so the first entry with |v| > 1e-12 is nonnegative.
void fix_column_signs(Matrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-12) {
        if (v(i, j) < 0.0) v.col(j) = -v.col(j);
        break;
      }
    }
  }
}

}  // namespace

Matrix leading_right_singular_vectors(const Matrix& m, Index r) {
  if (r < 1 || r > std::min(m.rows(), m.cols())) {
    throw ValidationError("leading_right_singular_vectors: r out of range");
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  Matrix v = svd.matrixV().leftCols(r);
  fix_column_signs(v);
  return v;
}

double frobenius_norm_sq(const Matrix& m) { return m.squaredNorm(); }

}  // namespace lowrr
