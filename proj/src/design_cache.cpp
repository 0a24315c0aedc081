#include "lowrr/design_cache.hpp"

namespace lowrr {

DesignCache::DesignCache(const MatrixDataset& data)
    : n(data.n()), m(data.m()), p(data.p), q(data.q) {
  w.resize(n, 1 + m);
  w.col(0).setOnes();
  if (m > 0) w.rightCols(m) = data.z;

  mstack.resize(n, p * q);
  for (Index i = 0; i < n; ++i) {
    mstack.row(i) = vec(data.mats[i]).transpose();
  }

  g_ww = w.transpose() * w;
  g_wm = w.transpose() * mstack;
  g_mm.noalias() = mstack.transpose() * mstack;

  tmap.resize(p * q);
  for (Index i = 0; i < p; ++i) {
    for (Index k = 0; k < q; ++k) tmap[i * q + k] = k * p + i;
  }
  g_wm_t.resize(1 + m, p * q);
  g_mm_t.resize(p * q, p * q);
  for (Index j = 0; j < p * q; ++j) g_wm_t.col(j) = g_wm.col(tmap[j]);
  for (Index j = 0; j < p * q; ++j) {
    for (Index i = 0; i < p * q; ++i) g_mm_t(i, j) = g_mm(tmap[i], tmap[j]);
  }
}

Matrix DesignCache::full_gram() const {
  const Index d = 1 + m + p * q;
  Matrix g(d, d);
  g.topLeftCorner(1 + m, 1 + m) = g_ww;
  g.topRightCorner(1 + m, p * q) = g_wm;
  g.bottomLeftCorner(p * q, 1 + m) = g_wm.transpose();
  g.bottomRightCorner(p * q, p * q) = g_mm;
  return g;
}

void DesignCache::prime_ridge(double eps) const {
  if (ridge_eps_ && *ridge_eps_ == eps) return;
  Matrix h = full_gram() / static_cast<double>(n);
  h.diagonal().tail(p * q).array() += eps;
  ridge_ldlt_.compute(h);
  ridge_eps_ = eps;
}

bool DesignCache::has_ridge(double eps) const {
  return ridge_eps_ && *ridge_eps_ == eps;
}

Vector DesignCache::ridge_solve(const Vector& rhs) const {
  return ridge_ldlt_.solve(rhs);
}

}  // namespace lowrr
