#pragma once

#include <optional>
#include <vector>

#include "lowrr/data.hpp"

namespace lowrr {

/// Precomputed design blocks shared by every fit on the same (Z, M) layout.
/// The alternating subproblems for the Normal family reduce to Gram-block
/// contractions against the fixed factor, so bootstrap replicates (which
/// change only y) reuse everything here.
///
/// Layout: w = [1 Z] (n x (1+m)), mstack rows are vec(M_i)^T (n x pq).
/// tmap sends a vec(M^T) index to the vec(M) index holding the same entry.
struct DesignCache {
  Index n = 0, m = 0, p = 0, q = 0;
  Matrix w;
  Matrix mstack;
  Matrix g_ww;    // w^T w
  Matrix g_wm;    // w^T mstack
  Matrix g_mm;    // mstack^T mstack
  Matrix g_wm_t;  // columns of g_wm permuted by tmap
  Matrix g_mm_t;  // g_mm with both indices permuted by tmap
  std::vector<Index> tmap;

  explicit DesignCache(const MatrixDataset& data);

  /// X^T X for the full design X = [1 Z Mstack].
  Matrix full_gram() const;

  /// X^T y split into the [1 Z] part and the vec(M) part.
  Vector wty(const Vector& y) const { return w.transpose() * y; }
  Vector mty(const Vector& y) const { return mstack.transpose() * y; }

  /// Factorization of (X^T X / n + eps * D_eta) for ridge_full_fit, primed
  /// once so replicate loops share it. Not thread-safe to prime concurrently.
  void prime_ridge(double eps) const;
  bool has_ridge(double eps) const;
  Vector ridge_solve(const Vector& rhs) const;

 private:
  mutable std::optional<double> ridge_eps_;
  mutable Eigen::LDLT<Matrix> ridge_ldlt_;
};

}  // namespace lowrr
