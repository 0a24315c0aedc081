#pragma once

#include <random>

#include "lowrr/data.hpp"
#include "lowrr/model.hpp"

namespace testutil {

using lowrr::Family;
using lowrr::Index;
using lowrr::Matrix;
using lowrr::MatrixDataset;
using lowrr::Vector;

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

inline Vector random_vector(Index size, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = gauss(rng);
  return v;
}

// Random nonsingular r x r matrix (redrawn until comfortably conditioned).
inline Matrix random_nonsingular(Index r, std::mt19937_64& rng) {
  for (;;) {
    Matrix c = random_matrix(r, r, rng);
    Eigen::JacobiSVD<Matrix> svd(c);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 0.05 * sv(0)) return c;
  }
}

struct DatasetSpec {
  Index n = 60;
  Index m = 2;
  Index p = 4;
  Index q = 3;
  Family family = Family::kNormal;
  double noise = 0.5;
  double signal = 1.0;  // scale of the random rank-2 eta used for the mean
};

// Small random instance with a genuine low-rank signal in the mean.
inline MatrixDataset random_dataset(const DatasetSpec& ds,
                                    std::mt19937_64& rng) {
  const Matrix eta = ds.signal * random_matrix(ds.p, 2, rng) *
                     random_matrix(ds.q, 2, rng).transpose() / 2.0;
  const Vector xi = random_vector(ds.m, rng);
  const double gamma = 0.3;
  Matrix z(ds.n, ds.m);
  std::vector<Matrix> mats(ds.n);
  Vector y(ds.n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < ds.n; ++i) {
    z.row(i) = random_vector(ds.m, rng).transpose();
    mats[i] = random_matrix(ds.p, ds.q, rng);
    const double mean = gamma + (ds.m > 0 ? z.row(i).dot(xi) : 0.0) +
                        lowrr::vec(eta).dot(lowrr::vec(mats[i]));
    if (ds.family == Family::kNormal) {
      y(i) = mean + ds.noise * gauss(rng);
    } else {
      y(i) = unif(rng) < lowrr::logistic_cdf(mean) ? 1.0 : 0.0;
    }
  }
  return MatrixDataset::create(std::move(y), std::move(z), std::move(mats));
}

inline lowrr::FactorParams random_theta(Index m, Index p, Index q, Index r,
                                        std::mt19937_64& rng) {
  lowrr::FactorParams t;
  t.gamma = random_vector(1, rng)(0);
  t.xi = random_vector(m, rng);
  t.a = random_matrix(p, r, rng);
  t.b = random_matrix(q, r, rng);
  return t;
}

}  // namespace testutil
