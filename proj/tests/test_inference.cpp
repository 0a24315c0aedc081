#include <doctest.h>

#include <cmath>
#include <random>

#include "lowrr/errors.hpp"
#include "lowrr/estimator.hpp"
#include "lowrr/inference.hpp"
#include "lowrr/model.hpp"
#include "test_util.hpp"

using namespace lowrr;
using testutil::random_matrix;
using testutil::random_theta;
using testutil::random_vector;

TEST_CASE("jacobian_delta scalar case") {
  FactorParams t;
  t.gamma = 0.1;
  t.xi = Vector(0);
  t.a = Matrix::Constant(1, 1, 2.0);  // a
  t.b = Matrix::Constant(1, 1, 5.0);  // b
  const Matrix d = jacobian_delta(t);
  REQUIRE(d.rows() == 2);
  REQUIRE(d.cols() == 3);
  // d(ab)/da = b, d(ab)/db = a.
  CHECK(d(1, 1) == doctest::Approx(5.0));
  CHECK(d(1, 2) == doctest::Approx(2.0));
}

TEST_CASE("jacobian_delta matches finite differences and has rank s_r") {
  std::mt19937_64 rng(211);
  for (int rep = 0; rep < 20; ++rep) {
    const Index m = 2, p = 4, q = 3, r = 2;
    const FactorParams theta = random_theta(m, p, q, r, rng);
    const Matrix delta = jacobian_delta(theta);

    const Index tdim = 1 + m + (p + q) * r;
    const Index bdim = 1 + m + p * q;
    REQUIRE(delta.rows() == bdim);
    REQUIRE(delta.cols() == tdim);

    auto beta_at = [&](const Vector& tv) {
      FactorParams tt;
      tt.gamma = tv(0);
      tt.xi = tv.segment(1, m);
      tt.a = unvec(tv.segment(1 + m, p * r), p, r);
      tt.b = unvec(tv.tail(q * r), q, r);
      return beta_of_theta(tt).stacked();
    };
    Vector t0(tdim);
    t0(0) = theta.gamma;
    t0.segment(1, m) = theta.xi;
    t0.segment(1 + m, p * r) = vec(theta.a);
    t0.tail(q * r) = vec(theta.b);

    const double h = 1e-6;
    Matrix fd(bdim, tdim);
    for (Index j = 0; j < tdim; ++j) {
      Vector tp = t0, tm = t0;
      tp(j) += h;
      tm(j) -= h;
      fd.col(j) = (beta_at(tp) - beta_at(tm)) / (2.0 * h);
    }
    CHECK((delta - fd).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(numerical_rank(delta) == effective_params(m, p, q, r));
  }
}

TEST_CASE("reparametrization tangents lie in the Jacobian null space") {
  std::mt19937_64 rng(223);
  for (int rep = 0; rep < 10; ++rep) {
    const Index m = 1, p = 4, q = 3, r = 2;
    const FactorParams theta = random_theta(m, p, q, r, rng);
    const Matrix delta = jacobian_delta(theta);
    // Curve theta(t) = (gamma, xi, A C(t), B C(t)^-T), C(0) = I, C'(0) = S:
    // tangent (0, 0, vec(A S), vec(-B S^T)) must map to d beta/dt = 0.
    const Matrix s = random_matrix(r, r, rng);
    Vector tangent = Vector::Zero(delta.cols());
    tangent.segment(1 + m, p * r) = vec((theta.a * s).eval());
    tangent.tail(q * r) = vec((-theta.b * s.transpose()).eval());
    CHECK((delta * tangent).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("sigma_sq_hat") {
  SUBCASE("hand-computed case") {
    Vector y(4);
    y << 1, -1, 1, -1;
    std::vector<Matrix> mats(4, Matrix::Zero(1, 1));
    const MatrixDataset data =
        MatrixDataset::create(y, Matrix(4, 0), mats);
    CoefVector beta;
    beta.gamma = 0.0;
    beta.xi = Vector(0);
    beta.eta_vec = Vector::Zero(1);
    CHECK(sigma_sq_hat(data, beta, 2) == doctest::Approx(2.0));
    CHECK_THROWS_AS(sigma_sq_hat(data, beta, 4), NumericalError);
  }
  SUBCASE("perfect fit") {
    std::mt19937_64 rng(227);
    testutil::DatasetSpec ds;
    ds.n = 30;
    MatrixDataset data = testutil::random_dataset(ds, rng);
    CoefVector beta;
    beta.gamma = 0.4;
    beta.xi = random_vector(ds.m, rng);
    beta.eta_vec = random_vector(ds.p * ds.q, rng);
    data.y = linear_predictor(beta, data);
    CHECK(sigma_sq_hat(data, beta, 5) == doctest::Approx(0.0));
  }
  SUBCASE("Monte Carlo mean near the true variance") {
    std::mt19937_64 rng(229);
    double acc = 0.0;
    const int reps = 200;
    for (int k = 0; k < reps; ++k) {
      testutil::DatasetSpec ds;
      ds.n = 80;
      ds.noise = 1.0;
      const MatrixDataset data = testutil::random_dataset(ds, rng);
      ModelSpec spec;
      spec.family = Family::kNormal;
      spec.rank = 2;
      FitOptions opts;
      opts.compute_sigma = false;
      const FitResult fr = fit_alternating(data, spec, 0.001, opts);
      acc += sigma_sq_hat(data, fr.beta_hat, fr.s_r);
    }
    CHECK(std::abs(acc / reps - 1.0) < 0.05);
  }
}

TEST_CASE("v_hat closed forms") {
  SUBCASE("normal family with unit design") {
    // M_i = 0 and no confounders: X_i = e_1.
    Vector y(5);
    y << 1, 2, 3, 4, 5;
    std::vector<Matrix> mats(5, Matrix::Zero(2, 2));
    const MatrixDataset data = MatrixDataset::create(y, Matrix(5, 0), mats);
    FactorParams theta;
    theta.xi = Vector(0);
    theta.a = Matrix::Zero(2, 1);
    theta.b = Matrix::Zero(2, 1);
    const Matrix v = v_hat(data, theta, Family::kNormal, 1.0);
    Matrix expect = Matrix::Zero(5, 5);
    expect(0, 0) = 1.0;
    CHECK((v - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("logistic at beta = 0 is a quarter of the gram") {
    std::mt19937_64 rng(233);
    testutil::DatasetSpec ds;
    ds.n = 40;
    ds.family = Family::kLogistic;
    const MatrixDataset data = testutil::random_dataset(ds, rng);
    FactorParams theta;
    theta.gamma = 0.0;
    theta.xi = Vector::Zero(ds.m);
    theta.a = Matrix::Zero(ds.p, 1);
    theta.b = Matrix::Zero(ds.q, 1);
    const Matrix v = v_hat(data, theta, Family::kLogistic, 1.0);
    const Matrix x = design_matrix(data);
    const Matrix expect = 0.25 * (x.transpose() * x) / static_cast<double>(ds.n);
    CHECK((v - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("symmetric positive semidefinite") {
    std::mt19937_64 rng(239);
    testutil::DatasetSpec ds;
    ds.family = Family::kLogistic;
    const MatrixDataset data = testutil::random_dataset(ds, rng);
    const FactorParams theta = random_theta(ds.m, ds.p, ds.q, 2, rng);
    const Matrix v = v_hat(data, theta, Family::kLogistic, 1.0);
    CHECK((v - v.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("logistic weights stay in (0, 1/4]") {
  for (double u : {-30.0, -3.0, -0.1, 0.0, 0.1, 3.0, 30.0}) {
    const double mu = logistic_cdf(u);
    const double nu = mu * (1.0 - mu);
    CHECK(nu > 0.0);
    CHECK(nu <= 0.25);
    if (u == 0.0) CHECK(nu == doctest::Approx(0.25));
  }
  // Past |u| ~ 37 the weight underflows double precision; it must still be
  // a clean zero, never negative or non-finite.
  for (double u : {-800.0, 800.0}) {
    const double mu = logistic_cdf(u);
    const double nu = mu * (1.0 - mu);
    CHECK(nu >= 0.0);
    CHECK(nu <= 0.25);
    CHECK(std::isfinite(nu));
  }
}

TEST_CASE("sandwich with identity jacobian inverts V") {
  std::mt19937_64 rng(241);
  const Index d = 6;
  Matrix root = random_matrix(d, d, rng);
  const Matrix v = root * root.transpose() + Matrix::Identity(d, d);
  const SandwichCovariance sw =
      sandwich_sigma(Matrix::Identity(d, d), v, 0.0, 0, 2, 3);
  CHECK((sw.matrix - v.inverse()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sandwich is symmetric with a nonnegative diagonal") {
  std::mt19937_64 rng(251);
  for (int rep = 0; rep < 8; ++rep) {
    const Index m = 1, p = 3, q = 3, r = 2;
    const FactorParams theta = random_theta(m, p, q, r, rng);
    const Matrix delta = jacobian_delta(theta);
    Matrix root = random_matrix(delta.rows(), delta.rows(), rng);
    const Matrix v =
        root * root.transpose() / static_cast<double>(delta.rows());
    const SandwichCovariance sw = sandwich_sigma(delta, v, 0.01, m, p, q);
    CHECK((sw.matrix - sw.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sw.matrix.diagonal().minCoeff() > -1e-10);
    CHECK(sw.eta_block().rows() == p * q);
    CHECK((sw.eta_block() -
           sw.matrix.bottomRightCorner(p * q, p * q)).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("factored sandwich equals the literal formula") {
  std::mt19937_64 rng(271);
  for (int rep = 0; rep < 6; ++rep) {
    const Index m = 2, p = 4, q = 3, r = 2;
    const FactorParams theta = random_theta(m, p, q, r, rng);
    const Index d = 1 + m + p * q;
    Matrix root = random_matrix(d, d, rng);
    const Matrix v = root * root.transpose() / static_cast<double>(d);
    const double lambda = rep % 2 == 0 ? 0.0 : 0.03;
    const Matrix s1 =
        sandwich_sigma(jacobian_delta(theta), v, lambda, m, p, q).matrix;
    const Matrix s2 = sandwich_sigma_factored(theta, v, lambda).matrix;
    CHECK((s1 - s2).cwiseAbs().maxCoeff() <
          1e-9 * (1.0 + s1.cwiseAbs().maxCoeff()));
    CHECK(jacobian_rank(theta) == numerical_rank(jacobian_delta(theta)));
  }
}

TEST_CASE("sandwich is invariant to the factorization of theta") {
  std::mt19937_64 rng(257);
  testutil::DatasetSpec ds;
  ds.n = 90;
  const MatrixDataset data = testutil::random_dataset(ds, rng);
  ModelSpec spec;
  spec.family = Family::kNormal;
  spec.rank = 2;
  const FitResult fr = fit_alternating(data, spec, 0.02);

  const Matrix c = testutil::random_nonsingular(2, rng);
  FactorParams reparam = fr.theta_hat;
  reparam.a = fr.theta_hat.a * c;
  reparam.b = fr.theta_hat.b * c.inverse().transpose();

  const double ssq = *fr.sigma_sq_hat;
  const Matrix v = v_hat(data, fr.theta_hat, Family::kNormal, ssq);
  const Matrix s1 =
      sandwich_sigma(jacobian_delta(fr.theta_hat), v, 0.02, ds.m, ds.p, ds.q)
          .matrix;
  const Matrix s2 =
      sandwich_sigma(jacobian_delta(reparam), v, 0.02, ds.m, ds.p, ds.q)
          .matrix;
  const double scale = s1.cwiseAbs().maxCoeff();
  CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + scale));
}

TEST_CASE("full-rank unpenalized sandwich matches the OLS covariance") {
  std::mt19937_64 rng(263);
  testutil::DatasetSpec ds;
  ds.n = 150;
  ds.p = 3;
  ds.q = 3;
  const MatrixDataset data = testutil::random_dataset(ds, rng);
  ModelSpec spec;
  spec.family = Family::kNormal;
  spec.rank = 3;
  spec.beta_rel_tol = 1e-12;
  spec.max_outer_iters = 500;
  const FitResult fr = fit_alternating(data, spec, 0.0);

  const Matrix x = design_matrix(data);
  const Matrix gram_inv = (x.transpose() * x).inverse();
  const Matrix ols_cov = *fr.sigma_sq_hat * static_cast<double>(ds.n) * gram_inv;
  const Index pq = ds.p * ds.q;
  const Matrix got = fr.sigma_hat.bottomRightCorner(pq, pq);
  const Matrix want = ols_cov.bottomRightCorner(pq, pq);
  CHECK((got - want).cwiseAbs().maxCoeff() <
        1e-6 * (1.0 + want.cwiseAbs().maxCoeff()));
}

TEST_CASE("confidence intervals") {
  SUBCASE("quantile arithmetic") {
    SandwichCovariance sw;
    sw.matrix = Matrix::Zero(3, 3);
    sw.matrix(1, 1) = 4.0;
    sw.m = 2;
    sw.p = 0;
    sw.q = 0;
    CoefVector beta;
    beta.gamma = 0.0;
    beta.xi = Vector::Zero(2);
    beta.xi(0) = 1.0;
    beta.eta_vec = Vector(0);
    const auto [lo, hi] = confidence_interval(beta, sw, 1, 0.05, 100);
    CHECK(lo == doctest::Approx(1.0 - 1.959964 * 0.2).epsilon(1e-5));
    CHECK(hi == doctest::Approx(1.0 + 1.959964 * 0.2).epsilon(1e-5));

    const auto [dlo, dhi] = confidence_interval(beta, sw, 0, 0.05, 100);
    CHECK(dlo == doctest::Approx(0.0));
    CHECK(dhi == doctest::Approx(0.0));
  }

  SUBCASE("Monte Carlo coverage at a desk scale") {
    std::mt19937_64 rng(269);
    int covered = 0;
    const int reps = 150;
    for (int k = 0; k < reps; ++k) {
      const Index n = 250, p = 4, q = 3, m = 2;
      const Vector u0 = Vector::Ones(p);
      const Vector v0 = Vector::Ones(q);
      const Matrix eta = u0 * v0.transpose() / 3.0;
      Vector y(n);
      Matrix z(n, m);
      std::vector<Matrix> mats(n);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (Index i = 0; i < n; ++i) {
        z.row(i) = random_vector(m, rng).transpose();
        mats[i] = random_matrix(p, q, rng);
        y(i) = 0.5 + z.row(i).sum() * 0.3 + vec(eta).dot(vec(mats[i])) +
               gauss(rng);
      }
      Vector xi = Vector::Constant(m, 0.3);
      const MatrixDataset data =
          MatrixDataset::create(std::move(y), std::move(z), std::move(mats));
      ModelSpec spec;
      spec.family = Family::kNormal;
      spec.rank = 1;
      const FitResult fr = fit_alternating(data, spec, 0.01);
      SandwichCovariance sw;
      sw.matrix = fr.sigma_hat;
      sw.lambda_used = fr.lambda_used;
      sw.m = m;
      sw.p = p;
      sw.q = q;
      const Index j = 1 + m;  // eta(1,1), true value 1/3
      const auto [lo, hi] = confidence_interval(fr.beta_hat, sw, j, 0.05, n);
      if (lo <= eta(0, 0) && eta(0, 0) <= hi) ++covered;
      (void)xi;
    }
    const double rate = static_cast<double>(covered) / reps;
    CHECK(rate >= 0.88);
    CHECK(rate <= 0.995);
  }
}
