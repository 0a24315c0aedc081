#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "lowrr/errors.hpp"
#include "lowrr/io.hpp"
#include "lowrr/model.hpp"
#include "lowrr/scenario.hpp"
#include "lowrr/study.hpp"
#include "test_util.hpp"

using namespace lowrr;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("matrix file format is column-major with a dimension header") {
  const std::string resp = temp_path("lowrr_t1_resp.txt");
  const std::string mat = temp_path("lowrr_t1_mat.csv");
  write_text_file(resp, "1.5\n");
  write_text_file(mat, "2 2\n1,3,2,4\n");
  const MatrixDataset d = load_dataset(resp, mat, std::nullopt);
  CHECK(d.n() == 1);
  CHECK(d.m() == 0);  // no covariate file -> m = 0
  Matrix expect(2, 2);
  expect << 1, 2, 3, 4;
  CHECK(d.mats[0] == expect);
}

TEST_CASE("load_dataset error reporting") {
  const std::string resp = temp_path("lowrr_t2_resp.txt");
  const std::string mat = temp_path("lowrr_t2_mat.csv");
  write_text_file(resp, "1\n0\n");
  write_text_file(mat, "2 2\n1,3,2,4\n1,3,2,oops\n");
  CHECK_THROWS_WITH_AS(load_dataset(resp, mat, std::nullopt),
                       doctest::Contains("row 3, column 4"), ValidationError);

  write_text_file(mat, "2 2\n1,3,2,4\n1,3,2\n");
  CHECK_THROWS_AS(load_dataset(resp, mat, std::nullopt), ValidationError);

  // Logistic domain check happens at load time when the family is known.
  write_text_file(resp, "1\n2\n");
  write_text_file(mat, "2 2\n1,3,2,4\n1,3,2,4\n");
  CHECK_THROWS_AS(load_dataset(resp, mat, std::nullopt, Family::kLogistic),
                  ValidationError);
}

TEST_CASE("dataset save/load round-trips bit-exactly") {
  std::mt19937_64 rng(503);
  testutil::DatasetSpec ds;
  ds.n = 17;
  ds.m = 3;
  const MatrixDataset d = testutil::random_dataset(ds, rng);
  const std::string resp = temp_path("lowrr_t3_resp.txt");
  const std::string mat = temp_path("lowrr_t3_mat.csv");
  const std::string cov = temp_path("lowrr_t3_cov.csv");
  save_dataset(d, resp, mat, cov);
  const MatrixDataset back = load_dataset(resp, mat, cov);
  CHECK(back.y == d.y);
  CHECK(back.z == d.z);
  for (Index i = 0; i < d.n(); ++i) CHECK(back.mats[i] == d.mats[i]);
}

TEST_CASE("scenario generators honor their declared structure") {
  SUBCASE("zero effect size zeroes eta under every pattern") {
    for (EtaPattern pat : {EtaPattern::kFixedCorner, EtaPattern::kSparse2,
                           EtaPattern::kLowRankCols2}) {
      ScenarioConfig cfg;
      cfg.tmpl = ScenarioTemplate::kEegLogistic;
      cfg.pattern = pat;
      cfg.effect_c = 0.0;
      cfg.n = 40;
      cfg.seed = 5;
      CHECK(generate_scenario(cfg).true_beta.eta_vec.isZero(0.0));
    }
  }
  SUBCASE("fixed corner at c = 1") {
    ScenarioConfig cfg;
    cfg.tmpl = ScenarioTemplate::kPsqiNormal;
    cfg.pattern = EtaPattern::kFixedCorner;
    cfg.effect_c = 1.0;
    cfg.n = 30;
    cfg.seed = 9;
    const Scenario s = generate_scenario(cfg);
    const Matrix eta = unvec(s.true_beta.eta_vec, 15, 7);
    CHECK(eta(0, 0) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK(eta(1, 0) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK(eta.cwiseAbs().sum() ==
          doctest::Approx(2.0 * 0.70710678).epsilon(1e-6));
  }
  SUBCASE("sparse2 mass and norm") {
    ScenarioConfig cfg;
    cfg.tmpl = ScenarioTemplate::kEegLogistic;
    cfg.pattern = EtaPattern::kSparse2;
    cfg.effect_c = 1.7;
    cfg.n = 30;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      const Scenario s = generate_scenario(cfg);
      int nonzero = 0;
      for (Index j = 0; j < s.true_beta.eta_vec.size(); ++j) {
        if (s.true_beta.eta_vec(j) != 0.0) ++nonzero;
      }
      CHECK(nonzero == 2);
      CHECK(s.true_beta.eta_vec.norm() == doctest::Approx(1.7).epsilon(1e-12));
    }
  }
  SUBCASE("low-rank columns pattern") {
    ScenarioConfig cfg;
    cfg.tmpl = ScenarioTemplate::kPsqiNormal;
    cfg.pattern = EtaPattern::kLowRankCols2;
    cfg.effect_c = 0.9;
    cfg.n = 30;
    cfg.seed = 13;
    const Scenario s = generate_scenario(cfg);
    const Matrix eta = unvec(s.true_beta.eta_vec, 15, 7);
    CHECK(eta.rightCols(5).isZero(0.0));
    CHECK(eta.norm() == doctest::Approx(0.9).epsilon(1e-12));
    Eigen::JacobiSVD<Matrix> svd(eta);
    CHECK(svd.singularValues()(2) < 1e-12);
  }
  SUBCASE("psqi interactions satisfy M(j,k) = G_j E_k") {
    ScenarioConfig cfg;
    cfg.tmpl = ScenarioTemplate::kPsqiNormal;
    cfg.n = 25;
    cfg.seed = 17;
    const Scenario s = generate_scenario(cfg);
    CHECK(s.data.m() == 22);
    for (Index i = 0; i < s.data.n(); ++i) {
      for (Index j = 0; j < 15; ++j) {
        for (Index k = 0; k < 7; ++k) {
          CHECK(s.data.mats[i](j, k) ==
                doctest::Approx(s.data.z(i, j) * s.data.z(i, 15 + k)));
        }
      }
    }
  }
  SUBCASE("same seed reproduces the same dataset") {
    ScenarioConfig cfg;
    cfg.tmpl = ScenarioTemplate::kEegLogistic;
    cfg.pattern = EtaPattern::kSparse2;
    cfg.effect_c = 0.8;
    cfg.n = 50;
    cfg.seed = 21;
    const Scenario a = generate_scenario(cfg);
    const Scenario b = generate_scenario(cfg);
    CHECK(a.data.y == b.data.y);
    for (Index i = 0; i < a.data.n(); ++i) {
      CHECK(a.data.mats[i] == b.data.mats[i]);
    }
  }
}

TEST_CASE("estimation study in the near-noiseless limit") {
  ScenarioConfig cfg;
  cfg.tmpl = ScenarioTemplate::kPsqiNormal;
  cfg.pattern = EtaPattern::kFixedCorner;
  cfg.effect_c = 1.0;
  cfg.n = 400;
  cfg.replicates = 4;
  cfg.seed = 31;
  cfg.noise_sigma = 1e-6;
  ModelSpec spec;
  spec.family = Family::kNormal;
  spec.rank = 3;
  spec.penalty = 1e-9;
  const EstimationStudyReport rep = run_estimation_study(cfg, spec, 1);
  for (const auto& row : rep.rows) {
    CHECK(std::abs(row.mean - row.true_value) < 1e-3);
  }
  CHECK(rep.amse_mean < 1e-6);
  CHECK(rep.nonconverged == 0);
}

TEST_CASE("estimation study serialization is reproducible") {
  ScenarioConfig cfg;
  cfg.tmpl = ScenarioTemplate::kEegLogistic;
  cfg.pattern = EtaPattern::kFixedCorner;
  cfg.effect_c = 1.0;
  cfg.n = 80;
  cfg.replicates = 3;
  cfg.seed = 37;
  ModelSpec spec;
  spec.family = Family::kLogistic;
  spec.rank = 2;
  spec.penalty = 0.05;
  const EstimationStudyReport r1 = run_estimation_study(cfg, spec, 1);
  const EstimationStudyReport r2 = run_estimation_study(cfg, spec, 2);
  const std::string p1 = temp_path("lowrr_est1.csv");
  const std::string p2 = temp_path("lowrr_est2.csv");
  write_estimation_report(p1, r1, cfg, spec);
  write_estimation_report(p2, r2, cfg, spec);
  CHECK(read_text_file(p1) == read_text_file(p2));
  CHECK(read_text_file(p1 + ".meta") == read_text_file(p2 + ".meta"));
}

TEST_CASE("power study smoke and determinism") {
  ScenarioConfig cfg;
  cfg.tmpl = ScenarioTemplate::kEegLogistic;
  cfg.pattern = EtaPattern::kSparse2;
  cfg.n = 60;
  cfg.replicates = 6;
  cfg.seed = 41;
  ModelSpec spec;
  spec.family = Family::kLogistic;
  spec.rank = 2;
  spec.penalty = 0.05;
  const std::vector<StatisticKind> kinds = {StatisticKind::kCombined,
                                            StatisticKind::kGesat};
  const PowerStudyReport r1 =
      run_power_study(cfg, spec, kinds, {0.0, 2.0}, 29, 0.05, 1);
  const PowerStudyReport r2 =
      run_power_study(cfg, spec, kinds, {0.0, 2.0}, 29, 0.05, 2);
  REQUIRE(r1.rows.size() == 4);
  CHECK(r1.method == ResamplingMethod::kPermutation);
  for (size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].rate >= 0.0);
    CHECK(r1.rows[i].rate <= 1.0);
    CHECK(r1.rows[i].rate == r2.rows[i].rate);
  }
  const std::string p1 = temp_path("lowrr_pow1.csv");
  write_power_report(p1, r1, cfg, spec);
  CHECK(read_text_file(p1).find("statistic,c,rate") == 0);
}

TEST_CASE("analyze flags strong coordinates and spares null data") {
  // Small 2x2 design so the Bonferroni threshold alpha/4 is reachable with
  // 99 replicates.
  auto make_data = [](double signal, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index n = 90, p = 2, q = 2;
    Vector y(n);
    std::vector<Matrix> mats(n);
    for (Index i = 0; i < n; ++i) {
      mats[i] = testutil::random_matrix(p, q, rng);
      double mean = 0.1 + signal * (mats[i](0, 0) + mats[i](1, 0)) /
                              std::sqrt(2.0);
      y(i) = mean + 0.7 * gauss(rng);
    }
    return MatrixDataset::create(std::move(y), Matrix(n, 0), std::move(mats));
  };

  ModelSpec spec;
  spec.family = Family::kNormal;
  spec.rank = 1;
  spec.penalty = 0.01;

  SUBCASE("strong signal flags the two loaded coordinates") {
    const MatrixDataset data = make_data(2.0, 61);
    const AnalysisReport rep =
        analyze(data, spec, {StatisticKind::kCombined},
                ResamplingMethod::kPermutation, 99, 0.05, 4, 1);
    REQUIRE(rep.coefficients.size() == 5);
    CHECK(rep.coefficients[1].significant);  // eta(1,1)
    CHECK(rep.coefficients[2].significant);  // eta(2,1)
    CHECK(rep.global_tests[0].p_value <= 0.05);
    CHECK(rep.eta_hat.rows() == 2);
    for (const auto& row : rep.coefficients) {
      CHECK(row.ci_lo <= row.estimate);
      CHECK(row.estimate <= row.ci_hi);
    }
  }

  SUBCASE("null data rarely flags anything") {
    int clean_runs = 0;
    const int runs = 12;
    for (int k = 0; k < runs; ++k) {
      const MatrixDataset data = make_data(0.0, 100 + k);
      const AnalysisReport rep =
          analyze(data, spec, {StatisticKind::kCombined},
                  ResamplingMethod::kPermutation, 99, 0.05, 200 + k, 1);
      bool any = false;
      for (const auto& row : rep.coefficients) any = any || row.significant;
      if (!any) ++clean_runs;
    }
    CHECK(clean_runs >= runs * 9 / 10);
  }
}

TEST_CASE("coefficient names") {
  CHECK(coefficient_name(0, 2, 3, 2) == "gamma");
  CHECK(coefficient_name(1, 2, 3, 2) == "z1");
  CHECK(coefficient_name(2, 2, 3, 2) == "z2");
  CHECK(coefficient_name(3, 2, 3, 2) == "eta_1_1");
  CHECK(coefficient_name(6, 2, 3, 2) == "eta_1_2");
}
