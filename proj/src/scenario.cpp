#include "lowrr/scenario.hpp"

#include <cmath>
#include <random>

#include "lowrr/errors.hpp"
#include "lowrr/model.hpp"
#include "lowrr/parallel.hpp"

namespace lowrr {

Family template_family(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? Family::kNormal
                                            : Family::kLogistic;
}

Index template_default_n(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? 400 : 150;
}

Index template_default_rank(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? 3 : 2;
}

Index template_p(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? 15 : 6;
}

Index template_q(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? 7 : 6;
}

Index template_m(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? 22 : 0;
}

const char* template_name(ScenarioTemplate t) {
  return t == ScenarioTemplate::kPsqiNormal ? "psqi-normal" : "eeg-logistic";
}

const char* pattern_name(EtaPattern p) {
  switch (p) {
    case EtaPattern::kFixedCorner: return "fixed-corner";
    case EtaPattern::kSparse2: return "sparse2";
    case EtaPattern::kLowRankCols2: return "lowrank-cols2";
  }
  return "?";
}

std::optional<ScenarioTemplate> template_from_name(const std::string& s) {
  if (s == "psqi-normal") return ScenarioTemplate::kPsqiNormal;
  if (s == "eeg-logistic") return ScenarioTemplate::kEegLogistic;
  return std::nullopt;
}

std::optional<EtaPattern> pattern_from_name(const std::string& s) {
  if (s == "fixed-corner") return EtaPattern::kFixedCorner;
  if (s == "sparse2") return EtaPattern::kSparse2;
  if (s == "lowrank-cols2") return EtaPattern::kLowRankCols2;
  return std::nullopt;
}

namespace {

// Uniform draw from the unit sphere in R^dim.
Vector unit_sphere(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(dim);
  double norm = 0.0;
  do {
    for (Index i = 0; i < dim; ++i) u(i) = gauss(rng);
    norm = u.norm();
  } while (norm < 1e-12);
  return u / norm;
}

Matrix draw_eta(EtaPattern pattern, double c, Index p, Index q,
                std::mt19937_64& rng) {
  Matrix eta = Matrix::Zero(p, q);
  if (c == 0.0) return eta;
  switch (pattern) {
    case EtaPattern::kFixedCorner: {
      const double v = c / std::sqrt(2.0);
      eta(0, 0) = v;
      eta(1, 0) = v;
      break;
    }
    case EtaPattern::kSparse2: {
      std::uniform_int_distribution<Index> cell(0, p * q - 1);
      const Index first = cell(rng);
      Index second = first;
      while (second == first) second = cell(rng);
      const Vector u = c * unit_sphere(2, rng);
      eta(first % p, first / p) = u(0);
      eta(second % p, second / p) = u(1);
      break;
    }
    case EtaPattern::kLowRankCols2: {
      const Vector u = c * unit_sphere(2 * p, rng);
      eta.col(0) = u.head(p);
      eta.col(1) = u.tail(p);
      break;
    }
  }
  return eta;
}

Scenario generate_psqi(const ScenarioConfig& config, std::mt19937_64& rng) {
  const Index p = 15, q = 7, m = 22;
  const Index n = config.n > 0 ? config.n : template_default_n(config.tmpl);
  if (config.noise_sigma <= 0.0) {
    throw ValidationError("scenario: noise_sigma must be > 0");
  }

  // Per-marker minor allele frequencies come from the population stream so
  // every dataset drawn from the same population shares them; genotype
  // counts in {0,1,2} then come from the per-dataset stream.
  std::mt19937_64 pop_rng(derive_seed(config.population_seed, 0x3A11E1EULL));
  std::uniform_real_distribution<double> maf_dist(0.2, 0.5);
  Vector maf_g(p), maf_e(q);
  for (Index j = 0; j < p; ++j) maf_g(j) = maf_dist(pop_rng);
  for (Index k = 0; k < q; ++k) maf_e(k) = maf_dist(pop_rng);

  const Matrix eta = draw_eta(config.pattern, config.effect_c, p, q, rng);
  const double gamma = 10.0;
  Vector xi = Vector::Zero(m);
  xi.head(5).setOnes();
  xi.segment(p, 3).setOnes();

  Matrix z(n, m);
  std::vector<Matrix> mats(n);
  Vector y(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    Vector g(p), e(q);
    for (Index j = 0; j < p; ++j) {
      std::binomial_distribution<int> genotype(2, maf_g(j));
      g(j) = static_cast<double>(genotype(rng));
    }
    for (Index k = 0; k < q; ++k) {
      std::binomial_distribution<int> genotype(2, maf_e(k));
      e(k) = static_cast<double>(genotype(rng));
    }
    z.row(i).head(p) = g.transpose();
    z.row(i).tail(q) = e.transpose();
    mats[i] = g * e.transpose();
    const double mean =
        gamma + xi.dot(z.row(i).transpose()) + vec(eta).dot(vec(mats[i]));
    y(i) = mean + config.noise_sigma * gauss(rng);
  }

  Scenario s{MatrixDataset::create(std::move(y), std::move(z), std::move(mats)),
             CoefVector{}};
  s.true_beta.gamma = gamma;
  s.true_beta.xi = xi;
  s.true_beta.eta_vec = vec(eta);
  return s;
}

Scenario generate_eeg(const ScenarioConfig& config, std::mt19937_64& rng) {
  const Index p = 6, q = 6;
  const Index n = config.n > 0 ? config.n : template_default_n(config.tmpl);
  constexpr double kRho = 0.5;

  const Matrix eta = draw_eta(config.pattern, config.effect_c, p, q, rng);

  std::vector<Matrix> mats(n, Matrix(p, q));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      double prev = gauss(rng);
      mats[i](j, 0) = prev;
      for (Index k = 1; k < q; ++k) {
        prev = kRho * prev + std::sqrt(1.0 - kRho * kRho) * gauss(rng);
        mats[i](j, k) = prev;
      }
    }
  }
  // Componentwise standardization across subjects.
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k < q; ++k) {
      double mean = 0.0;
      for (Index i = 0; i < n; ++i) mean += mats[i](j, k);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double d = mats[i](j, k) - mean;
        var += d * d;
      }
      var /= static_cast<double>(n - 1);
      const double sd = std::sqrt(std::max(var, 1e-300));
      for (Index i = 0; i < n; ++i) mats[i](j, k) = (mats[i](j, k) - mean) / sd;
    }
  }

  Vector y(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    const double u = vec(eta).dot(vec(mats[i]));
    y(i) = unif(rng) < logistic_cdf(u) ? 1.0 : 0.0;
  }

  Scenario s{MatrixDataset::create(std::move(y), Matrix(n, 0), std::move(mats)),
             CoefVector{}};
  s.true_beta.gamma = 0.0;
  s.true_beta.xi = Vector(0);
  s.true_beta.eta_vec = vec(eta);
  return s;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config) {
  if (config.effect_c < 0.0) {
    throw ValidationError("scenario: effect size must be >= 0");
  }
  std::mt19937_64 rng(derive_seed(config.seed, 0xDA7A5E7ULL));
  return config.tmpl == ScenarioTemplate::kPsqiNormal
             ? generate_psqi(config, rng)
             : generate_eeg(config, rng);
}

}  // namespace lowrr
