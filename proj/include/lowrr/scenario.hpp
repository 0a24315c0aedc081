#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lowrr/data.hpp"

namespace lowrr {

/// Synthetic stand-ins for the two study designs. PsqiNormal draws
/// genotype-like vectors G in R^15 and E in R^7 with entries in {0,1,2},
/// sets Z = (G,E) and M = G E^T (so m = 22), and a Gaussian response.
/// EegLogistic draws 6x6 matrices with AR(1)-correlated rows, standardizes
/// each cell across subjects, and draws a Bernoulli response with no
/// confounders.
enum class ScenarioTemplate { kPsqiNormal, kEegLogistic };

/// Shape of the true eta. FixedCorner puts c/sqrt(2) on the first two
/// entries of column 1 (c = 1 reproduces the 0.707 study value). Sparse2
/// spreads c over 2 random cells via a uniform unit-sphere draw.
/// LowRankCols2 spreads c over the first two columns the same way.
enum class EtaPattern { kFixedCorner, kSparse2, kLowRankCols2 };

struct ScenarioConfig {
  ScenarioTemplate tmpl = ScenarioTemplate::kPsqiNormal;
  EtaPattern pattern = EtaPattern::kFixedCorner;
  double effect_c = 1.0;
  Index n = 0;  // 0 = template default (400 PSQI, 150 EEG)
  int replicates = 100;
  std::uint64_t seed = 0;
  double noise_sigma = 1.0;  // Normal response only
  /// Seeds the population-level quantities (the per-marker allele
  /// frequencies). Study replicates share one population and redraw only
  /// subjects, mirroring repeated sampling from a fixed cohort.
  std::uint64_t population_seed = 0;
};

struct Scenario {
  MatrixDataset data;
  CoefVector true_beta;
};

Scenario generate_scenario(const ScenarioConfig& config);

Family template_family(ScenarioTemplate t);
Index template_default_n(ScenarioTemplate t);
Index template_default_rank(ScenarioTemplate t);
Index template_p(ScenarioTemplate t);
Index template_q(ScenarioTemplate t);
Index template_m(ScenarioTemplate t);

const char* template_name(ScenarioTemplate t);
const char* pattern_name(EtaPattern p);
std::optional<ScenarioTemplate> template_from_name(const std::string& s);
std::optional<EtaPattern> pattern_from_name(const std::string& s);

}  // namespace lowrr
