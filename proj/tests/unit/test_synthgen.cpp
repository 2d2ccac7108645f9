// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mtsrnn/errors.hpp"
#include "mtsrnn/synthgen.hpp"

namespace mtsrnn {
namespace {

std::string bytes_of(const EpisodeSet &set) {
  std::ostringstream out;
  write_episodes(out, set);
  return out.str();
}

TEST(Synth, NoMissingnessMeansFullyObserved) {
  SynthConfig config;
  config.n_series = 50;
  config.base_missing_rate = 0.0;
  config.informative_missing_boost = 0.0;
  const auto set = generate(config);
  for (const auto &s : set.series) {
    EXPECT_TRUE(s.fully_observed());
  }
}

TEST(Synth, SameSeedSameBytes) {
  SynthConfig config;
  config.n_series = 60;
  config.seed = 7;
  EXPECT_EQ(bytes_of(generate(config)), bytes_of(generate(config)));
  auto other = config;
  other.seed = 8;
  EXPECT_NE(bytes_of(generate(config)), bytes_of(generate(other)));
}

TEST(Synth, ObservedFractionMatchesConfig) {
  SynthConfig config;
  config.n_series = 800;
  const auto summary = describe(generate(config));
  EXPECT_NEAR(summary.observed_fraction, 1.0 - config.effective_missing_rate(), 0.02);
}

TEST(Synth, LabelBalanceWithinThreeSigma) {
  SynthConfig config;
  config.n_series = 800;
  config.seed = 3;
  const auto summary = describe(generate(config));
  const double n = 800.0;
  const double p = config.class_balance;
  const double sigma = std::sqrt(n * p * (1.0 - p));
  EXPECT_NEAR(static_cast<double>(summary.class_counts[1]), n * p, 3.0 * sigma);
}

TEST(Synth, InformativeGapsHitPositivesHarder) {
  SynthConfig config;
  config.n_series = 600;
  config.base_missing_rate = 0.5;
  config.informative_missing_boost = 0.3;
  const auto summary = describe(generate(config));
  for (Index v = config.n_vars - config.informative_variables; v < config.n_vars; ++v) {
    EXPECT_GT(summary.missing_rate[1][v], summary.missing_rate[0][v]);
  }
}

TEST(Synth, WithoutBoostMaskIgnoresLabel) {
  // Chi-square test of independence between label and observed/missing on
  // every entry; 1 degree of freedom, 99.9% critical value 10.83.
  SynthConfig config;
  config.n_series = 600;
  config.informative_missing_boost = 0.0;
  config.seed = 5;
  const auto set = generate(config);
  double table[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double observed = set.series[i].mask.sum();
    const double total = static_cast<double>(set.series[i].mask.size());
    table[set.labels[i]][0] += observed;
    table[set.labels[i]][1] += total - observed;
  }
  const double n = table[0][0] + table[0][1] + table[1][0] + table[1][1];
  double chi2 = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double expected =
          (table[r][0] + table[r][1]) * (table[0][c] + table[1][c]) / n;
      chi2 += (table[r][c] - expected) * (table[r][c] - expected) / expected;
    }
  }
  EXPECT_LT(chi2, 10.83);
}

TEST(Synth, NoiselessShiftShowsExactlyAfterOnset) {
  SynthConfig config;
  config.n_series = 200;
  config.noise_std = 0.0;
  config.series_offset_std = 0.0;
  config.signal_shift = 1.25;
  config.seed = 2;
  const auto summary = describe(generate(config), config.onset_day);
  for (Index v = 0; v < config.signal_variables; ++v) {
    EXPECT_NEAR(summary.observed_mean[1][v] - summary.observed_mean[0][v], 1.25, 1e-12);
  }
  for (Index v = config.signal_variables; v < config.n_vars; ++v) {
    EXPECT_NEAR(summary.observed_mean[1][v] - summary.observed_mean[0][v], 0.0, 1e-12);
  }
}

TEST(Synth, SparseVariableGetsAForcedObservation) {
  SynthConfig config;
  config.n_series = 1;
  config.t_len = 2;
  config.onset_day = 0;
  config.base_missing_rate = 0.99;
  config.informative_missing_boost = 0.0;
  EXPECT_NO_THROW({
    const auto set = generate(config);
    EXPECT_TRUE(set.empirical_means.allFinite());
  });
}

TEST(Synth, InvalidConfigurations) {
  SynthConfig config;
  config.base_missing_rate = 1.0;
  EXPECT_THROW(config.validate(), ValidationError);
  config = {};
  config.base_missing_rate = 0.7;
  config.informative_missing_boost = 0.3;
  EXPECT_THROW(config.validate(), ValidationError);
  config = {};
  config.onset_day = config.t_len;
  EXPECT_THROW(generate(config), ValidationError);
}

} // namespace
} // namespace mtsrnn
