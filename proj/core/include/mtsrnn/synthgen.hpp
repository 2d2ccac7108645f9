// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mtsrnn/dataset.hpp"

namespace mtsrnn {

/// Synthetic labelled series with tunable value signal and label-dependent
/// (missing-not-at-random) gaps.
///
/// Each variable follows a per-series AR(1) walk around a fixed level. For
/// positives, `signal_shift` is added to the first `signal_variables`
/// variables from `onset_day` on. Every entry is dropped with probability
/// `base_missing_rate`; for positives, the last `informative_variables`
/// variables are dropped with the additional `informative_missing_boost`.
struct SynthConfig {
  std::size_t n_series = 800;
  Index t_len = 20;
  Index n_vars = 10;
  double class_balance = 232.0 / 883.0;
  double base_missing_rate = 0.8;
  double informative_missing_boost = 0.05;
  double signal_shift = 1.2;
  Index onset_day = 4;
  double noise_std = 1.0;
  double ar_coefficient = 0.95;
  double series_offset_std = 0.0;
  Index signal_variables = 2;
  Index informative_variables = 4;
  std::uint64_t seed = 0;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
  /// Expected fraction of missing entries over the whole set.
  double effective_missing_rate() const;
};

EpisodeSet generate(const SynthConfig &config);

struct DatasetSummary {
  std::array<std::size_t, 2> class_counts{};
  /// [class][variable] fraction of missing entries.
  std::array<Vector, 2> missing_rate;
  /// [class][variable] mean of observed entries at steps >= from_step
  /// (NaN when none).
  std::array<Vector, 2> observed_mean;
  Vector overall_observed_mean;
  double observed_fraction = 0.0;
};

DatasetSummary describe(const EpisodeSet &set, Index from_step = 0);

} // namespace mtsrnn
