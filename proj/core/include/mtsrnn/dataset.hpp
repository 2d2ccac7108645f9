// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mtsrnn/types.hpp"

namespace mtsrnn {

/// One multivariate series (T steps x V variables) with its observation mask.
///
/// Missing entries hold NaN in `values` and 0 in `mask`. `deltas[t][v]` is the
/// time elapsed since variable v was last observed (0 at the first step).
struct MaskedSeries {
  Matrix values;
  Matrix mask;
  Vector timestamps;
  Matrix deltas;

  Index steps() const { return values.rows(); }
  Index variables() const { return values.cols(); }
  bool fully_observed() const { return (mask.array() > 0.5).all(); }

  /// Builds mask and deltas from `values`, where NaN marks a missing entry.
  /// Throws ValidationError if timestamps are not strictly increasing.
  static MaskedSeries from_values(Matrix values, Vector timestamps);
};

/// Per-variable z-score parameters.
struct Standardization {
  Vector mean;
  Vector stddev;
};

struct EpisodeSet {
  std::vector<std::string> ids;
  std::vector<MaskedSeries> series;
  std::vector<Label> labels;
  std::vector<std::string> variable_names;
  /// Mean of the observed entries of each variable over the whole set.
  Vector empirical_means;
  Standardization standardization;

  std::size_t size() const { return series.size(); }
  bool empty() const { return series.empty(); }
  Index steps() const { return series.empty() ? 0 : series.front().steps(); }
  Index variables() const { return static_cast<Index>(variable_names.size()); }
};

/// Time since last observation, per entry.
Matrix compute_deltas(const Matrix &mask, const Vector &timestamps);

/// Mean of the observed entries per variable. Throws ValidationError when a
/// variable has no observation at all.
Vector observed_means(std::span<const MaskedSeries> series, Index variables);

/// Observed-entry mean and population standard deviation per variable.
Standardization observed_stats(std::span<const MaskedSeries> series,
                               Index variables);

/// Validates shapes and labels, then fills empirical means and stats.
EpisodeSet make_episode_set(std::vector<std::string> ids,
                            std::vector<MaskedSeries> series,
                            std::vector<Label> labels,
                            std::vector<std::string> variable_names);

/// Copies the selected episodes; statistics are carried over unchanged.
EpisodeSet subset(const EpisodeSet &set, std::span<const std::size_t> indices);

// JSON-lines I/O. The first line is a header
// {"variables": [...], "t_len": T}; every further line is one episode
// {"id": ..., "label": 0|1, "timestamps": [...], "values": [[x|null, ...], ...]}.
EpisodeSet read_episodes(std::istream &in);
EpisodeSet load_episodes(const std::filesystem::path &path);
void write_episodes(std::ostream &out, const EpisodeSet &set);
void save_episodes(const std::filesystem::path &path, const EpisodeSet &set);

/// How `SplitSpec::train_fraction` is applied.
enum class TrainFractionBasis {
  Remainder, ///< fraction of the episodes left after removing validation
  Total,     ///< fraction of the whole set
};

struct SplitSpec {
  double validation_fraction = 0.2;
  double train_fraction = 0.6;
  TrainFractionBasis basis = TrainFractionBasis::Remainder;
  std::uint64_t seed = 0;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// Floor rounding for validation and train; the remainder goes to test.
SplitSizes split_sizes(std::size_t n, const SplitSpec &spec);

struct Splits {
  EpisodeSet train;
  EpisodeSet validation;
  EpisodeSet test;
};

/// Seeded random partition. Empirical means and standardization stats of all
/// three parts are recomputed from the train part.
Splits split(const EpisodeSet &set, const SplitSpec &spec);

/// Loss weights alpha_i = 1 - n_i / N, indexed by label.
struct ClassWeights {
  std::array<double, 2> alpha{0.5, 0.5};
  double operator[](Label label) const { return alpha[label != 0 ? 1 : 0]; }
};

ClassWeights class_weights(std::span<const Label> labels);

/// Z-scores observed entries. Variables with zero std pass through unscaled.
EpisodeSet standardize(const EpisodeSet &set, const Standardization &stats);

/// Standardizes all three parts with the train part's stats; every part then
/// carries the standardized train means as its empirical means.
Splits standardize(const Splits &splits);

} // namespace mtsrnn
