// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mtsrnn/dataset.hpp"
#include "mtsrnn/imputation.hpp"
#include "mtsrnn/network.hpp"
#include "mtsrnn/params.hpp"

namespace mtsrnn {

/// How the weight penalty is formed from the weights (biases excluded).
enum class Regularizer {
  SumOfSquares, ///< lambda * sum w^2
  Norm,         ///< lambda * sqrt(sum w^2)
};

struct LossSpec {
  ClassWeights alpha;
  double lambda = 0.0;
  Regularizer regularizer = Regularizer::SumOfSquares;
};

/// Probabilities are clamped to [kProbabilityFloor, 1 - kProbabilityFloor]
/// before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

/// Class-weighted mean cross-entropy over the samples plus the penalty.
double loss(std::span<const double> probabilities, std::span<const Label> labels,
            const LossSpec &spec, const CellParams &params);

double regularization(const CellParams &params, const LossSpec &spec);

struct GradientResult {
  double loss = 0.0;
  CellParams gradients;
};

/// Exact loss gradient by backpropagation through time. `dropout` follows the
/// convention of `forward`. Throws NumericError naming the first parameter
/// with a non-finite gradient.
GradientResult gradients(const CellParams &params, const SequenceBatch &batch,
                         std::span<const Label> labels, const LossSpec &spec,
                         const Matrix *dropout = nullptr);

/// Loss of the same batch without gradients; used by the finite-difference
/// oracle.
double batch_loss(const CellParams &params, const SequenceBatch &batch,
                  std::span<const Label> labels, const LossSpec &spec,
                  const Matrix *dropout = nullptr);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  CellParams first;
  CellParams second;
  long step = 0;

  explicit AdamMoments(const CellParams &like);
};

/// One bias-corrected Adam step, in place.
void adam_update(CellParams &params, AdamMoments &moments,
                 const CellParams &grads, const AdamConfig &config);

struct TrainConfig {
  Index hidden_size = 22;
  double dropout_rate = 0.2;
  double lambda = 0.001;
  Regularizer regularizer = Regularizer::SumOfSquares;
  std::size_t batch_size = 40;
  int epochs = 10000;
  AdamConfig adam;
  std::uint64_t seed = 0;
  InitOptions init;
};

struct EpochRecord {
  int epoch = 0; // 1-based
  double train_loss = 0.0;
  double val_f1 = 0.0;
  double val_auc = 0.0; // NaN when validation holds a single class
};

/// Optimizer state of one run. `best_params` holds the parameters with the
/// highest validation F1 seen so far (first occurrence on ties).
struct TrainState {
  CellParams params;
  AdamMoments moments;
  int epoch = 0;
  double best_val_f1 = -1.0;
  int best_epoch = 0;
  CellParams best_params;
  std::mt19937_64 rng;
  std::vector<EpochRecord> history;

  TrainState(CellParams initial, std::uint64_t seed);
};

struct TrainResult {
  CellParams best_params;
  double best_val_f1 = 0.0;
  int best_epoch = 0; // 0 when no epoch ran
  std::vector<EpochRecord> history;
};

/// Called after every epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochRecord &)>;

/// Shuffled mini-batch Adam with dropout on the last state and best
/// validation-F1 checkpointing. GRU-D takes the raw masked series and must
/// not be given an imputation; ERNN and GRU require one. Imputation fallback
/// means come from `train_set`.
TrainResult train(const TrainConfig &config, CellKind kind,
                  const EpisodeSet &train_set, const EpisodeSet &validation,
                  std::optional<ImputationKind> imputation,
                  const EpochCallback &on_epoch = {});

/// Applies the imputation (if any) a model of `kind` expects.
EpisodeSet prepare_inputs(const EpisodeSet &set, CellKind kind,
                          std::optional<ImputationKind> imputation,
                          const Vector &fallback_means);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Central differences (L(theta + eps) - L(theta - eps)) / 2 eps for every
/// parameter entry, compared with the analytic gradient using the relative
/// error |a - n| / max(|a|, |n|, 1e-8). `only` restricts the check to tensors
/// whose name starts with the given prefix.
GradientCheckReport finite_difference_check(const CellParams &params,
                                            const SequenceBatch &batch,
                                            std::span<const Label> labels,
                                            const LossSpec &spec, double eps,
                                            const Matrix *dropout = nullptr,
                                            std::string_view only = {});

} // namespace mtsrnn
