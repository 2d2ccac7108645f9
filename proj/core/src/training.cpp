// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtsrnn/errors.hpp"
#include "mtsrnn/evaluation.hpp"
#include "random.hpp"
#include "tape.hpp"

namespace mtsrnn {

namespace {

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double sum_of_squared_weights(const CellParams &params) {
  double total = 0.0;
  for (const auto &view : parameter_views(params)) {
    if (!view.is_weight) {
      continue;
    }
    for (double w : view.values) {
      total += w * w;
    }
  }
  return total;
}

void check_labels(std::size_t batch, std::span<const Label> labels) {
  if (batch == 0) {
    throw ValidationError("empty batch");
  }
  if (labels.size() != batch) {
    throw ValidationError("batch of " + std::to_string(batch) + " series has " +
                          std::to_string(labels.size()) + " labels");
  }
}

/// Data term of the loss for a 2 x B probability matrix.
double data_loss(const Matrix &probs, std::span<const Label> labels,
                 const ClassWeights &alpha) {
  double total = 0.0;
  for (Index b = 0; b < probs.cols(); ++b) {
    const Label y = labels[static_cast<std::size_t>(b)];
    total -= alpha[y] * std::log(clamp_probability(probs(y != 0 ? 1 : 0, b)));
  }
  return total / static_cast<double>(probs.cols());
}

} // namespace

double regularization(const CellParams &params, const LossSpec &spec) {
  if (spec.lambda == 0.0) {
    return 0.0;
  }
  const double sq = sum_of_squared_weights(params);
  return spec.regularizer == Regularizer::SumOfSquares
             ? spec.lambda * sq
             : spec.lambda * std::sqrt(sq);
}

double loss(std::span<const double> probabilities, std::span<const Label> labels,
            const LossSpec &spec, const CellParams &params) {
  check_labels(probabilities.size(), labels);
  double total = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = clamp_probability(probabilities[i]);
    const double y = labels[i] != 0 ? 1.0 : 0.0;
    total -= spec.alpha[labels[i]] *
             (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return total / static_cast<double>(probabilities.size()) +
         regularization(params, spec);
}

double batch_loss(const CellParams &params, const SequenceBatch &batch,
                  std::span<const Label> labels, const LossSpec &spec,
                  const Matrix *dropout) {
  check_labels(static_cast<std::size_t>(batch.size()), labels);
  const auto out = forward(params, batch, dropout);
  return loss(std::span<const double>(out.probabilities.data(),
                                      static_cast<std::size_t>(out.probabilities.size())),
              labels, spec, params);
}

GradientResult gradients(const CellParams &params, const SequenceBatch &batch,
                         std::span<const Label> labels, const LossSpec &spec,
                         const Matrix *dropout) {
  check_labels(static_cast<std::size_t>(batch.size()), labels);
  GradientResult result{0.0, zeros_like(params)};
  const Index count = batch.size();

  detail::ErnnTape ernn_tape;
  detail::GruTape gru_tape;
  detail::GrudTape grud_tape;
  const Matrix final_states = std::visit(
      [&](const auto &p) -> Matrix {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ErnnParams>) {
          return detail::run_ernn(p, batch, &ernn_tape);
        } else if constexpr (std::is_same_v<P, GruParams>) {
          return detail::run_gru(p, batch, &gru_tape);
        } else {
          return detail::run_grud(p, batch, &grud_tape);
        }
      },
      params);

  const auto &readout = readout_of(params);
  const Matrix dropped =
      dropout ? Matrix(final_states.cwiseProduct(*dropout)) : final_states;
  const Matrix probs = readout_probabilities(readout, dropped);
  result.loss = data_loss(probs, labels, spec.alpha) + regularization(params, spec);

  // d(-log p_y)/d logits = p - onehot(y); zero where the clamp is active.
  Matrix d_logits = probs;
  for (Index b = 0; b < count; ++b) {
    const Label y = labels[static_cast<std::size_t>(b)];
    const Index row = y != 0 ? 1 : 0;
    const double p_y = probs(row, b);
    if (p_y < kProbabilityFloor || p_y > 1.0 - kProbabilityFloor) {
      d_logits.col(b).setZero();
      continue;
    }
    d_logits(row, b) -= 1.0;
    d_logits.col(b) *= spec.alpha[y] / static_cast<double>(count);
  }

  Matrix d_state = readout.weights.transpose() * d_logits;
  if (dropout) {
    d_state = d_state.cwiseProduct(*dropout);
  }
  std::visit(
      [&](auto &g) {
        using G = std::decay_t<decltype(g)>;
        const auto &p = std::get<G>(params);
        if constexpr (std::is_same_v<G, ErnnParams>) {
          g.readout.weights.noalias() = d_logits * dropped.transpose();
          g.readout.bias = d_logits.rowwise().sum();
          detail::backprop_ernn(p, batch, ernn_tape, std::move(d_state), g);
        } else if constexpr (std::is_same_v<G, GruParams>) {
          g.readout.weights.noalias() = d_logits * dropped.transpose();
          g.readout.bias = d_logits.rowwise().sum();
          detail::backprop_gru(p, gru_tape, std::move(d_state), g);
        } else {
          g.gru.readout.weights.noalias() = d_logits * dropped.transpose();
          g.gru.readout.bias = d_logits.rowwise().sum();
          detail::backprop_grud(p, batch, grud_tape, std::move(d_state), g);
        }
      },
      result.gradients);

  if (spec.lambda != 0.0) {
    double scale = 2.0 * spec.lambda;
    if (spec.regularizer == Regularizer::Norm) {
      const double norm = std::sqrt(sum_of_squared_weights(params));
      scale = norm > 0.0 ? spec.lambda / norm : 0.0;
    }
    auto grad_views = parameter_views(result.gradients);
    const auto param_views = parameter_views(params);
    for (std::size_t k = 0; k < grad_views.size(); ++k) {
      if (!grad_views[k].is_weight) {
        continue;
      }
      for (std::size_t i = 0; i < grad_views[k].values.size(); ++i) {
        grad_views[k].values[i] += scale * param_views[k].values[i];
      }
    }
  }

  for (const auto &view : parameter_views(std::as_const(result.gradients))) {
    if (!std::all_of(view.values.begin(), view.values.end(),
                     [](double g) { return std::isfinite(g); })) {
      throw NumericError("non-finite gradient for parameter " +
                         std::string(view.name));
    }
  }
  if (!std::isfinite(result.loss)) {
    throw NumericError("non-finite loss");
  }
  return result;
}

AdamMoments::AdamMoments(const CellParams &like)
    : first(zeros_like(like)), second(zeros_like(like)) {}

void adam_update(CellParams &params, AdamMoments &moments,
                 const CellParams &grads, const AdamConfig &config) {
  ++moments.step;
  const double t = static_cast<double>(moments.step);
  const double first_correction = 1.0 - std::pow(config.beta1, t);
  const double second_correction = 1.0 - std::pow(config.beta2, t);

  auto p = parameter_views(params);
  auto m = parameter_views(moments.first);
  auto v = parameter_views(moments.second);
  const auto g = parameter_views(grads);
  if (p.size() != g.size()) {
    throw ConfigError("gradient does not match the parameter layout");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].values.size() != g[k].values.size()) {
      throw ConfigError("gradient shape mismatch for " + std::string(p[k].name));
    }
    for (std::size_t i = 0; i < p[k].values.size(); ++i) {
      const double gi = g[k].values[i];
      m[k].values[i] = config.beta1 * m[k].values[i] + (1.0 - config.beta1) * gi;
      v[k].values[i] =
          config.beta2 * v[k].values[i] + (1.0 - config.beta2) * gi * gi;
      const double m_hat = m[k].values[i] / first_correction;
      const double v_hat = v[k].values[i] / second_correction;
      p[k].values[i] -=
          config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

TrainState::TrainState(CellParams initial, std::uint64_t seed)
    : params(initial), moments(initial), best_params(std::move(initial)),
      rng(detail::make_rng(seed, 0xD207)) {}

EpisodeSet prepare_inputs(const EpisodeSet &set, CellKind kind,
                          std::optional<ImputationKind> imputation,
                          const Vector &fallback_means) {
  if (kind == CellKind::Grud) {
    if (imputation) {
      throw ConfigError("GRU-D consumes masked input; do not pass an imputation "
                        "method");
    }
    return set;
  }
  if (!imputation) {
    throw ConfigError(std::string(to_string(kind)) +
                      " requires an imputation method (zero, locf or mean)");
  }
  return impute(set, ImputationMethod{*imputation, fallback_means});
}

namespace {

Matrix draw_dropout(std::mt19937_64 &rng, Index hidden, Index count,
                    double rate) {
  const double keep = 1.0 - rate;
  Matrix mask(hidden, count);
  for (Index b = 0; b < count; ++b) {
    for (Index h = 0; h < hidden; ++h) {
      mask(h, b) = detail::uniform_unit(rng) < keep ? 1.0 / keep : 0.0;
    }
  }
  return mask;
}

bool has_both_classes(std::span<const Label> labels) {
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  return positives > 0 && positives < static_cast<long>(labels.size());
}

} // namespace

TrainResult train(const TrainConfig &config, CellKind kind,
                  const EpisodeSet &train_set, const EpisodeSet &validation,
                  std::optional<ImputationKind> imputation,
                  const EpochCallback &on_epoch) {
  if (train_set.empty() || validation.empty()) {
    throw ValidationError("training and validation sets must be nonempty");
  }
  if (config.batch_size == 0 || config.hidden_size <= 0 || config.epochs < 0) {
    throw ConfigError("batch size and hidden size must be positive");
  }
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  if (config.lambda < 0.0) {
    throw ConfigError("lambda must be non-negative");
  }

  const Vector &means = train_set.empirical_means;
  const EpisodeSet train_in = prepare_inputs(train_set, kind, imputation, means);
  const EpisodeSet val_in = prepare_inputs(validation, kind, imputation, means);

  LossSpec spec{class_weights(train_set.labels), config.lambda,
                config.regularizer};

  TrainState state(init_params(kind, train_set.variables(), config.hidden_size,
                               config.seed, means, config.init),
                   config.seed);

  const auto val_batch = make_batch(val_in.series);
  const bool val_auc_defined = has_both_classes(validation.labels);
  const std::size_t n = train_in.size();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = detail::shuffled_indices(n, state.rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    std::vector<const MaskedSeries *> members;
    std::vector<Label> labels;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      members.clear();
      labels.clear();
      for (std::size_t i = begin; i < end; ++i) {
        members.push_back(&train_in.series[order[i]]);
        labels.push_back(train_in.labels[order[i]]);
      }
      const auto batch = make_batch(std::span<const MaskedSeries *const>(members));
      Matrix dropout;
      if (config.dropout_rate > 0.0) {
        dropout = draw_dropout(state.rng, config.hidden_size, batch.size(),
                               config.dropout_rate);
      }
      const auto grad = gradients(state.params, batch, labels, spec,
                                  config.dropout_rate > 0.0 ? &dropout : nullptr);
      adam_update(state.params, state.moments, grad.gradients, config.adam);
      loss_sum += grad.loss;
      ++batches;
    }

    const auto out = forward(state.params, val_batch);
    const std::span<const double> scores(
        out.probabilities.data(), static_cast<std::size_t>(out.probabilities.size()));
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(batches);
    record.val_f1 = f1_score(threshold_predictions(scores), val_in.labels);
    record.val_auc = val_auc_defined ? auc(scores, val_in.labels)
                                     : std::numeric_limits<double>::quiet_NaN();
    state.epoch = epoch;
    state.history.push_back(record);
    if (record.val_f1 > state.best_val_f1) {
      state.best_val_f1 = record.val_f1;
      state.best_epoch = epoch;
      state.best_params = state.params;
    }
    if (on_epoch && !on_epoch(record)) {
      break;
    }
  }

  TrainResult result;
  result.best_params = std::move(state.best_params);
  result.best_val_f1 = state.history.empty() ? 0.0 : state.best_val_f1;
  result.best_epoch = state.best_epoch;
  result.history = std::move(state.history);
  return result;
}

GradientCheckReport finite_difference_check(const CellParams &params,
                                            const SequenceBatch &batch,
                                            std::span<const Label> labels,
                                            const LossSpec &spec, double eps,
                                            const Matrix *dropout,
                                            std::string_view only) {
  const auto analytic = gradients(params, batch, labels, spec, dropout);
  const auto analytic_views = parameter_views(analytic.gradients);
  CellParams probe = params;
  auto probe_views = parameter_views(probe);

  GradientCheckReport report;
  for (std::size_t k = 0; k < probe_views.size(); ++k) {
    auto &view = probe_views[k];
    if (!only.empty() && !view.name.starts_with(only)) {
      continue;
    }
    for (std::size_t i = 0; i < view.values.size(); ++i) {
      const double saved = view.values[i];
      view.values[i] = saved + eps;
      const double up = batch_loss(probe, batch, labels, spec, dropout);
      view.values[i] = saved - eps;
      const double down = batch_loss(probe, batch, labels, spec, dropout);
      view.values[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double exact = analytic_views[k].values[i];
      const double denom =
          std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double rel = std::abs(exact - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error || report.worst_parameter.empty()) {
        report.max_relative_error = std::max(rel, report.max_relative_error);
        report.worst_parameter = std::string(view.name);
        report.worst_index = static_cast<Index>(i);
        report.analytic = exact;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

} // namespace mtsrnn
