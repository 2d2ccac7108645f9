// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/network.hpp"

#include <cmath>

#include "mtsrnn/errors.hpp"
#include "tape.hpp"

namespace mtsrnn {

SequenceBatch make_batch(std::span<const MaskedSeries *const> series) {
  SequenceBatch batch;
  if (series.empty()) {
    return batch;
  }
  const Index steps = series.front()->steps();
  const Index vars = series.front()->variables();
  const auto count = static_cast<Index>(series.size());
  for (const auto *s : series) {
    if (s->steps() != steps || s->variables() != vars) {
      throw ValidationError("batch mixes series of shape " +
                            std::to_string(steps) + "x" + std::to_string(vars) +
                            " and " + std::to_string(s->steps()) + "x" +
                            std::to_string(s->variables()));
    }
  }
  batch.values.assign(static_cast<std::size_t>(steps), Matrix(vars, count));
  batch.masks.assign(static_cast<std::size_t>(steps), Matrix(vars, count));
  batch.deltas.assign(static_cast<std::size_t>(steps), Matrix(vars, count));
  for (Index b = 0; b < count; ++b) {
    const auto &s = *series[static_cast<std::size_t>(b)];
    for (Index t = 0; t < steps; ++t) {
      const auto k = static_cast<std::size_t>(t);
      batch.values[k].col(b) = s.values.row(t).transpose();
      batch.masks[k].col(b) = s.mask.row(t).transpose();
      batch.deltas[k].col(b) = s.deltas.row(t).transpose();
    }
  }
  return batch;
}

SequenceBatch make_batch(std::span<const MaskedSeries> series) {
  std::vector<const MaskedSeries *> ptrs;
  ptrs.reserve(series.size());
  for (const auto &s : series) {
    ptrs.push_back(&s);
  }
  return make_batch(std::span<const MaskedSeries *const>(ptrs));
}

Matrix readout_probabilities(const ReadoutParams &readout, const Matrix &states) {
  Matrix logits = readout.weights * states;
  logits.colwise() += readout.bias;
  Matrix probs(2, logits.cols());
  for (Index b = 0; b < logits.cols(); ++b) {
    // p1 = 1 / (1 + exp(l0 - l1)), written so neither branch overflows.
    const double diff = logits(1, b) - logits(0, b);
    const double p1 = diff >= 0.0 ? 1.0 / (1.0 + std::exp(-diff))
                                  : std::exp(diff) / (1.0 + std::exp(diff));
    probs(1, b) = p1;
    probs(0, b) = diff >= 0.0 ? std::exp(-diff) / (1.0 + std::exp(-diff))
                              : 1.0 / (1.0 + std::exp(diff));
  }
  return probs;
}

BatchOutput forward(const CellParams &params, const SequenceBatch &batch,
                    const Matrix *dropout) {
  if (batch.size() > 0 && batch.values.front().rows() != input_size(params)) {
    throw ValidationError("model expects " + std::to_string(input_size(params)) +
                          " variables, input has " +
                          std::to_string(batch.values.front().rows()));
  }
  BatchOutput out;
  out.final_states = std::visit(
      [&](const auto &p) -> Matrix {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ErnnParams>) {
          return detail::run_ernn(p, batch, nullptr);
        } else if constexpr (std::is_same_v<P, GruParams>) {
          return detail::run_gru(p, batch, nullptr);
        } else {
          return detail::run_grud(p, batch, nullptr);
        }
      },
      params);
  const Matrix probs =
      dropout ? readout_probabilities(readout_of(params),
                                      out.final_states.cwiseProduct(*dropout))
              : readout_probabilities(readout_of(params), out.final_states);
  out.probabilities = probs.row(1).transpose();
  return out;
}

ForwardResult forward(const CellParams &params, const MaskedSeries &series,
                      const Vector *dropout) {
  const MaskedSeries *one[] = {&series};
  const auto batch = make_batch(std::span<const MaskedSeries *const>(one));
  Matrix mask;
  if (dropout) {
    mask = *dropout;
  }
  const auto out = forward(params, batch, dropout ? &mask : nullptr);
  return {out.probabilities[0], out.final_states.col(0)};
}

} // namespace mtsrnn
