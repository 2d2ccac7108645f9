// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "mtsrnn/dataset.hpp"
#include "mtsrnn/params.hpp"

namespace mtsrnn {

/// Series packed step by step, one column per series.
struct SequenceBatch {
  std::vector<Matrix> values; // T entries of V x B (NaN where missing)
  std::vector<Matrix> masks;  // T entries of V x B
  std::vector<Matrix> deltas; // T entries of V x B

  Index steps() const { return static_cast<Index>(values.size()); }
  Index size() const { return values.empty() ? 0 : values.front().cols(); }
};

/// All series must share T and V. Throws ValidationError otherwise.
SequenceBatch make_batch(std::span<const MaskedSeries *const> series);
SequenceBatch make_batch(std::span<const MaskedSeries> series);

struct BatchOutput {
  Vector probabilities; // B, probability of class 1
  Matrix final_states;  // H x B, before dropout
};

/// Runs the cell from h_0 = 0 over every step, then the softmax readout.
/// `dropout` (H x B, already scaled by 1 / keep) multiplies the last state
/// before the readout when given. ERNN and GRU reject missing inputs.
/// Throws NumericError naming the step when an activation is non-finite.
BatchOutput forward(const CellParams &params, const SequenceBatch &batch,
                    const Matrix *dropout = nullptr);

struct ForwardResult {
  double probability = 0.5;
  Vector final_state;
};

ForwardResult forward(const CellParams &params, const MaskedSeries &series,
                      const Vector *dropout = nullptr);

/// Two-class softmax of the readout logits; columns sum to one.
Matrix readout_probabilities(const ReadoutParams &readout,
                             const Matrix &states);

} // namespace mtsrnn
