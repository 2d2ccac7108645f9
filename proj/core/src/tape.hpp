// SPDX-License-Identifier: Apache-2.0
// Recorded forward passes for backpropagation through time.
#pragma once

#include <vector>

#include "mtsrnn/cells.hpp"
#include "mtsrnn/network.hpp"
#include "mtsrnn/params.hpp"

namespace mtsrnn::detail {

struct ErnnTape {
  std::vector<Matrix> states; // T + 1 entries, states[0] = h_0
};

struct GruStepTape {
  Matrix h_prev;
  Matrix x;
  Matrix reset;
  Matrix reset_state; // h_prev * reset
  Matrix candidate;
  Matrix update;
};

struct GruTape {
  std::vector<GruStepTape> steps;
};

struct GrudStepTape {
  Matrix h_raw;       // state before decay
  Matrix x_last;      // last observations before this step
  Matrix input_decay; // gamma_x, V x B
  Matrix input_decay_pre;
  Matrix state_decay; // gamma_h, H x B
  Matrix state_decay_pre;
  GruStepTape core;
};

struct GrudTape {
  std::vector<GrudStepTape> steps;
};

/// Mask contributions added to the three gate pre-activations.
struct GateOffsets {
  Matrix reset;
  Matrix candidate;
  Matrix update;
};

/// Pre-activation gradients of one GRU step.
struct GruCoreGrad {
  Matrix d_h_prev;
  Matrix d_x;
  Matrix d_reset;
  Matrix d_candidate;
  Matrix d_update;
};

Matrix gru_core(const GruParams &p, const Matrix &h_prev, const Matrix &x,
                const GateOffsets *offsets, GruStepTape *tape);

GrudRuntimeState grud_forward_step(const GrudParams &p,
                                   const GrudRuntimeState &state,
                                   const Matrix &x_raw, const Matrix &mask,
                                   const Matrix &deltas, GrudStepTape *tape);

// Whole-sequence recurrences returning h_T (H x B).
Matrix run_ernn(const ErnnParams &p, const SequenceBatch &batch, ErnnTape *tape);
Matrix run_gru(const GruParams &p, const SequenceBatch &batch, GruTape *tape);
Matrix run_grud(const GrudParams &p, const SequenceBatch &batch, GrudTape *tape);

// Accumulate parameter gradients given dL/dh_T.
void backprop_ernn(const ErnnParams &p, const SequenceBatch &batch,
                   const ErnnTape &tape, Matrix d_state, ErnnParams &grads);
void backprop_gru(const GruParams &p, const GruTape &tape, Matrix d_state,
                  GruParams &grads);
void backprop_grud(const GrudParams &p, const SequenceBatch &batch,
                   const GrudTape &tape, Matrix d_state, GrudParams &grads);

} // namespace mtsrnn::detail
