// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mtsrnn/params.hpp"

namespace mtsrnn {

// Single-step cell dynamics. Every function accepts either a column vector
// (one series) or a matrix whose columns are independent series.

Matrix ernn_step(const ErnnParams &p, const Matrix &h_prev, const Matrix &x);

Matrix gru_step(const GruParams &p, const Matrix &h_prev, const Matrix &x);

/// exp(-max(0, W delta + b)), elementwise in (0, 1].
Matrix decay_rates(const Matrix &weights, const Vector &bias,
                   const Matrix &deltas);

/// Input decay toward the empirical mean. Entries with mask 1 are returned
/// unchanged; the others blend the last observation and the mean by `gamma`.
Matrix decay_input(const Matrix &x, const Matrix &mask, const Matrix &gamma,
                   const Matrix &x_last, const Vector &means);

Matrix decay_state(const Matrix &h_prev, const Matrix &gamma);

struct GrudRuntimeState {
  Matrix h;      // H x B
  Matrix x_last; // V x B, last observed value per variable
};

/// Zero hidden state; `x_last` starts at the model's empirical means.
GrudRuntimeState initial_grud_state(const GrudParams &p, Index batch = 1);

/// `x_raw` may hold NaN wherever `mask` is 0.
GrudRuntimeState grud_step(const GrudParams &p, const GrudRuntimeState &state,
                           const Matrix &x_raw, const Matrix &mask,
                           const Matrix &deltas);

} // namespace mtsrnn
