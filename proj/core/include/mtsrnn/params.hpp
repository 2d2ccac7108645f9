// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "mtsrnn/types.hpp"

namespace mtsrnn {

enum class CellKind { Ernn, Gru, Grud };

std::string_view to_string(CellKind kind);
/// Accepts "ernn", "gru", "grud". Throws ConfigError otherwise.
CellKind parse_cell_kind(std::string_view text);

/// Two-logit softmax head on the last hidden state.
struct ReadoutParams {
  Matrix weights; // 2 x H
  Vector bias;    // 2
};

/// Elman cell: h = tanh(W_h h_prev + W_i x + b_h).
struct ErnnParams {
  Matrix input_weights;     // H x V
  Matrix recurrent_weights; // H x H
  Vector bias;              // H
  ReadoutParams readout;
};

/// GRU cell. The update gate weights the new candidate:
/// h = (1 - u) * h_prev + u * candidate.
struct GruParams {
  Matrix reset_recurrent;     // H x H
  Matrix reset_input;         // H x V
  Vector reset_bias;          // H
  Matrix candidate_recurrent; // H x H
  Matrix candidate_input;     // H x V
  Vector candidate_bias;      // H
  Matrix update_recurrent;    // H x H
  Matrix update_input;        // H x V
  Vector update_bias;         // H
  ReadoutParams readout;
};

/// GRU with decay. Adds mask inputs to every gate and two learned decays:
/// one per input variable (diagonal weights, stored as a vector) and one on
/// the hidden state (full H x V weights over the interval vector).
struct GrudParams {
  GruParams gru;
  Matrix reset_mask;          // H x V
  Matrix candidate_mask;      // H x V
  Matrix update_mask;         // H x V
  Vector input_decay_weights; // V, diagonal of the input-decay matrix
  Vector input_decay_bias;    // V
  Matrix state_decay_weights; // H x V
  Vector state_decay_bias;    // H
  /// Value each input decays toward. Not trained.
  Vector empirical_means; // V
};

using CellParams = std::variant<ErnnParams, GruParams, GrudParams>;

CellKind kind_of(const CellParams &params);
Index input_size(const CellParams &params);
Index hidden_size(const CellParams &params);
const ReadoutParams &readout_of(const CellParams &params);

namespace detail {

template <class R, class F> void visit_readout(R &r, F &f) {
  f(std::string_view{"readout.weights"}, r.weights, true);
  f(std::string_view{"readout.bias"}, r.bias, false);
}

template <class G, class F> void visit_gru(G &g, F &f) {
  f(std::string_view{"reset_recurrent"}, g.reset_recurrent, true);
  f(std::string_view{"reset_input"}, g.reset_input, true);
  f(std::string_view{"reset_bias"}, g.reset_bias, false);
  f(std::string_view{"candidate_recurrent"}, g.candidate_recurrent, true);
  f(std::string_view{"candidate_input"}, g.candidate_input, true);
  f(std::string_view{"candidate_bias"}, g.candidate_bias, false);
  f(std::string_view{"update_recurrent"}, g.update_recurrent, true);
  f(std::string_view{"update_input"}, g.update_input, true);
  f(std::string_view{"update_bias"}, g.update_bias, false);
}

} // namespace detail

/// Calls `f(name, tensor, is_weight)` for every trainable tensor in a fixed
/// order. `is_weight` is false for biases, which the L2 penalty skips.
template <class P, class F>
  requires std::is_same_v<std::remove_const_t<P>, ErnnParams>
void for_each_parameter(P &p, F &&f) {
  f(std::string_view{"input_weights"}, p.input_weights, true);
  f(std::string_view{"recurrent_weights"}, p.recurrent_weights, true);
  f(std::string_view{"bias"}, p.bias, false);
  detail::visit_readout(p.readout, f);
}

template <class P, class F>
  requires std::is_same_v<std::remove_const_t<P>, GruParams>
void for_each_parameter(P &p, F &&f) {
  detail::visit_gru(p, f);
  detail::visit_readout(p.readout, f);
}

template <class P, class F>
  requires std::is_same_v<std::remove_const_t<P>, GrudParams>
void for_each_parameter(P &p, F &&f) {
  detail::visit_gru(p.gru, f);
  f(std::string_view{"reset_mask"}, p.reset_mask, true);
  f(std::string_view{"candidate_mask"}, p.candidate_mask, true);
  f(std::string_view{"update_mask"}, p.update_mask, true);
  f(std::string_view{"input_decay_weights"}, p.input_decay_weights, true);
  f(std::string_view{"input_decay_bias"}, p.input_decay_bias, false);
  f(std::string_view{"state_decay_weights"}, p.state_decay_weights, true);
  f(std::string_view{"state_decay_bias"}, p.state_decay_bias, false);
  detail::visit_readout(p.gru.readout, f);
}

/// Flat view of one tensor. `values` is column-major (Eigen storage order).
struct ParameterView {
  std::string_view name;
  std::span<double> values;
  Index rows = 0;
  Index cols = 0;
  bool is_weight = false;
};

struct ConstParameterView {
  std::string_view name;
  std::span<const double> values;
  Index rows = 0;
  Index cols = 0;
  bool is_weight = false;
};

std::vector<ParameterView> parameter_views(CellParams &params);
std::vector<ConstParameterView> parameter_views(const CellParams &params);

/// Same structure as `params` with every trainable entry zeroed. Non-trainable
/// fields (the GRU-D empirical means) are copied.
CellParams zeros_like(const CellParams &params);

std::size_t parameter_count(const CellParams &params);

/// Weight matrices uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero.
/// GRU-D decay weights are drawn uniform in [0, decay_init_scale] so that
/// every decay unit starts on the active side of its rectifier.
struct InitOptions {
  double decay_init_scale = 0.05;
};

CellParams init_params(CellKind kind, Index inputs, Index hidden,
                       std::uint64_t seed, const Vector &empirical_means,
                       const InitOptions &options = {});

} // namespace mtsrnn
