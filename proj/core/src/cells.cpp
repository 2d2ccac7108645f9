// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/cells.hpp"

#include <cmath>

#include "mtsrnn/errors.hpp"
#include "tape.hpp"

namespace mtsrnn {

namespace {

Matrix sigmoid(const Matrix &z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

Matrix tanh_of(const Matrix &z) { return z.array().tanh().matrix(); }

/// exp(-max(0, z))
Matrix decay_of(const Matrix &pre) {
  return (-pre.array().max(0.0)).exp().matrix();
}

/// 1 where the rectifier passes gradient, 0 at and below the kink.
Matrix relu_gate(const Matrix &pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

void check_finite(const Matrix &h, Index step, const char *cell) {
  if (!h.allFinite()) {
    throw NumericError(std::string(cell) + ": non-finite hidden state at step " +
                       std::to_string(step + 1));
  }
}

void require_observed(const SequenceBatch &batch, const char *cell) {
  for (Index t = 0; t < batch.steps(); ++t) {
    if (!batch.values[t].allFinite()) {
      throw ConfigError(std::string(cell) +
                        " needs imputed input; step " + std::to_string(t + 1) +
                        " has missing values");
    }
  }
}

} // namespace

Matrix ernn_step(const ErnnParams &p, const Matrix &h_prev, const Matrix &x) {
  Matrix pre = p.recurrent_weights * h_prev;
  pre.noalias() += p.input_weights * x;
  pre.colwise() += p.bias;
  return tanh_of(pre);
}

Matrix gru_step(const GruParams &p, const Matrix &h_prev, const Matrix &x) {
  return detail::gru_core(p, h_prev, x, nullptr, nullptr);
}

Matrix decay_rates(const Matrix &weights, const Vector &bias,
                   const Matrix &deltas) {
  Matrix pre = weights * deltas;
  pre.colwise() += bias;
  return decay_of(pre);
}

Matrix decay_input(const Matrix &x, const Matrix &mask, const Matrix &gamma,
                   const Matrix &x_last, const Vector &means) {
  Matrix toward_mean =
      (1.0 - gamma.array()).colwise() * means.array();
  Matrix decayed = gamma.cwiseProduct(x_last) + toward_mean;
  return (mask.array() > 0.5).select(x, decayed);
}

Matrix decay_state(const Matrix &h_prev, const Matrix &gamma) {
  return gamma.cwiseProduct(h_prev);
}

GrudRuntimeState initial_grud_state(const GrudParams &p, Index batch) {
  const Index hidden = p.gru.reset_bias.size();
  GrudRuntimeState s;
  s.h = Matrix::Zero(hidden, batch);
  s.x_last = p.empirical_means.replicate(1, batch);
  return s;
}

GrudRuntimeState grud_step(const GrudParams &p, const GrudRuntimeState &state,
                           const Matrix &x_raw, const Matrix &mask,
                           const Matrix &deltas) {
  return detail::grud_forward_step(p, state, x_raw, mask, deltas, nullptr);
}

namespace detail {

Matrix gru_core(const GruParams &p, const Matrix &h_prev, const Matrix &x,
                const GateOffsets *offsets, GruStepTape *tape) {
  Matrix pre_r = p.reset_recurrent * h_prev;
  pre_r.noalias() += p.reset_input * x;
  pre_r.colwise() += p.reset_bias;
  Matrix pre_u = p.update_recurrent * h_prev;
  pre_u.noalias() += p.update_input * x;
  pre_u.colwise() += p.update_bias;
  if (offsets) {
    pre_r += offsets->reset;
    pre_u += offsets->update;
  }
  Matrix r = sigmoid(pre_r);
  Matrix u = sigmoid(pre_u);
  Matrix hr = h_prev.cwiseProduct(r);
  Matrix pre_c = p.candidate_recurrent * hr;
  pre_c.noalias() += p.candidate_input * x;
  pre_c.colwise() += p.candidate_bias;
  if (offsets) {
    pre_c += offsets->candidate;
  }
  Matrix c = tanh_of(pre_c);
  Matrix h = h_prev + u.cwiseProduct(c - h_prev);
  if (tape) {
    tape->h_prev = h_prev;
    tape->x = x;
    tape->reset = std::move(r);
    tape->reset_state = std::move(hr);
    tape->candidate = std::move(c);
    tape->update = std::move(u);
  }
  return h;
}

namespace {

void gru_core_backward(const GruParams &p, const GruStepTape &tp,
                       const Matrix &d_h, GruParams &g, GruCoreGrad &out,
                       bool need_dx) {
  const auto &u = tp.update;
  const auto &c = tp.candidate;
  const auto &r = tp.reset;

  out.d_update = (d_h.cwiseProduct(c - tp.h_prev)).cwiseProduct(
      (u.array() * (1.0 - u.array())).matrix());
  out.d_candidate = (d_h.cwiseProduct(u)).cwiseProduct(
      (1.0 - c.array().square()).matrix());
  out.d_h_prev = d_h.cwiseProduct((1.0 - u.array()).matrix());

  g.update_recurrent.noalias() += out.d_update * tp.h_prev.transpose();
  g.update_input.noalias() += out.d_update * tp.x.transpose();
  g.update_bias += out.d_update.rowwise().sum();
  out.d_h_prev.noalias() += p.update_recurrent.transpose() * out.d_update;

  g.candidate_recurrent.noalias() += out.d_candidate * tp.reset_state.transpose();
  g.candidate_input.noalias() += out.d_candidate * tp.x.transpose();
  g.candidate_bias += out.d_candidate.rowwise().sum();
  Matrix d_hr = p.candidate_recurrent.transpose() * out.d_candidate;
  out.d_h_prev += d_hr.cwiseProduct(r);

  out.d_reset = (d_hr.cwiseProduct(tp.h_prev))
                    .cwiseProduct((r.array() * (1.0 - r.array())).matrix());
  g.reset_recurrent.noalias() += out.d_reset * tp.h_prev.transpose();
  g.reset_input.noalias() += out.d_reset * tp.x.transpose();
  g.reset_bias += out.d_reset.rowwise().sum();
  out.d_h_prev.noalias() += p.reset_recurrent.transpose() * out.d_reset;

  if (need_dx) {
    out.d_x = p.update_input.transpose() * out.d_update;
    out.d_x.noalias() += p.candidate_input.transpose() * out.d_candidate;
    out.d_x.noalias() += p.reset_input.transpose() * out.d_reset;
  }
}

} // namespace

GrudRuntimeState grud_forward_step(const GrudParams &p,
                                   const GrudRuntimeState &state,
                                   const Matrix &x_raw, const Matrix &mask,
                                   const Matrix &deltas, GrudStepTape *tape) {
  Matrix pre_x = p.input_decay_weights.asDiagonal() * deltas;
  pre_x.colwise() += p.input_decay_bias;
  Matrix gamma_x = decay_of(pre_x);
  Matrix pre_h = p.state_decay_weights * deltas;
  pre_h.colwise() += p.state_decay_bias;
  Matrix gamma_h = decay_of(pre_h);

  Matrix x = decay_input(x_raw, mask, gamma_x, state.x_last, p.empirical_means);
  Matrix h_hat = decay_state(state.h, gamma_h);

  GateOffsets offsets{p.reset_mask * mask, p.candidate_mask * mask,
                      p.update_mask * mask};

  GrudRuntimeState next;
  next.h = gru_core(p.gru, h_hat, x, &offsets, tape ? &tape->core : nullptr);
  next.x_last = (mask.array() > 0.5).select(x_raw, state.x_last);
  if (tape) {
    tape->h_raw = state.h;
    tape->x_last = state.x_last;
    tape->input_decay = std::move(gamma_x);
    tape->input_decay_pre = std::move(pre_x);
    tape->state_decay = std::move(gamma_h);
    tape->state_decay_pre = std::move(pre_h);
  }
  return next;
}

Matrix run_ernn(const ErnnParams &p, const SequenceBatch &batch, ErnnTape *tape) {
  require_observed(batch, "ERNN");
  Matrix h = Matrix::Zero(p.bias.size(), batch.size());
  if (tape) {
    tape->states.assign(1, h);
  }
  for (Index t = 0; t < batch.steps(); ++t) {
    h = ernn_step(p, h, batch.values[t]);
    check_finite(h, t, "ERNN");
    if (tape) {
      tape->states.push_back(h);
    }
  }
  return h;
}

Matrix run_gru(const GruParams &p, const SequenceBatch &batch, GruTape *tape) {
  require_observed(batch, "GRU");
  Matrix h = Matrix::Zero(p.reset_bias.size(), batch.size());
  if (tape) {
    tape->steps.assign(static_cast<std::size_t>(batch.steps()), {});
  }
  for (Index t = 0; t < batch.steps(); ++t) {
    h = gru_core(p, h, batch.values[t], nullptr,
                 tape ? &tape->steps[static_cast<std::size_t>(t)] : nullptr);
    check_finite(h, t, "GRU");
  }
  return h;
}

Matrix run_grud(const GrudParams &p, const SequenceBatch &batch, GrudTape *tape) {
  auto state = initial_grud_state(p, batch.size());
  if (tape) {
    tape->steps.assign(static_cast<std::size_t>(batch.steps()), {});
  }
  for (Index t = 0; t < batch.steps(); ++t) {
    state = grud_forward_step(
        p, state, batch.values[t], batch.masks[t], batch.deltas[t],
        tape ? &tape->steps[static_cast<std::size_t>(t)] : nullptr);
    check_finite(state.h, t, "GRU-D");
  }
  return state.h;
}

void backprop_ernn(const ErnnParams &p, const SequenceBatch &batch,
                   const ErnnTape &tape, Matrix d_state, ErnnParams &grads) {
  for (Index t = batch.steps(); t-- > 0;) {
    const auto &h = tape.states[static_cast<std::size_t>(t + 1)];
    const auto &h_prev = tape.states[static_cast<std::size_t>(t)];
    Matrix d_pre =
        d_state.cwiseProduct((1.0 - h.array().square()).matrix());
    grads.recurrent_weights.noalias() += d_pre * h_prev.transpose();
    grads.input_weights.noalias() += d_pre * batch.values[t].transpose();
    grads.bias += d_pre.rowwise().sum();
    d_state.noalias() = p.recurrent_weights.transpose() * d_pre;
  }
}

void backprop_gru(const GruParams &p, const GruTape &tape, Matrix d_state,
                  GruParams &grads) {
  GruCoreGrad core;
  for (auto it = tape.steps.rbegin(); it != tape.steps.rend(); ++it) {
    gru_core_backward(p, *it, d_state, grads, core, false);
    d_state = std::move(core.d_h_prev);
  }
}

void backprop_grud(const GrudParams &p, const SequenceBatch &batch,
                   const GrudTape &tape, Matrix d_state, GrudParams &grads) {
  GruCoreGrad core;
  for (Index t = batch.steps(); t-- > 0;) {
    const auto &st = tape.steps[static_cast<std::size_t>(t)];
    const auto &mask = batch.masks[t];
    const auto &deltas = batch.deltas[t];
    gru_core_backward(p.gru, st.core, d_state, grads.gru, core, true);

    grads.reset_mask.noalias() += core.d_reset * mask.transpose();
    grads.candidate_mask.noalias() += core.d_candidate * mask.transpose();
    grads.update_mask.noalias() += core.d_update * mask.transpose();

    // h_hat = gamma_h * h_raw
    Matrix d_gamma_h = core.d_h_prev.cwiseProduct(st.h_raw);
    Matrix d_pre_h = -(d_gamma_h.cwiseProduct(st.state_decay))
                          .cwiseProduct(relu_gate(st.state_decay_pre));
    grads.state_decay_weights.noalias() += d_pre_h * deltas.transpose();
    grads.state_decay_bias += d_pre_h.rowwise().sum();

    // x_hat = gamma_x * x_last + (1 - gamma_x) * mean where unobserved
    Matrix stale = st.x_last;
    stale.colwise() -= p.empirical_means;
    Matrix d_gamma_x = core.d_x.cwiseProduct(stale).cwiseProduct(
        (1.0 - mask.array()).matrix());
    Matrix d_pre_x = -(d_gamma_x.cwiseProduct(st.input_decay))
                          .cwiseProduct(relu_gate(st.input_decay_pre));
    grads.input_decay_weights += d_pre_x.cwiseProduct(deltas).rowwise().sum();
    grads.input_decay_bias += d_pre_x.rowwise().sum();

    d_state = core.d_h_prev.cwiseProduct(st.state_decay);
  }
}

} // namespace detail
} // namespace mtsrnn
