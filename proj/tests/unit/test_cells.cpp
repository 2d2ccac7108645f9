// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "mtsrnn/cells.hpp"
#include "mtsrnn/errors.hpp"
#include "mtsrnn/network.hpp"
#include "oracles.hpp"

namespace mtsrnn {
namespace {

using testing::kNaN;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

template <class P> P zero_params(CellKind kind, Index v, Index h) {
  const auto p = zeros_like(init_params(kind, v, h, 1, Vector::Zero(v)));
  return std::get<P>(p);
}

// Loop-by-loop GRU step used as an oracle for the matrix implementation.
Vector gru_step_oracle(const GruParams &p, const Vector &h, const Vector &x) {
  const Index H = h.size();
  const Index V = x.size();
  Vector r(H), u(H), c(H), out(H);
  for (Index i = 0; i < H; ++i) {
    double zr = p.reset_bias[i], zu = p.update_bias[i];
    for (Index j = 0; j < H; ++j) {
      zr += p.reset_recurrent(i, j) * h[j];
      zu += p.update_recurrent(i, j) * h[j];
    }
    for (Index j = 0; j < V; ++j) {
      zr += p.reset_input(i, j) * x[j];
      zu += p.update_input(i, j) * x[j];
    }
    r[i] = logistic(zr);
    u[i] = logistic(zu);
  }
  for (Index i = 0; i < H; ++i) {
    double zc = p.candidate_bias[i];
    for (Index j = 0; j < H; ++j) {
      zc += p.candidate_recurrent(i, j) * r[j] * h[j];
    }
    for (Index j = 0; j < V; ++j) {
      zc += p.candidate_input(i, j) * x[j];
    }
    c[i] = std::tanh(zc);
    out[i] = (1.0 - u[i]) * h[i] + u[i] * c[i];
  }
  return out;
}

TEST(Ernn, ZeroParametersGiveZeroState) {
  const auto p = zero_params<ErnnParams>(CellKind::Ernn, 3, 4);
  const Matrix h = ernn_step(p, Matrix::Constant(4, 1, 0.7), Matrix::Constant(3, 1, 2.0));
  EXPECT_TRUE(h.isZero(0.0));
}

TEST(Ernn, SingleInputWeight) {
  auto p = zero_params<ErnnParams>(CellKind::Ernn, 1, 1);
  p.input_weights(0, 0) = 1.0;
  EXPECT_NEAR(ernn_step(p, scalar(0.0), scalar(0.5))(0, 0), 0.46212, 1e-5);
}

TEST(Ernn, Saturates) {
  auto p = zero_params<ErnnParams>(CellKind::Ernn, 1, 1);
  p.recurrent_weights(0, 0) = 1.0;
  EXPECT_NEAR(ernn_step(p, scalar(10.0), scalar(0.0))(0, 0), 1.0, 1e-4);
}

TEST(Gru, ZeroParametersHalveState) {
  const auto p = zero_params<GruParams>(CellKind::Gru, 1, 1);
  EXPECT_DOUBLE_EQ(gru_step(p, scalar(1.0), scalar(0.0))(0, 0), 0.5);
}

TEST(Gru, ClosedUpdateGateKeepsState) {
  auto p = zero_params<GruParams>(CellKind::Gru, 1, 1);
  p.update_bias[0] = -50.0;
  EXPECT_NEAR(gru_step(p, scalar(0.3), scalar(1.0))(0, 0), 0.3, 1e-15);
}

TEST(Gru, OpenUpdateGateTakesCandidate) {
  auto p = zero_params<GruParams>(CellKind::Gru, 1, 1);
  p.update_bias[0] = 50.0;
  EXPECT_NEAR(gru_step(p, scalar(0.3), scalar(1.0))(0, 0), 0.0, 1e-15);
}

TEST(Gru, MatchesLoopOracleAndStaysBetweenStateAndCandidate) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = std::get<GruParams>(
        init_params(CellKind::Gru, 3, 5, static_cast<std::uint64_t>(trial), Vector::Zero(3)));
    Vector h(5), x(3);
    for (auto &e : h) e = std::tanh(normal(rng));
    for (auto &e : x) e = normal(rng);
    const Matrix got = gru_step(p, h, x);
    const Vector want = gru_step_oracle(p, h, x);
    EXPECT_TRUE(got.isApprox(want, 1e-13));

    // Convex combination: with u in (0, 1) the new state lies between h_prev
    // and the candidate; recover the candidate from a fully open gate.
    auto open = p;
    open.update_bias.setConstant(60.0);
    open.update_recurrent.setZero();
    open.update_input.setZero();
    const Matrix candidate = gru_step(open, h, x);
    for (Index i = 0; i < 5; ++i) {
      EXPECT_GE(got(i, 0), std::min(h[i], candidate(i, 0)) - 1e-15);
      EXPECT_LE(got(i, 0), std::max(h[i], candidate(i, 0)) + 1e-15);
    }
  }
}

TEST(Decay, RatesFromIntervals) {
  const Vector zero = Vector::Zero(1);
  EXPECT_NEAR(decay_rates(scalar(0.5), zero, scalar(2.0))(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_EQ(decay_rates(scalar(-1.0), zero, scalar(2.0))(0, 0), 1.0);
  EXPECT_EQ(decay_rates(scalar(3.0), zero, scalar(0.0))(0, 0), 1.0);
}

TEST(Decay, RatesInUnitInterval) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  Matrix w(4, 3), d(3, 6);
  Vector b(4);
  for (auto &e : w.reshaped()) e = normal(rng);
  for (auto &e : b) e = normal(rng);
  for (auto &e : d.reshaped()) e = std::abs(normal(rng));
  const Matrix g = decay_rates(w, b, d);
  EXPECT_TRUE((g.array() > 0.0).all());
  EXPECT_TRUE((g.array() <= 1.0).all());
  EXPECT_TRUE((decay_rates(w, Vector::Zero(4), Matrix::Zero(3, 6)).array() == 1.0).all());
}

TEST(Decay, InputPassthroughAndBlend) {
  const Vector mean = Vector::Constant(1, 2.0);
  EXPECT_EQ(decay_input(scalar(7), scalar(1), scalar(0.1), scalar(4), mean)(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(decay_input(scalar(kNaN), scalar(0), scalar(0.5), scalar(4), mean)(0, 0),
                   3.0);
  EXPECT_EQ(decay_input(scalar(kNaN), scalar(0), scalar(0.0), scalar(4), mean)(0, 0), 2.0);
}

TEST(Decay, InputPassthroughWhereObservedForAnyDecay) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix x(4, 3), m(4, 3), g(4, 3), last(4, 3);
    Vector means(4);
    for (auto &e : x.reshaped()) e = 10 * unit(rng) - 5;
    for (auto &e : m.reshaped()) e = unit(rng) < 0.5 ? 1.0 : 0.0;
    for (auto &e : g.reshaped()) e = unit(rng);
    for (auto &e : last.reshaped()) e = unit(rng);
    for (auto &e : means) e = unit(rng);
    const Matrix out = decay_input(x, m, g, last, means);
    for (Index i = 0; i < x.size(); ++i) {
      if (m.reshaped()[i] == 1.0) {
        EXPECT_EQ(out.reshaped()[i], x.reshaped()[i]);
      }
    }
  }
}

TEST(Decay, StateScaling) {
  Matrix h(2, 1);
  h << 2, -4;
  EXPECT_EQ(decay_state(h, Matrix::Ones(2, 1)), h);
  Matrix half = Matrix::Constant(2, 1, 0.5);
  Matrix want(2, 1);
  want << 1, -2;
  EXPECT_EQ(decay_state(h, half), want);
  EXPECT_TRUE(decay_state(Matrix::Zero(2, 1), half).isZero(0.0));
}

TEST(Grud, ReducesToGruWithoutDecayOrMaskWeights) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = std::get<GrudParams>(
        init_params(CellKind::Grud, 3, 4, static_cast<std::uint64_t>(trial), Vector::Zero(3)));
    p.reset_mask.setZero();
    p.candidate_mask.setZero();
    p.update_mask.setZero();
    p.input_decay_weights.setZero();
    p.input_decay_bias.setZero();
    p.state_decay_weights.setZero();
    p.state_decay_bias.setZero();
    Matrix h(4, 2), x(3, 2), d(3, 2);
    for (auto &e : h.reshaped()) e = std::tanh(normal(rng));
    for (auto &e : x.reshaped()) e = normal(rng);
    for (auto &e : d.reshaped()) e = std::abs(normal(rng));
    GrudRuntimeState state{h, Matrix::Zero(3, 2)};
    const auto next = grud_step(p, state, x, Matrix::Ones(3, 2), d);
    EXPECT_TRUE(next.h.isApprox(gru_step(p.gru, h, x), 1e-14));
    EXPECT_EQ(next.x_last, x);
  }
}

TEST(Grud, FullyMissingFirstStepSeesMeans) {
  Vector means(2);
  means << 1.5, -0.5;
  auto p = std::get<GrudParams>(init_params(CellKind::Grud, 2, 3, 4, means));
  auto state = initial_grud_state(p, 1);
  EXPECT_EQ(state.x_last, Matrix(means));
  EXPECT_TRUE(state.h.isZero(0.0));

  // With x_last already at the means, any decay leaves the input at the means,
  // so the step equals a GRU-D step fed the means as observed values.
  Matrix missing = Matrix::Constant(2, 1, kNaN);
  const auto a = grud_step(p, state, missing, Matrix::Zero(2, 1), Matrix::Constant(2, 1, 3.0));
  auto unmasked = p;
  unmasked.reset_mask.setZero();
  unmasked.candidate_mask.setZero();
  unmasked.update_mask.setZero();
  const auto b = grud_step(unmasked, state, Matrix(means), Matrix::Ones(2, 1),
                           Matrix::Constant(2, 1, 3.0));
  EXPECT_TRUE(a.h.allFinite());
  EXPECT_TRUE(a.h.isApprox(b.h, 1e-14));
}

TEST(Forward, ZeroReadoutGivesHalf) {
  std::mt19937_64 rng(1);
  auto s = testing::random_series(rng, 5, 3, 0.0);
  for (auto kind : {CellKind::Ernn, CellKind::Gru, CellKind::Grud}) {
    auto p = init_params(kind, 3, 4, 2, Vector::Zero(3));
    std::visit([](auto &q) {
      if constexpr (std::is_same_v<std::decay_t<decltype(q)>, GrudParams>) {
        q.gru.readout.weights.setZero();
      } else {
        q.readout.weights.setZero();
      }
    }, p);
    EXPECT_DOUBLE_EQ(forward(p, s).probability, 0.5);
  }
}

TEST(Forward, BiasOnlySoftmax) {
  auto p = zero_params<ErnnParams>(CellKind::Ernn, 1, 2);
  p.readout.bias << 0.0, 10.0;
  const auto s = MaskedSeries::from_values(scalar(0.3), Vector::Zero(1));
  EXPECT_NEAR(forward(CellParams{p}, s).probability, 0.9999546, 1e-7);
}

TEST(Forward, ReadoutIsAProbabilityPair) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 5.0);
  ReadoutParams r{Matrix(2, 4), Vector(2)};
  for (auto &e : r.weights.reshaped()) e = normal(rng);
  for (auto &e : r.bias) e = normal(rng);
  Matrix states(4, 30);
  for (auto &e : states.reshaped()) e = normal(rng);
  const Matrix p = readout_probabilities(r, states);
  EXPECT_TRUE((p.array() > 0.0).all());
  EXPECT_TRUE(((p.colwise().sum().array() - 1.0).abs() < 1e-15).all());
}

TEST(Forward, GrudMatchesGruOnObservedSeriesWithReductionParameters) {
  std::mt19937_64 rng(4);
  const auto s = testing::random_series(rng, 6, 3, 0.0);
  auto p = std::get<GrudParams>(init_params(CellKind::Grud, 3, 4, 8, Vector::Zero(3)));
  p.reset_mask.setZero();
  p.candidate_mask.setZero();
  p.update_mask.setZero();
  p.input_decay_weights.setZero();
  p.state_decay_weights.setZero();
  const auto a = forward(CellParams{p}, s);
  const auto b = forward(CellParams{p.gru}, s);
  EXPECT_NEAR(a.probability, b.probability, 1e-15);
}

TEST(Forward, ImputationFreeCellsRejectGaps) {
  std::mt19937_64 rng(4);
  const auto s = testing::random_series(rng, 6, 3, 0.5);
  ASSERT_FALSE(s.fully_observed());
  EXPECT_THROW(forward(init_params(CellKind::Gru, 3, 4, 1, Vector::Zero(3)), s), ConfigError);
  EXPECT_THROW(forward(init_params(CellKind::Ernn, 3, 4, 1, Vector::Zero(3)), s), ConfigError);
  EXPECT_NO_THROW(forward(init_params(CellKind::Grud, 3, 4, 1, Vector::Zero(3)), s));
}

TEST(Forward, OverflowNamesTheStep) {
  // Opposite-signed weights on two huge inputs give inf - inf in the
  // candidate pre-activation at the third step.
  auto p = zero_params<GruParams>(CellKind::Gru, 2, 1);
  p.candidate_input << 10.0, -10.0;
  Matrix values = Matrix::Zero(3, 2);
  values.row(2).setConstant(1e308);
  const auto s = MaskedSeries::from_values(values, Vector::LinSpaced(3, 0, 2));
  try {
    forward(CellParams{p}, s);
    FAIL() << "expected a numeric error";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
  }
}

TEST(Forward, DeterministicAndBatchMatchesSingle) {
  std::mt19937_64 rng(12);
  std::vector<MaskedSeries> series;
  for (int i = 0; i < 5; ++i) {
    series.push_back(testing::random_series(rng, 7, 3, 0.4));
  }
  const auto p = init_params(CellKind::Grud, 3, 4, 21, Vector::Constant(3, 0.2));
  const auto batch = make_batch(std::span<const MaskedSeries>(series));
  const auto out1 = forward(p, batch);
  const auto out2 = forward(p, batch);
  EXPECT_EQ(out1.probabilities, out2.probabilities);
  for (std::size_t i = 0; i < series.size(); ++i) {
    EXPECT_NEAR(forward(p, series[i]).probability, out1.probabilities[static_cast<Index>(i)],
                1e-15);
  }
}

} // namespace
} // namespace mtsrnn
