// SPDX-License-Identifier: Apache-2.0
#include <vector>

#include <benchmark/benchmark.h>

#include "mtsrnn/imputation.hpp"
#include "mtsrnn/network.hpp"
#include "mtsrnn/synthgen.hpp"
#include "mtsrnn/training.hpp"

namespace {

using namespace mtsrnn;

// One batch of 40 synthetic series at the default shape.
struct Fixture {
  EpisodeSet data;
  SequenceBatch batch;
  std::vector<Label> labels;
  CellParams params;
  LossSpec spec;

  Fixture(CellKind kind, Index hidden) {
    SynthConfig config;
    config.n_series = 40;
    config.seed = 1;
    data = generate(config);
    if (kind != CellKind::Grud) {
      data = impute(data, ImputationMethod{ImputationKind::MeanSubstitution, data.empirical_means});
    }
    batch = make_batch(std::span<const MaskedSeries>(data.series));
    labels = data.labels;
    params = init_params(kind, static_cast<Index>(data.variable_names.size()), hidden, 3, data.empirical_means);
    spec.alpha = class_weights(labels);
    spec.lambda = 1e-3;
  }
};

void forward_pass(benchmark::State &state, CellKind kind) {
  Fixture f(kind, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(f.params, f.batch));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.batch.size()));
}

void backward_pass(benchmark::State &state, CellKind kind) {
  Fixture f(kind, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradients(f.params, f.batch, f.labels, f.spec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.batch.size()));
}

BENCHMARK_CAPTURE(forward_pass, ernn, CellKind::Ernn)->Arg(8)->Arg(22)->Arg(64);
BENCHMARK_CAPTURE(forward_pass, gru, CellKind::Gru)->Arg(8)->Arg(22)->Arg(64);
BENCHMARK_CAPTURE(forward_pass, grud, CellKind::Grud)->Arg(8)->Arg(22)->Arg(64);
BENCHMARK_CAPTURE(backward_pass, ernn, CellKind::Ernn)->Arg(8)->Arg(22)->Arg(64);
BENCHMARK_CAPTURE(backward_pass, gru, CellKind::Gru)->Arg(8)->Arg(22)->Arg(64);
BENCHMARK_CAPTURE(backward_pass, grud, CellKind::Grud)->Arg(8)->Arg(22)->Arg(64);

} // namespace

BENCHMARK_MAIN();
