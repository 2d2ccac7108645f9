// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "mtsrnn/errors.hpp"
#include "random.hpp"

namespace mtsrnn {

namespace {

/// Box-Muller on the portable uniform draw.
double standard_normal(std::mt19937_64 &rng) {
  double u1;
  do {
    u1 = detail::uniform_unit(rng);
  } while (u1 <= 0.0);
  const double u2 = detail::uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Baseline level of variable v; spans several orders of magnitude like raw
/// laboratory values do.
double variable_level(Index v) {
  static constexpr double kLevels[] = {4.5, 140.0, 0.8, 35.0, 250.0,
                                       12.0, 7.0,  90.0, 1.5, 60.0};
  return kLevels[v % 10] * (1.0 + 0.1 * static_cast<double>(v / 10));
}

} // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string &what) { throw ValidationError(what); };
  if (n_series == 0) {
    fail("n_series must be positive");
  }
  if (t_len <= 0 || n_vars <= 0) {
    fail("t_len and n_vars must be positive");
  }
  if (!(class_balance >= 0.0 && class_balance <= 1.0)) {
    fail("class_balance must lie in [0, 1]");
  }
  if (!(base_missing_rate >= 0.0 && base_missing_rate < 1.0)) {
    fail("missing rate must lie in [0, 1)");
  }
  if (!(informative_missing_boost >= 0.0) ||
      !(base_missing_rate + informative_missing_boost < 1.0)) {
    fail("informative boost must be >= 0 with base rate + boost < 1");
  }
  if (onset_day < 0 || onset_day >= t_len) {
    fail("onset_day must lie in [0, t_len)");
  }
  if (!(noise_std >= 0.0) || !(series_offset_std >= 0.0)) {
    fail("noise levels must be non-negative");
  }
  if (!(std::abs(ar_coefficient) < 1.0)) {
    fail("ar_coefficient must lie in (-1, 1)");
  }
  if (signal_variables < 0 || signal_variables > n_vars ||
      informative_variables < 0 || informative_variables > n_vars) {
    fail("designated variable counts must lie in [0, n_vars]");
  }
}

double SynthConfig::effective_missing_rate() const {
  return base_missing_rate + informative_missing_boost * class_balance *
                                 static_cast<double>(informative_variables) /
                                 static_cast<double>(n_vars);
}

EpisodeSet generate(const SynthConfig &config) {
  config.validate();
  const Index steps = config.t_len;
  const Index vars = config.n_vars;
  const double innovation =
      std::sqrt(1.0 - config.ar_coefficient * config.ar_coefficient);

  std::vector<Matrix> full(config.n_series, Matrix(steps, vars));
  std::vector<Matrix> observed(config.n_series, Matrix(steps, vars));
  std::vector<Label> labels(config.n_series);
  for (std::size_t n = 0; n < config.n_series; ++n) {
    auto rng = detail::make_rng(config.seed, n);
    const Label y = detail::uniform_unit(rng) < config.class_balance ? 1 : 0;
    labels[n] = y;
    for (Index v = 0; v < vars; ++v) {
      const double offset = config.series_offset_std * standard_normal(rng);
      double noise = config.noise_std * standard_normal(rng);
      const bool signal = y == 1 && v < config.signal_variables;
      const bool informative =
          y == 1 && v >= vars - config.informative_variables;
      const double drop = config.base_missing_rate +
                          (informative ? config.informative_missing_boost : 0.0);
      for (Index t = 0; t < steps; ++t) {
        if (t > 0) {
          noise = config.ar_coefficient * noise +
                  innovation * config.noise_std * standard_normal(rng);
        }
        double x = variable_level(v) + offset + noise;
        if (signal && t >= config.onset_day) {
          x += config.signal_shift;
        }
        full[n](t, v) = x;
        observed[n](t, v) = detail::uniform_unit(rng) < drop ? 0.0 : 1.0;
      }
    }
  }

  // A variable never observed anywhere gets one forced observation.
  for (Index v = 0; v < vars; ++v) {
    bool seen = false;
    for (std::size_t n = 0; n < config.n_series && !seen; ++n) {
      seen = observed[n].col(v).sum() > 0.0;
    }
    if (!seen) {
      observed[0](0, v) = 1.0;
    }
  }

  Vector timestamps = Vector::LinSpaced(steps, 0.0, static_cast<double>(steps - 1));
  std::vector<std::string> ids;
  std::vector<MaskedSeries> series;
  ids.reserve(config.n_series);
  series.reserve(config.n_series);
  for (std::size_t n = 0; n < config.n_series; ++n) {
    Matrix values = (observed[n].array() > 0.5)
                        .select(full[n], std::numeric_limits<double>::quiet_NaN());
    char id[32];
    std::snprintf(id, sizeof id, "syn%05zu", n);
    ids.emplace_back(id);
    series.push_back(MaskedSeries::from_values(std::move(values), timestamps));
  }
  std::vector<std::string> names;
  for (Index v = 0; v < vars; ++v) {
    names.push_back("var" + std::to_string(v));
  }
  return make_episode_set(std::move(ids), std::move(series), std::move(labels),
                          std::move(names));
}

DatasetSummary describe(const EpisodeSet &set, Index from_step) {
  const Index vars = set.variables();
  DatasetSummary s;
  std::array<Vector, 2> missing{Vector::Zero(vars), Vector::Zero(vars)};
  std::array<Vector, 2> sums{Vector::Zero(vars), Vector::Zero(vars)};
  std::array<Vector, 2> counts{Vector::Zero(vars), Vector::Zero(vars)};
  Vector all_sum = Vector::Zero(vars);
  Vector all_count = Vector::Zero(vars);
  double observed = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto c = static_cast<std::size_t>(set.labels[i] != 0 ? 1 : 0);
    ++s.class_counts[c];
    const auto &ser = set.series[i];
    for (Index t = 0; t < ser.steps(); ++t) {
      for (Index v = 0; v < vars; ++v) {
        total += 1.0;
        if (ser.mask(t, v) < 0.5) {
          missing[c][v] += 1.0;
          continue;
        }
        observed += 1.0;
        all_sum[v] += ser.values(t, v);
        all_count[v] += 1.0;
        if (t >= from_step) {
          sums[c][v] += ser.values(t, v);
          counts[c][v] += 1.0;
        }
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < 2; ++c) {
    const double entries =
        static_cast<double>(s.class_counts[c]) * static_cast<double>(set.steps());
    s.missing_rate[c] = entries > 0 ? Vector(missing[c] / entries)
                                    : Vector::Constant(vars, nan);
    s.observed_mean[c].resize(vars);
    for (Index v = 0; v < vars; ++v) {
      s.observed_mean[c][v] = counts[c][v] > 0 ? sums[c][v] / counts[c][v] : nan;
    }
  }
  s.overall_observed_mean = all_sum.cwiseQuotient(all_count);
  s.observed_fraction = total > 0 ? observed / total : 0.0;
  return s;
}

} // namespace mtsrnn
