// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/imputation.hpp"

#include "mtsrnn/errors.hpp"

namespace mtsrnn {

std::string_view to_string(ImputationKind kind) {
  switch (kind) {
  case ImputationKind::Zero:
    return "zero";
  case ImputationKind::LastValueCarriedForward:
    return "locf";
  case ImputationKind::MeanSubstitution:
    return "mean";
  }
  return "?";
}

ImputationKind parse_imputation_kind(std::string_view text) {
  if (text == "zero") {
    return ImputationKind::Zero;
  }
  if (text == "locf") {
    return ImputationKind::LastValueCarriedForward;
  }
  if (text == "mean") {
    return ImputationKind::MeanSubstitution;
  }
  throw ConfigError("unknown imputation method '" + std::string(text) +
                    "' (expected zero, locf or mean)");
}

namespace {

template <class Fill> MaskedSeries fill_missing(const MaskedSeries &in, Fill fill) {
  MaskedSeries out = in;
  for (Index v = 0; v < in.variables(); ++v) {
    for (Index t = 0; t < in.steps(); ++t) {
      if (in.mask(t, v) < 0.5) {
        out.values(t, v) = fill(out, t, v);
      }
    }
  }
  out.mask.setOnes();
  return out;
}

void check_width(const MaskedSeries &s, const Vector &v, const char *what) {
  if (v.size() != s.variables()) {
    throw ConfigError(std::string(what) + " has " + std::to_string(v.size()) +
                      " entries for " + std::to_string(s.variables()) +
                      " variables");
  }
}

} // namespace

MaskedSeries impute_zero(const MaskedSeries &series) {
  return fill_missing(series, [](const MaskedSeries &, Index, Index) { return 0.0; });
}

MaskedSeries impute_locf(const MaskedSeries &series, const Vector &fallback) {
  check_width(series, fallback, "LOCF fallback");
  // Columns are filled top to bottom, so out(t-1, v) is already complete.
  return fill_missing(series, [&](const MaskedSeries &out, Index t, Index v) {
    return t == 0 ? fallback[v] : out.values(t - 1, v);
  });
}

MaskedSeries impute_mean(const MaskedSeries &series, const Vector &means) {
  check_width(series, means, "mean vector");
  return fill_missing(series,
                      [&](const MaskedSeries &, Index, Index v) { return means[v]; });
}

MaskedSeries impute(const MaskedSeries &series, const ImputationMethod &method) {
  switch (method.kind) {
  case ImputationKind::Zero:
    return impute_zero(series);
  case ImputationKind::LastValueCarriedForward:
    return impute_locf(series, method.fallback_means);
  case ImputationKind::MeanSubstitution:
    return impute_mean(series, method.fallback_means);
  }
  return series;
}

EpisodeSet impute(const EpisodeSet &set, const ImputationMethod &method) {
  EpisodeSet out = set;
  for (auto &s : out.series) {
    s = impute(s, method);
  }
  return out;
}

} // namespace mtsrnn
