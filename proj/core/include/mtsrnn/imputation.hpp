// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mtsrnn/dataset.hpp"

namespace mtsrnn {

enum class ImputationKind { Zero, LastValueCarriedForward, MeanSubstitution };

std::string_view to_string(ImputationKind kind);
/// Accepts "zero", "locf", "mean". Throws ConfigError otherwise.
ImputationKind parse_imputation_kind(std::string_view text);

struct ImputationMethod {
  ImputationKind kind = ImputationKind::MeanSubstitution;
  /// Training-split observed means. Used by mean substitution and as the
  /// LOCF value before a variable's first observation.
  Vector fallback_means;
};

// Every imputed series has an all-ones mask; values at observed entries are
// copied bit for bit and deltas are left as they were.
MaskedSeries impute_zero(const MaskedSeries &series);
MaskedSeries impute_locf(const MaskedSeries &series, const Vector &fallback);
MaskedSeries impute_mean(const MaskedSeries &series, const Vector &means);

MaskedSeries impute(const MaskedSeries &series, const ImputationMethod &method);
EpisodeSet impute(const EpisodeSet &set, const ImputationMethod &method);

} // namespace mtsrnn
