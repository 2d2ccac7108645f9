// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtsrnn/dataset.hpp"
#include "mtsrnn/imputation.hpp"
#include "mtsrnn/params.hpp"

namespace mtsrnn {

/// Everything needed to rebuild a trained model's inputs and outputs.
struct Checkpoint {
  CellParams params;
  Index t_len = 0;
  std::vector<std::string> variables;
  std::optional<ImputationKind> imputation;
  bool standardized = true;
  Standardization standardization; // raw-scale stats from the train split
  Vector fallback_means;           // train-split means in model input units
  SplitSpec split;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  double validation_f1 = 0.0;
  int best_epoch = 0;
};

// JSON document. Matrices are stored row-major as
// {"rows": r, "cols": c, "data": [...]}.
std::string checkpoint_to_json(const Checkpoint &checkpoint);
Checkpoint checkpoint_from_json(const std::string &text);

void save_checkpoint(const std::filesystem::path &path,
                     const Checkpoint &checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace mtsrnn
