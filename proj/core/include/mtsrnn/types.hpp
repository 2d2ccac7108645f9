// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace mtsrnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Binary labels: 1 = case (positive), 0 = control.
using Label = int;

} // namespace mtsrnn
