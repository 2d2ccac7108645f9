// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "mtsrnn/dataset.hpp"
#include "mtsrnn/params.hpp"

namespace mtsrnn {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

Confusion confusion(std::span<const Label> predictions,
                    std::span<const Label> labels);

/// 2 TP / (2 TP + FP + FN) for the positive class; 0 when the denominator is.
double f1_score(std::span<const Label> predictions,
                std::span<const Label> labels);

/// Rank-sum (Mann-Whitney) AUC with midranks for ties. Throws
/// ValidationError when only one class is present.
double auc(std::span<const double> scores, std::span<const Label> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Threshold sweep over descending scores; tied scores form one step.
/// Starts at (0, 0) and ends at (1, 1).
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const Label> labels);

/// Trapezoidal area under a ROC polyline.
double trapezoid_area(std::span<const RocPoint> roc);

/// Scores at or above `threshold` are predicted positive.
std::vector<Label> threshold_predictions(std::span<const double> scores,
                                         double threshold = 0.5);

struct StateProjection {
  Matrix coordinates; // N x 2
  Vector explained_variance; // 2, nonincreasing
  Matrix components; // H x 2, orthonormal columns
  std::vector<Label> labels;
};

/// Top two principal components of the sample covariance. Each component's
/// first loading with non-negligible magnitude is made positive.
StateProjection pca_last_states(const Matrix &states,
                                std::span<const Label> labels);

struct MetricSummary {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct RestartMetrics {
  double f1 = 0.0;
  double auc = 0.0;
};

struct RestartSummary {
  MetricSummary f1;
  MetricSummary auc;
};

/// Mean and sample-stddev / sqrt(k) per metric. Needs at least two entries.
RestartSummary aggregate_restarts(std::span<const RestartMetrics> restarts);
MetricSummary summarize(std::span<const double> values);

/// "0.91 ± 0.02"
std::string format_mean_se(const MetricSummary &summary, int digits = 2);

struct EvalReport {
  double f1 = 0.0;
  double auc = 0.0;
  std::vector<RocPoint> roc_points;
  Confusion confusion;
  std::vector<double> probabilities;
  Matrix final_states; // H x N
  std::vector<Label> labels;
};

/// Deterministic evaluation (no dropout) at the 0.5 decision threshold.
/// `set` must already hold the inputs the model expects.
EvalReport evaluate(const CellParams &params, const EpisodeSet &set);

} // namespace mtsrnn
