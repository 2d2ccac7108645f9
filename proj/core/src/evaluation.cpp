// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "mtsrnn/errors.hpp"
#include "mtsrnn/network.hpp"

namespace mtsrnn {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ValidationError("length mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  }
}

std::array<std::size_t, 2> class_counts(std::span<const Label> labels) {
  std::array<std::size_t, 2> n{};
  for (auto y : labels) {
    ++n[y != 0 ? 1 : 0];
  }
  return n;
}

} // namespace

Confusion confusion(std::span<const Label> predictions,
                    std::span<const Label> labels) {
  check_lengths(predictions.size(), labels.size());
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] != 0;
    const bool truth = labels[i] != 0;
    if (pred && truth) {
      ++c.tp;
    } else if (pred) {
      ++c.fp;
    } else if (truth) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double f1_score(std::span<const Label> predictions,
                std::span<const Label> labels) {
  const auto c = confusion(predictions, labels);
  const auto denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0
                    : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  check_lengths(scores.size(), labels.size());
  const auto n = class_counts(labels);
  if (n[0] == 0 || n[1] == 0) {
    throw ValidationError("AUC needs both classes present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks (1-based) of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum += midrank;
      }
    }
    i = j;
  }
  const double pos = static_cast<double>(n[1]);
  const double neg = static_cast<double>(n[0]);
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const Label> labels) {
  check_lengths(scores.size(), labels.size());
  const auto n = class_counts(labels);
  if (n[0] == 0 || n[1] == 0) {
    throw ValidationError("ROC curve needs both classes present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(n[0]),
                   static_cast<double>(tp) / static_cast<double>(n[1])});
  }
  return roc;
}

double trapezoid_area(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) * 0.5;
  }
  return area;
}

std::vector<Label> threshold_predictions(std::span<const double> scores,
                                         double threshold) {
  std::vector<Label> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(),
                 [&](double s) { return s >= threshold ? 1 : 0; });
  return out;
}

StateProjection pca_last_states(const Matrix &states,
                                std::span<const Label> labels) {
  if (states.cols() < 2) {
    throw ValidationError("PCA needs hidden size >= 2");
  }
  if (states.rows() < 3) {
    throw ValidationError("PCA needs at least 3 states");
  }
  if (!states.allFinite()) {
    throw NumericError("PCA input contains non-finite values");
  }
  check_lengths(static_cast<std::size_t>(states.rows()), labels.size());

  const Vector mean = states.colwise().mean().transpose();
  Matrix centered = states.rowwise() - mean.transpose();
  const Matrix covariance = (centered.transpose() * centered) /
                            static_cast<double>(states.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition failed");
  }
  const Index h = states.cols();

  StateProjection out;
  out.components.resize(h, 2);
  out.explained_variance.resize(2);
  for (Index k = 0; k < 2; ++k) {
    // Eigenvalues come back in ascending order.
    Vector component = solver.eigenvectors().col(h - 1 - k);
    const double largest = component.cwiseAbs().maxCoeff();
    for (Index i = 0; i < h; ++i) {
      if (std::abs(component[i]) > 1e-9 * largest) {
        if (component[i] < 0.0) {
          component = -component;
        }
        break;
      }
    }
    out.components.col(k) = component;
    out.explained_variance[k] = std::max(0.0, solver.eigenvalues()[h - 1 - k]);
  }
  out.coordinates = centered * out.components;
  out.labels.assign(labels.begin(), labels.end());
  return out;
}

MetricSummary summarize(std::span<const double> values) {
  if (values.size() < 2) {
    throw ValidationError("aggregation needs at least two restarts");
  }
  const double k = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  double sq = 0.0;
  for (double v : values) {
    sq += (v - mean) * (v - mean);
  }
  const double stddev = std::sqrt(sq / (k - 1.0));
  return {mean, stddev / std::sqrt(k)};
}

RestartSummary aggregate_restarts(std::span<const RestartMetrics> restarts) {
  std::vector<double> f1;
  std::vector<double> area;
  for (const auto &r : restarts) {
    f1.push_back(r.f1);
    area.push_back(r.auc);
  }
  return {summarize(f1), summarize(area)};
}

std::string format_mean_se(const MetricSummary &summary, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", digits, summary.mean, digits,
                summary.standard_error);
  return buf;
}

EvalReport evaluate(const CellParams &params, const EpisodeSet &set) {
  if (set.empty()) {
    throw ValidationError("cannot evaluate an empty set");
  }
  const auto batch = make_batch(set.series);
  const auto out = forward(params, batch);

  EvalReport report;
  report.probabilities.assign(out.probabilities.data(),
                              out.probabilities.data() + out.probabilities.size());
  report.final_states = out.final_states;
  report.labels = set.labels;
  const auto preds = threshold_predictions(report.probabilities);
  report.confusion = confusion(preds, set.labels);
  report.f1 = f1_score(preds, set.labels);
  const auto n = class_counts(set.labels);
  if (n[0] > 0 && n[1] > 0) {
    report.auc = auc(report.probabilities, set.labels);
    report.roc_points = roc_curve(report.probabilities, set.labels);
  } else {
    report.auc = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

} // namespace mtsrnn
