// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mtsrnn/errors.hpp"
#include "random.hpp"

namespace mtsrnn {

using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_increasing(const Vector &timestamps) {
  for (Index t = 1; t < timestamps.size(); ++t) {
    if (!(timestamps[t] > timestamps[t - 1])) {
      throw ValidationError("timestamps must be strictly increasing (step " +
                            std::to_string(t) + ")");
    }
  }
}

} // namespace

MaskedSeries MaskedSeries::from_values(Matrix values, Vector timestamps) {
  if (timestamps.size() != values.rows()) {
    throw ValidationError("timestamps length " +
                          std::to_string(timestamps.size()) +
                          " does not match " + std::to_string(values.rows()) +
                          " steps");
  }
  check_increasing(timestamps);
  MaskedSeries s;
  s.mask = values.unaryExpr([](double x) { return std::isnan(x) ? 0.0 : 1.0; });
  s.values = std::move(values);
  s.timestamps = std::move(timestamps);
  s.deltas = compute_deltas(s.mask, s.timestamps);
  return s;
}

Matrix compute_deltas(const Matrix &mask, const Vector &timestamps) {
  // Same values as the running sum of step widths since the last observation,
  // but taken as one difference so long gaps do not accumulate rounding.
  Matrix deltas = Matrix::Zero(mask.rows(), mask.cols());
  for (Index v = 0; v < mask.cols(); ++v) {
    double anchor = mask.rows() > 0 ? timestamps[0] : 0.0;
    for (Index t = 1; t < mask.rows(); ++t) {
      if (mask(t - 1, v) > 0.5) {
        anchor = timestamps[t - 1];
      }
      deltas(t, v) = timestamps[t] - anchor;
    }
  }
  return deltas;
}

Vector observed_means(std::span<const MaskedSeries> series, Index variables) {
  return observed_stats(series, variables).mean;
}

Standardization observed_stats(std::span<const MaskedSeries> series,
                               Index variables) {
  // Two passes over observed entries; the set is small and this keeps the
  // variance free of cancellation.
  Vector sum = Vector::Zero(variables);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(variables);
  for (const auto &s : series) {
    for (Index t = 0; t < s.steps(); ++t) {
      for (Index v = 0; v < variables; ++v) {
        if (s.mask(t, v) > 0.5) {
          sum[v] += s.values(t, v);
          ++count[v];
        }
      }
    }
  }
  for (Index v = 0; v < variables; ++v) {
    if (count[v] == 0) {
      throw ValidationError("variable " + std::to_string(v) +
                            " has no observed entries");
    }
  }
  Standardization stats;
  stats.mean = sum.array() / count.cast<double>().array();
  Vector sq = Vector::Zero(variables);
  for (const auto &s : series) {
    for (Index t = 0; t < s.steps(); ++t) {
      for (Index v = 0; v < variables; ++v) {
        if (s.mask(t, v) > 0.5) {
          const double d = s.values(t, v) - stats.mean[v];
          sq[v] += d * d;
        }
      }
    }
  }
  stats.stddev = (sq.array() / count.cast<double>().array()).sqrt();
  return stats;
}

EpisodeSet make_episode_set(std::vector<std::string> ids,
                            std::vector<MaskedSeries> series,
                            std::vector<Label> labels,
                            std::vector<std::string> variable_names) {
  if (ids.size() != series.size() || labels.size() != series.size()) {
    throw ValidationError("ids, series and labels differ in length");
  }
  const auto v = static_cast<Index>(variable_names.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto &s = series[i];
    if (s.variables() != v || s.steps() != series.front().steps()) {
      throw ValidationError("episode " + ids[i] + " has shape " +
                            std::to_string(s.steps()) + "x" +
                            std::to_string(s.variables()) + ", expected " +
                            std::to_string(series.front().steps()) + "x" +
                            std::to_string(v));
    }
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("episode " + ids[i] + " has label " +
                            std::to_string(labels[i]));
    }
  }
  EpisodeSet set;
  set.ids = std::move(ids);
  set.series = std::move(series);
  set.labels = std::move(labels);
  set.variable_names = std::move(variable_names);
  if (!set.series.empty()) {
    set.standardization = observed_stats(set.series, v);
    set.empirical_means = set.standardization.mean;
  }
  return set;
}

EpisodeSet subset(const EpisodeSet &set, std::span<const std::size_t> indices) {
  EpisodeSet out;
  out.variable_names = set.variable_names;
  out.empirical_means = set.empirical_means;
  out.standardization = set.standardization;
  out.ids.reserve(indices.size());
  out.series.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.ids.push_back(set.ids.at(i));
    out.series.push_back(set.series.at(i));
    out.labels.push_back(set.labels.at(i));
  }
  return out;
}

EpisodeSet read_episodes(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        return true;
      }
    }
    return false;
  };

  if (!next_line()) {
    throw ParseError(0, "empty dataset file");
  }
  std::vector<std::string> names;
  Index t_len = 0;
  try {
    const auto header = json::parse(line);
    names = header.at("variables").get<std::vector<std::string>>();
    t_len = header.at("t_len").get<Index>();
  } catch (const json::exception &e) {
    throw ParseError(line_no, std::string("bad header: ") + e.what());
  }
  if (names.empty() || t_len <= 0) {
    throw ParseError(line_no, "header needs at least one variable and t_len > 0");
  }
  const auto v_count = static_cast<Index>(names.size());

  std::vector<std::string> ids;
  std::vector<MaskedSeries> series;
  std::vector<Label> labels;
  while (next_line()) {
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception &e) {
      throw ParseError(line_no, e.what());
    }
    try {
      ids.push_back(record.at("id").get<std::string>());
      const int label = record.at("label").get<int>();
      if (label != 0 && label != 1) {
        throw ParseError(line_no, "label must be 0 or 1");
      }
      labels.push_back(label);
      const auto &ts = record.at("timestamps");
      const auto &rows = record.at("values");
      if (!ts.is_array() || !rows.is_array() ||
          static_cast<Index>(ts.size()) != t_len ||
          static_cast<Index>(rows.size()) != t_len) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": expected " + std::to_string(t_len) +
                              " time steps");
      }
      Vector timestamps(t_len);
      Matrix values(t_len, v_count);
      for (Index t = 0; t < t_len; ++t) {
        timestamps[t] = ts[t].get<double>();
        const auto &row = rows[t];
        if (!row.is_array() || static_cast<Index>(row.size()) != v_count) {
          throw ValidationError("line " + std::to_string(line_no) + ": step " +
                                std::to_string(t) + " needs " +
                                std::to_string(v_count) + " values");
        }
        for (Index v = 0; v < v_count; ++v) {
          const auto &cell = row[v];
          values(t, v) = cell.is_null() ? kNaN : cell.get<double>();
        }
      }
      try {
        series.push_back(
            MaskedSeries::from_values(std::move(values), std::move(timestamps)));
      } catch (const ValidationError &e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " +
                              e.what());
      }
    } catch (const json::exception &e) {
      throw ParseError(line_no, e.what());
    }
  }
  return make_episode_set(std::move(ids), std::move(series), std::move(labels),
                          std::move(names));
}

EpisodeSet load_episodes(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path.string());
  }
  try {
    return read_episodes(in);
  } catch (const ParseError &e) {
    throw ParseError(e.line(), e.detail(), path.string());
  } catch (const ValidationError &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_episodes(std::ostream &out, const EpisodeSet &set) {
  json header;
  header["variables"] = set.variable_names;
  header["t_len"] = set.steps();
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto &s = set.series[i];
    json record;
    record["id"] = set.ids[i];
    record["label"] = set.labels[i];
    record["timestamps"] = std::vector<double>(
        s.timestamps.data(), s.timestamps.data() + s.timestamps.size());
    json rows = json::array();
    for (Index t = 0; t < s.steps(); ++t) {
      json row = json::array();
      for (Index v = 0; v < s.variables(); ++v) {
        if (s.mask(t, v) > 0.5) {
          row.push_back(s.values(t, v));
        } else {
          row.push_back(nullptr);
        }
      }
      rows.push_back(std::move(row));
    }
    record["values"] = std::move(rows);
    out << record.dump() << '\n';
  }
}

void save_episodes(const std::filesystem::path &path, const EpisodeSet &set) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write " + path.string());
  }
  write_episodes(out, set);
}

SplitSizes split_sizes(std::size_t n, const SplitSpec &spec) {
  auto in_open_unit = [](double f) { return f > 0.0 && f < 1.0; };
  if (!in_open_unit(spec.validation_fraction) ||
      !in_open_unit(spec.train_fraction)) {
    throw ConfigError("split fractions must lie in (0, 1)");
  }
  SplitSizes sizes;
  sizes.validation = static_cast<std::size_t>(
      std::floor(spec.validation_fraction * static_cast<double>(n)));
  const std::size_t remainder = n - sizes.validation;
  const double base = spec.basis == TrainFractionBasis::Remainder
                          ? static_cast<double>(remainder)
                          : static_cast<double>(n);
  sizes.train = std::min(
      remainder, static_cast<std::size_t>(std::floor(spec.train_fraction * base)));
  sizes.test = remainder - sizes.train;
  return sizes;
}

Splits split(const EpisodeSet &set, const SplitSpec &spec) {
  const auto sizes = split_sizes(set.size(), spec);
  if (sizes.train == 0 || sizes.validation == 0 || sizes.test == 0) {
    throw ValidationError("split of " + std::to_string(set.size()) +
                          " episodes leaves an empty part");
  }
  auto rng = detail::make_rng(spec.seed, 0x5011);
  const auto order = detail::shuffled_indices(set.size(), rng);

  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + static_cast<long>(begin),
                                 order.begin() + static_cast<long>(begin + count));
    std::sort(idx.begin(), idx.end());
    return subset(set, idx);
  };
  Splits out;
  out.validation = take(0, sizes.validation);
  out.train = take(sizes.validation, sizes.train);
  out.test = take(sizes.validation + sizes.train, sizes.test);

  const auto stats = observed_stats(out.train.series, set.variables());
  for (auto *part : {&out.train, &out.validation, &out.test}) {
    part->standardization = stats;
    part->empirical_means = stats.mean;
  }
  return out;
}

ClassWeights class_weights(std::span<const Label> labels) {
  std::array<std::size_t, 2> counts{};
  for (auto y : labels) {
    ++counts[y != 0 ? 1 : 0];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw ValidationError("class weights need both classes present");
  }
  const auto n = static_cast<double>(labels.size());
  ClassWeights w;
  w.alpha = {1.0 - static_cast<double>(counts[0]) / n,
             1.0 - static_cast<double>(counts[1]) / n};
  return w;
}

EpisodeSet standardize(const EpisodeSet &set, const Standardization &stats) {
  EpisodeSet out = set;
  for (auto &s : out.series) {
    for (Index v = 0; v < s.variables(); ++v) {
      const double sd = stats.stddev[v];
      if (!(sd > 0.0)) {
        continue;
      }
      for (Index t = 0; t < s.steps(); ++t) {
        if (s.mask(t, v) > 0.5) {
          s.values(t, v) = (s.values(t, v) - stats.mean[v]) / sd;
        }
      }
    }
  }
  out.standardization = stats;
  if (!out.series.empty()) {
    out.empirical_means = observed_means(out.series, out.variables());
  }
  return out;
}

Splits standardize(const Splits &splits) {
  const auto &stats = splits.train.standardization;
  Splits out{standardize(splits.train, stats),
             standardize(splits.validation, stats),
             standardize(splits.test, stats)};
  out.validation.empirical_means = out.train.empirical_means;
  out.test.empirical_means = out.train.empirical_means;
  return out;
}

} // namespace mtsrnn
