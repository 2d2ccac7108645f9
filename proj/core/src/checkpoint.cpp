// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mtsrnn/errors.hpp"

namespace mtsrnn {

using json = nlohmann::json;

namespace {

constexpr const char *kFormat = "mtsrnn-checkpoint";
constexpr int kVersion = 1;

json vector_json(const Vector &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from(const json &j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json split_json(const SplitSpec &s) {
  return {{"validation_fraction", s.validation_fraction},
          {"train_fraction", s.train_fraction},
          {"train_fraction_of", s.basis == TrainFractionBasis::Remainder
                                    ? "remainder"
                                    : "total"},
          {"seed", s.seed}};
}

SplitSpec split_from(const json &j) {
  SplitSpec s;
  s.validation_fraction = j.at("validation_fraction").get<double>();
  s.train_fraction = j.at("train_fraction").get<double>();
  s.basis = j.at("train_fraction_of").get<std::string>() == "total"
                ? TrainFractionBasis::Total
                : TrainFractionBasis::Remainder;
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

} // namespace

std::string checkpoint_to_json(const Checkpoint &c) {
  json params = json::array();
  for (const auto &view : parameter_views(c.params)) {
    std::vector<double> row_major;
    row_major.reserve(view.values.size());
    for (Index r = 0; r < view.rows; ++r) {
      for (Index col = 0; col < view.cols; ++col) {
        row_major.push_back(view.values[static_cast<std::size_t>(col * view.rows + r)]);
      }
    }
    params.push_back({{"name", view.name},
                      {"rows", view.rows},
                      {"cols", view.cols},
                      {"data", std::move(row_major)}});
  }

  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["cell"] = to_string(kind_of(c.params));
  doc["input_size"] = input_size(c.params);
  doc["hidden_size"] = hidden_size(c.params);
  doc["t_len"] = c.t_len;
  doc["variables"] = c.variables;
  doc["imputation"] =
      c.imputation ? json(std::string(to_string(*c.imputation))) : json(nullptr);
  doc["standardized"] = c.standardized;
  doc["standardization"] = {{"mean", vector_json(c.standardization.mean)},
                            {"std", vector_json(c.standardization.stddev)}};
  doc["fallback_means"] = vector_json(c.fallback_means);
  if (const auto *g = std::get_if<GrudParams>(&c.params)) {
    doc["empirical_means"] = vector_json(g->empirical_means);
  }
  doc["split"] = split_json(c.split);
  doc["seeds"] = {{"init", c.init_seed}, {"train", c.train_seed}};
  doc["validation_f1"] = c.validation_f1;
  doc["best_epoch"] = c.best_epoch;
  doc["parameters"] = std::move(params);
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string &text) {
  try {
    const auto doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat ||
        doc.at("version").get<int>() != kVersion) {
      throw ValidationError("not a version-1 mtsrnn checkpoint");
    }
    Checkpoint c;
    const auto kind = parse_cell_kind(doc.at("cell").get<std::string>());
    const auto inputs = doc.at("input_size").get<Index>();
    const auto hidden = doc.at("hidden_size").get<Index>();
    Vector means = Vector::Zero(inputs);
    if (kind == CellKind::Grud) {
      means = vector_from(doc.at("empirical_means"));
    }
    c.params = init_params(kind, inputs, hidden, 0, means);
    auto views = parameter_views(c.params);
    const auto &stored = doc.at("parameters");
    if (stored.size() != views.size()) {
      throw ValidationError("checkpoint has " + std::to_string(stored.size()) +
                            " tensors, expected " + std::to_string(views.size()));
    }
    for (std::size_t k = 0; k < views.size(); ++k) {
      const auto &entry = stored[k];
      auto &view = views[k];
      const auto rows = entry.at("rows").get<Index>();
      const auto cols = entry.at("cols").get<Index>();
      const auto data = entry.at("data").get<std::vector<double>>();
      if (entry.at("name").get<std::string>() != view.name || rows != view.rows ||
          cols != view.cols || data.size() != view.values.size()) {
        throw ValidationError("checkpoint tensor " + std::to_string(k) +
                              " does not match " + std::string(view.name));
      }
      for (Index r = 0; r < rows; ++r) {
        for (Index col = 0; col < cols; ++col) {
          view.values[static_cast<std::size_t>(col * rows + r)] =
              data[static_cast<std::size_t>(r * cols + col)];
        }
      }
    }
    c.t_len = doc.at("t_len").get<Index>();
    c.variables = doc.at("variables").get<std::vector<std::string>>();
    if (!doc.at("imputation").is_null()) {
      c.imputation = parse_imputation_kind(doc.at("imputation").get<std::string>());
    }
    c.standardized = doc.at("standardized").get<bool>();
    c.standardization.mean = vector_from(doc.at("standardization").at("mean"));
    c.standardization.stddev = vector_from(doc.at("standardization").at("std"));
    c.fallback_means = vector_from(doc.at("fallback_means"));
    c.split = split_from(doc.at("split"));
    c.init_seed = doc.at("seeds").at("init").get<std::uint64_t>();
    c.train_seed = doc.at("seeds").at("train").get<std::uint64_t>();
    c.validation_f1 = doc.at("validation_f1").get<double>();
    c.best_epoch = doc.at("best_epoch").get<int>();
    return c;
  } catch (const json::exception &e) {
    throw ParseError(0, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &c) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write " + path.string());
  }
  out << checkpoint_to_json(c) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

} // namespace mtsrnn
