// SPDX-License-Identifier: Apache-2.0
#include "mtsrnn/params.hpp"

#include <cmath>

#include "mtsrnn/errors.hpp"
#include "random.hpp"

namespace mtsrnn {

std::string_view to_string(CellKind kind) {
  switch (kind) {
  case CellKind::Ernn:
    return "ernn";
  case CellKind::Gru:
    return "gru";
  case CellKind::Grud:
    return "grud";
  }
  return "?";
}

CellKind parse_cell_kind(std::string_view text) {
  if (text == "ernn") {
    return CellKind::Ernn;
  }
  if (text == "gru") {
    return CellKind::Gru;
  }
  if (text == "grud") {
    return CellKind::Grud;
  }
  throw ConfigError("unknown cell '" + std::string(text) +
                    "' (expected ernn, gru or grud)");
}

CellKind kind_of(const CellParams &params) {
  return static_cast<CellKind>(params.index());
}

const ReadoutParams &readout_of(const CellParams &params) {
  return std::visit(
      [](const auto &p) -> const ReadoutParams & {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GrudParams>) {
          return p.gru.readout;
        } else {
          return p.readout;
        }
      },
      params);
}

Index hidden_size(const CellParams &params) {
  return readout_of(params).weights.cols();
}

Index input_size(const CellParams &params) {
  return std::visit(
      [](const auto &p) -> Index {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ErnnParams>) {
          return p.input_weights.cols();
        } else if constexpr (std::is_same_v<P, GruParams>) {
          return p.reset_input.cols();
        } else {
          return p.gru.reset_input.cols();
        }
      },
      params);
}

std::vector<ParameterView> parameter_views(CellParams &params) {
  std::vector<ParameterView> views;
  std::visit(
      [&](auto &p) {
        for_each_parameter(p, [&](std::string_view name, auto &tensor, bool w) {
          views.push_back({name,
                           std::span<double>(tensor.data(),
                                             static_cast<std::size_t>(tensor.size())),
                           tensor.rows(), tensor.cols(), w});
        });
      },
      params);
  return views;
}

std::vector<ConstParameterView> parameter_views(const CellParams &params) {
  std::vector<ConstParameterView> views;
  std::visit(
      [&](const auto &p) {
        for_each_parameter(p, [&](std::string_view name, const auto &tensor,
                                  bool w) {
          views.push_back(
              {name,
               std::span<const double>(tensor.data(),
                                       static_cast<std::size_t>(tensor.size())),
               tensor.rows(), tensor.cols(), w});
        });
      },
      params);
  return views;
}

CellParams zeros_like(const CellParams &params) {
  CellParams out = params;
  std::visit(
      [](auto &p) {
        for_each_parameter(p, [](std::string_view, auto &tensor, bool) {
          tensor.setZero();
        });
      },
      out);
  return out;
}

std::size_t parameter_count(const CellParams &params) {
  std::size_t n = 0;
  for (const auto &v : parameter_views(params)) {
    n += v.values.size();
  }
  return n;
}

namespace {

struct Initializer {
  std::mt19937_64 rng;

  Matrix glorot(Index rows, Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        m(i, j) = (2.0 * detail::uniform_unit(rng) - 1.0) * limit;
      }
    }
    return m;
  }

  Matrix nonnegative(Index rows, Index cols, double scale) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        m(i, j) = detail::uniform_unit(rng) * scale;
      }
    }
    return m;
  }

  ReadoutParams readout(Index hidden) {
    return {glorot(2, hidden), Vector::Zero(2)};
  }

  GruParams gru(Index inputs, Index hidden) {
    GruParams g;
    g.reset_recurrent = glorot(hidden, hidden);
    g.reset_input = glorot(hidden, inputs);
    g.reset_bias = Vector::Zero(hidden);
    g.candidate_recurrent = glorot(hidden, hidden);
    g.candidate_input = glorot(hidden, inputs);
    g.candidate_bias = Vector::Zero(hidden);
    g.update_recurrent = glorot(hidden, hidden);
    g.update_input = glorot(hidden, inputs);
    g.update_bias = Vector::Zero(hidden);
    g.readout = readout(hidden);
    return g;
  }
};

} // namespace

CellParams init_params(CellKind kind, Index inputs, Index hidden,
                       std::uint64_t seed, const Vector &empirical_means,
                       const InitOptions &options) {
  if (inputs <= 0 || hidden <= 0) {
    throw ConfigError("input and hidden sizes must be positive");
  }
  Initializer init{detail::make_rng(seed, 0x1417)};
  switch (kind) {
  case CellKind::Ernn: {
    ErnnParams p;
    p.input_weights = init.glorot(hidden, inputs);
    p.recurrent_weights = init.glorot(hidden, hidden);
    p.bias = Vector::Zero(hidden);
    p.readout = init.readout(hidden);
    return p;
  }
  case CellKind::Gru:
    return init.gru(inputs, hidden);
  case CellKind::Grud: {
    if (empirical_means.size() != inputs) {
      throw ConfigError("GRU-D needs one empirical mean per input variable");
    }
    GrudParams p;
    p.gru = init.gru(inputs, hidden);
    p.reset_mask = init.glorot(hidden, inputs);
    p.candidate_mask = init.glorot(hidden, inputs);
    p.update_mask = init.glorot(hidden, inputs);
    p.input_decay_weights = init.nonnegative(inputs, 1, options.decay_init_scale);
    p.input_decay_bias = Vector::Zero(inputs);
    p.state_decay_weights =
        init.nonnegative(hidden, inputs, options.decay_init_scale);
    p.state_decay_bias = Vector::Zero(hidden);
    p.empirical_means = empirical_means;
    return p;
  }
  }
  throw ConfigError("unknown cell kind");
}

} // namespace mtsrnn
