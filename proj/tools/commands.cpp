// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtsrnn/checkpoint.hpp"
#include "mtsrnn/dataset.hpp"
#include "mtsrnn/errors.hpp"
#include "mtsrnn/evaluation.hpp"
#include "mtsrnn/imputation.hpp"
#include "mtsrnn/synthgen.hpp"
#include "mtsrnn/training.hpp"

namespace mtsrnn::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Options

struct GenerateOptions {
  SynthConfig synth;
  std::string out;
};

struct TrainOptions {
  std::string data;
  std::string cell;
  std::string impute;
  int restarts = 1;
  std::string out;
  std::uint64_t seed = 0;
  TrainConfig train;
  SplitSpec split;
  std::string train_fraction_of = "remainder";
  std::string regularizer = "squares";
  bool no_standardize = false;
  int jobs = 1;
};

struct EvaluateOptions {
  std::vector<std::string> checkpoints;
  std::string data;
  std::string split = "test";
  std::string out;
};

struct ImputeOptions {
  std::string method;
  std::string data;
  std::string out;
  bool standardize = false;
};

struct ProjectOptions {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string out;
};

// ---------------------------------------------------------------------------
// Small helpers

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot write " + path.string());
  }
  f << text;
}

json read_json_file(const fs::path &path) {
  std::ifstream f(path);
  if (!f) {
    throw ValidationError("cannot open config " + path.string());
  }
  try {
    return json::parse(f);
  } catch (const json::exception &e) {
    throw ParseError(0, e.what(), path.string());
  }
}

/// Appends `--key value` for every config-file entry not given on the
/// command line, so explicit flags always win.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    }
  }
  if (!config_path) {
    return args;
  }
  const auto doc = read_json_file(*config_path);
  if (!doc.is_object()) {
    throw ConfigError("config file must hold a JSON object");
  }
  const std::vector<std::string> given(args.begin(), args.end());
  for (const auto &[key, value] : doc.items()) {
    const std::string flag = "--" + key;
    const bool present = std::any_of(given.begin(), given.end(), [&](const auto &a) {
      return a == flag || a.starts_with(flag + "=");
    });
    if (present) {
      continue;
    }
    if (value.is_boolean()) {
      if (value.get<bool>()) {
        args.push_back(flag);
      }
    } else if (value.is_array()) {
      for (const auto &item : value) {
        args.push_back(flag);
        args.push_back(item.is_string() ? item.get<std::string>() : item.dump());
      }
    } else {
      args.push_back(flag);
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return args;
}

/// Scalar flag text as a JSON number when it parses as one.
json typed(const std::string &text) {
  if (text.empty()) {
    return text;
  }
  const auto parsed = json::parse(text, nullptr, false);
  return parsed.is_number() ? parsed : json(text);
}

/// Every long option of a subcommand with its effective value. The result
/// can be fed back through --config.
json resolved_config(const CLI::App &sub) {
  json doc = json::object();
  for (const auto *opt : sub.get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") {
      continue;
    }
    const auto &results = opt->results();
    if (opt->get_expected_max() == 0) {
      doc[name] = opt->count() > 0;
    } else if (results.empty()) {
      doc[name] = typed(opt->get_default_str());
    } else if (opt->get_expected_max() > 1 || results.size() > 1) {
      doc[name] = results;
    } else {
      doc[name] = typed(results.front());
    }
  }
  return doc;
}

void echo_config(const fs::path &dir, const json &config) {
  write_text(dir / "config.json", config.dump(2) + "\n");
}

std::string model_label(CellKind kind, std::optional<ImputationKind> imputation) {
  std::string label = kind == CellKind::Ernn  ? "ERNN"
                      : kind == CellKind::Gru ? "GRU"
                                              : "GRUD";
  if (imputation) {
    label += *imputation == ImputationKind::Zero                      ? "-z"
             : *imputation == ImputationKind::LastValueCarriedForward ? "-l"
                                                                      : "-m";
  }
  return label;
}

void check_model_config(CellKind kind, std::optional<ImputationKind> imputation) {
  if (kind == CellKind::Grud && imputation) {
    throw ConfigError("--impute cannot be combined with --cell grud");
  }
  if (kind != CellKind::Grud && !imputation) {
    throw ConfigError("--cell " + std::string(to_string(kind)) +
                      " requires --impute {zero|locf|mean}");
  }
}

std::string history_csv(const std::vector<EpochRecord> &history) {
  std::string text = "epoch,train_loss,val_f1,val_auc\n";
  for (const auto &r : history) {
    text += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
            format_double(r.val_f1) + "," + format_double(r.val_auc) + "\n";
  }
  return text;
}

/// Writes one table row; columns are padded by code points so "±" lines up.
void print_row(std::ostream &out, const std::vector<std::string> &cells) {
  constexpr std::size_t kWidth = 16;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << cells[i];
    if (i + 1 == cells.size()) {
      break;
    }
    const auto glyphs = static_cast<std::size_t>(std::count_if(
        cells[i].begin(), cells[i].end(), [](char c) { return (c & 0xC0) != 0x80; }));
    out << std::string(glyphs < kWidth ? kWidth - glyphs : 1, ' ');
  }
  out << "\n";
}

std::string two_decimals(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

json confusion_json(const Confusion &c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

json summary_json(const MetricSummary &s) {
  return {{"mean", s.mean}, {"standard_error", s.standard_error}};
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const GenerateOptions &o, std::ostream &out) {
  const auto set = generate(o.synth);
  const fs::path path(o.out);
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  save_episodes(path, set);
  const auto summary = describe(set);
  out << "wrote " << set.size() << " series (" << summary.class_counts[1]
      << " positive, " << summary.class_counts[0] << " negative), observed fraction "
      << std::fixed << std::setprecision(4) << summary.observed_fraction << " to "
      << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// train

struct RestartOutcome {
  double val_f1 = 0.0;
  double val_auc = 0.0;
  double test_f1 = 0.0;
  double test_auc = 0.0;
  int best_epoch = 0;
};

int cmd_train(TrainOptions o, const CLI::App &sub, std::ostream &out) {
  const CellKind kind = parse_cell_kind(o.cell);
  std::optional<ImputationKind> imputation;
  if (!o.impute.empty()) {
    imputation = parse_imputation_kind(o.impute);
  }
  check_model_config(kind, imputation);
  if (o.restarts < 1) {
    throw ConfigError("--restarts must be >= 1");
  }
  o.split.basis = o.train_fraction_of == "total" ? TrainFractionBasis::Total
                                                 : TrainFractionBasis::Remainder;
  o.train.regularizer =
      o.regularizer == "norm" ? Regularizer::Norm : Regularizer::SumOfSquares;

  const EpisodeSet set = load_episodes(o.data);
  const fs::path root(o.out);
  fs::create_directories(root);
  const json config = resolved_config(sub);
  echo_config(root, config);

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(o.restarts));
  auto run_restart = [&](int k) {
    const auto seed = o.seed + static_cast<std::uint64_t>(k);
    SplitSpec spec = o.split;
    spec.seed = seed;
    Splits parts = split(set, spec);
    if (!o.no_standardize) {
      parts = standardize(parts);
    }
    TrainConfig tc = o.train;
    tc.seed = seed;
    const auto result = train(tc, kind, parts.train, parts.validation, imputation);

    const Vector &fallback = parts.train.empirical_means;
    const auto val_report = evaluate(
        result.best_params, prepare_inputs(parts.validation, kind, imputation, fallback));
    const auto test_report = evaluate(
        result.best_params, prepare_inputs(parts.test, kind, imputation, fallback));

    Checkpoint c;
    c.params = result.best_params;
    c.t_len = set.steps();
    c.variables = set.variable_names;
    c.imputation = imputation;
    c.standardized = !o.no_standardize;
    c.standardization = parts.train.standardization;
    c.fallback_means = fallback;
    c.split = spec;
    c.init_seed = seed;
    c.train_seed = seed;
    c.validation_f1 = result.best_val_f1;
    c.best_epoch = result.best_epoch;

    const fs::path dir = root / ("restart_" + std::to_string(k));
    fs::create_directories(dir);
    echo_config(dir, config);
    save_checkpoint(dir / "checkpoint.json", c);
    write_text(dir / "history.csv", history_csv(result.history));
    const json metrics = {{"best_epoch", result.best_epoch},
                          {"validation", {{"f1", val_report.f1},
                                          {"auc", val_report.auc},
                                          {"confusion", confusion_json(val_report.confusion)}}},
                          {"test", {{"f1", test_report.f1},
                                    {"auc", test_report.auc},
                                    {"confusion", confusion_json(test_report.confusion)}}}};
    write_text(dir / "metrics.json", metrics.dump(2) + "\n");

    outcomes[static_cast<std::size_t>(k)] = {val_report.f1, val_report.auc,
                                             test_report.f1, test_report.auc,
                                             result.best_epoch};
  };

  // Restarts write to separate directories, so they can run concurrently.
  const int jobs = std::clamp(o.jobs, 1, o.restarts);
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(o.restarts));
  {
    std::vector<std::jthread> workers;
    std::atomic<int> next{0};
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (int k = next++; k < o.restarts; k = next++) {
          try {
            run_restart(k);
          } catch (...) {
            failures[static_cast<std::size_t>(k)] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto &f : failures) {
    if (f) {
      std::rethrow_exception(f);
    }
  }

  json summary;
  summary["model"] = model_label(kind, imputation);
  summary["restarts"] = json::array();
  std::vector<double> val_auc, val_f1, test_auc, test_f1;
  for (const auto &r : outcomes) {
    summary["restarts"].push_back({{"val_f1", r.val_f1},
                                   {"val_auc", r.val_auc},
                                   {"test_f1", r.test_f1},
                                   {"test_auc", r.test_auc},
                                   {"best_epoch", r.best_epoch}});
    val_auc.push_back(r.val_auc);
    val_f1.push_back(r.val_f1);
    test_auc.push_back(r.test_auc);
    test_f1.push_back(r.test_f1);
  }

  auto cell = [&](const std::vector<double> &v) {
    return v.size() < 2 ? two_decimals(v.front()) : format_mean_se(summarize(v));
  };
  if (outcomes.size() >= 2) {
    summary["summary"] = {{"val_auc", summary_json(summarize(val_auc))},
                          {"val_f1", summary_json(summarize(val_f1))},
                          {"test_auc", summary_json(summarize(test_auc))},
                          {"test_f1", summary_json(summarize(test_f1))}};
  }
  write_text(root / "summary.json", summary.dump(2) + "\n");

  print_row(out, {"Model", "AUC (val)", "F1 (val)", "AUC (test)", "F1 (test)"});
  print_row(out, {model_label(kind, imputation), cell(val_auc), cell(val_f1),
                  cell(test_auc), cell(test_f1)});
  return kSuccess;
}

// ---------------------------------------------------------------------------
// evaluate / project

EpisodeSet select_part(const EpisodeSet &set, const Checkpoint &c,
                       const std::string &part) {
  if (set.variables() != input_size(c.params) || set.steps() != c.t_len) {
    throw ValidationError("checkpoint expects T x V = " + std::to_string(c.t_len) +
                          " x " + std::to_string(input_size(c.params)) +
                          ", dataset has " + std::to_string(set.steps()) + " x " +
                          std::to_string(set.variables()));
  }
  EpisodeSet chosen;
  if (part == "all") {
    chosen = set;
  } else {
    auto parts = split(set, c.split);
    chosen = part == "train"        ? std::move(parts.train)
             : part == "validation" ? std::move(parts.validation)
                                    : std::move(parts.test);
  }
  if (c.standardized) {
    chosen = standardize(chosen, c.standardization);
  }
  chosen.empirical_means = c.fallback_means;
  return prepare_inputs(chosen, kind_of(c.params), c.imputation, c.fallback_means);
}

std::string xy_label_csv(const Matrix &xy, const std::vector<std::string> &labels) {
  std::string text = "x,y,label\n";
  for (Index i = 0; i < xy.rows(); ++i) {
    text += format_double(xy(i, 0)) + "," + format_double(xy(i, 1)) + "," +
            labels[static_cast<std::size_t>(i)] + "\n";
  }
  return text;
}

std::string pca_csv(const StateProjection &p) {
  std::vector<std::string> labels;
  for (auto y : p.labels) {
    labels.push_back(std::to_string(y));
  }
  return xy_label_csv(p.coordinates, labels);
}

std::string roc_csv(const std::vector<RocPoint> &roc, const std::string &model) {
  Matrix xy(static_cast<Index>(roc.size()), 2);
  for (std::size_t i = 0; i < roc.size(); ++i) {
    xy(static_cast<Index>(i), 0) = roc[i].fpr;
    xy(static_cast<Index>(i), 1) = roc[i].tpr;
  }
  return xy_label_csv(xy, std::vector<std::string>(roc.size(), model));
}

int cmd_evaluate(const EvaluateOptions &o, const CLI::App &sub, std::ostream &out) {
  const EpisodeSet set = load_episodes(o.data);
  const fs::path root(o.out);
  fs::create_directories(root);
  echo_config(root, resolved_config(sub));

  std::vector<RestartMetrics> metrics;
  std::string label;
  json restarts = json::array();
  for (std::size_t k = 0; k < o.checkpoints.size(); ++k) {
    const auto c = load_checkpoint(o.checkpoints[k]);
    const auto inputs = select_part(set, c, o.split);
    const auto report = evaluate(c.params, inputs);
    label = model_label(kind_of(c.params), c.imputation);

    json doc;
    doc["checkpoint"] = o.checkpoints[k];
    doc["model"] = label;
    doc["split"] = o.split;
    doc["n"] = inputs.size();
    doc["f1"] = report.f1;
    doc["auc"] = report.auc;
    doc["confusion"] = confusion_json(report.confusion);
    json roc = json::array();
    for (const auto &p : report.roc_points) {
      roc.push_back({p.fpr, p.tpr});
    }
    doc["roc_points"] = std::move(roc);

    const fs::path dir =
        o.checkpoints.size() == 1 ? root : root / ("restart_" + std::to_string(k));
    fs::create_directories(dir);
    if (report.final_states.rows() >= 2 && report.final_states.cols() >= 3) {
      const auto projection =
          pca_last_states(report.final_states.transpose(), report.labels);
      doc["pca"] = {{"explained_variance",
                     {projection.explained_variance[0],
                      projection.explained_variance[1]}}};
      write_text(dir / "pca.csv", pca_csv(projection));
    }
    write_text(dir / "report.json", doc.dump(2) + "\n");
    write_text(dir / "roc.csv", roc_csv(report.roc_points, label));
    metrics.push_back({report.f1, report.auc});
    restarts.push_back({{"checkpoint", o.checkpoints[k]},
                        {"f1", report.f1},
                        {"auc", report.auc}});
  }

  print_row(out, {"Model", "AUC (" + o.split + ")", "F1 (" + o.split + ")"});
  if (metrics.size() >= 2) {
    const auto summary = aggregate_restarts(metrics);
    json doc = {{"model", label},
                {"split", o.split},
                {"restarts", restarts},
                {"summary", {{"f1", summary_json(summary.f1)},
                             {"auc", summary_json(summary.auc)}}}};
    write_text(root / "summary.json", doc.dump(2) + "\n");
    print_row(out, {label, format_mean_se(summary.auc), format_mean_se(summary.f1)});
  } else {
    print_row(out, {label, two_decimals(metrics.front().auc),
                    two_decimals(metrics.front().f1)});
  }
  return kSuccess;
}

int cmd_project(const ProjectOptions &o, std::ostream &out) {
  const auto c = load_checkpoint(o.checkpoint);
  const auto inputs = select_part(load_episodes(o.data), c, o.split);
  const auto report = evaluate(c.params, inputs);
  const auto projection = pca_last_states(report.final_states.transpose(), report.labels);
  const fs::path path(o.out);
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  write_text(path, pca_csv(projection));
  out << "explained variance: " << format_double(projection.explained_variance[0])
      << " " << format_double(projection.explained_variance[1]) << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// impute

int cmd_impute(const ImputeOptions &o, std::ostream &out) {
  const auto kind = parse_imputation_kind(o.method);
  EpisodeSet set = load_episodes(o.data);
  if (o.standardize) {
    set = standardize(set, set.standardization);
  }
  const auto imputed = impute(set, ImputationMethod{kind, set.empirical_means});
  const fs::path path(o.out);
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  save_episodes(path, imputed);
  out << "imputed " << imputed.size() << " series with " << to_string(kind) << "\n";
  return kSuccess;
}

} // namespace

int run(const std::vector<std::string> &raw_args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Recurrent classifiers for multivariate time series with missing values",
               "mtsrnn"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenerateOptions gen;
  auto *g = app.add_subcommand("generate", "Write a synthetic dataset");
  g->add_option("--out", gen.out, "Output JSON-lines file")->required();
  g->add_option("--seed", gen.synth.seed, "Random seed");
  g->add_option("--n", gen.synth.n_series, "Number of series");
  g->add_option("--t-len", gen.synth.t_len, "Steps per series");
  g->add_option("--vars", gen.synth.n_vars, "Variables per step");
  g->add_option("--class-balance", gen.synth.class_balance, "Fraction of positives");
  g->add_option("--missing-rate", gen.synth.base_missing_rate, "Base missing rate");
  g->add_option("--informative-boost", gen.synth.informative_missing_boost,
                "Extra missing rate on informative variables for positives");
  g->add_option("--signal-shift", gen.synth.signal_shift, "Post-onset shift for positives");
  g->add_option("--onset-day", gen.synth.onset_day, "First shifted step");
  g->add_option("--noise-std", gen.synth.noise_std, "AR(1) noise standard deviation");
  g->add_option("--ar", gen.synth.ar_coefficient, "AR(1) coefficient");
  g->add_option("--offset-std", gen.synth.series_offset_std, "Per-series level offset std");
  g->add_option("--signal-vars", gen.synth.signal_variables, "Number of shifted variables");
  g->add_option("--informative-vars", gen.synth.informative_variables,
                "Number of variables with label-dependent gaps");
  g->add_option("--config", "JSON file with default flag values");

  TrainOptions tr;
  auto *t = app.add_subcommand("train", "Train one model configuration");
  t->add_option("data,--data", tr.data, "Dataset JSON-lines file")->required();
  t->add_option("--cell", tr.cell, "ernn | gru | grud")->required();
  t->add_option("--impute", tr.impute, "zero | locf | mean (ERNN and GRU only)");
  t->add_option("--restarts", tr.restarts, "Independent split + initialization runs");
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--seed", tr.seed, "Base seed; restart k uses seed + k");
  t->add_option("--epochs", tr.train.epochs, "Training epochs");
  t->add_option("--hidden", tr.train.hidden_size, "Hidden units");
  t->add_option("--dropout", tr.train.dropout_rate, "Dropout rate on the last state");
  t->add_option("--lambda", tr.train.lambda, "L2 strength");
  t->add_option("--regularizer", tr.regularizer, "squares | norm")
      ->check(CLI::IsMember({"squares", "norm"}));
  t->add_option("--batch", tr.train.batch_size, "Mini-batch size");
  t->add_option("--lr", tr.train.adam.learning_rate, "Adam learning rate");
  t->add_option("--val-fraction", tr.split.validation_fraction, "Validation fraction");
  t->add_option("--train-fraction", tr.split.train_fraction, "Train fraction");
  t->add_option("--train-fraction-of", tr.train_fraction_of, "remainder | total")
      ->check(CLI::IsMember({"remainder", "total"}));
  t->add_flag("--no-standardize", tr.no_standardize, "Skip z-scoring of inputs");
  t->add_option("--jobs", tr.jobs, "Restarts run concurrently");
  t->add_option("--config", "JSON file with default flag values");

  EvaluateOptions ev;
  auto *e = app.add_subcommand("evaluate", "Score checkpoints on a dataset split");
  e->add_option("--checkpoint", ev.checkpoints, "Checkpoint file(s)")->required();
  e->add_option("data,--data", ev.data, "Dataset JSON-lines file")->required();
  e->add_option("--split", ev.split, "train | validation | test | all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}));
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--seed", "Unused; evaluation is deterministic");
  e->add_option("--config", "JSON file with default flag values");

  ImputeOptions im;
  auto *i = app.add_subcommand("impute", "Fill missing entries of a dataset");
  i->add_option("--method", im.method, "zero | locf | mean")->required();
  i->add_option("data,--data", im.data, "Dataset JSON-lines file")->required();
  i->add_option("--out", im.out, "Output JSON-lines file")->required();
  i->add_flag("--standardize", im.standardize, "Z-score with the file's own stats first");
  i->add_option("--seed", "Unused; imputation is deterministic");
  i->add_option("--config", "JSON file with default flag values");

  ProjectOptions pr;
  auto *p = app.add_subcommand("project", "PCA of a model's last hidden states");
  p->add_option("--checkpoint", pr.checkpoint, "Checkpoint file")->required();
  p->add_option("data,--data", pr.data, "Dataset JSON-lines file")->required();
  p->add_option("--split", pr.split, "train | validation | test | all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}));
  p->add_option("--out", pr.out, "Output CSV (x, y, label)")->required();
  p->add_option("--seed", "Unused; projection is deterministic");
  p->add_option("--config", "JSON file with default flag values");

  try {
    std::vector<std::string> args;
    try {
      args = merge_config_file(raw_args);
    } catch (const Error &ex) {
      err << "error: " << ex.what() << "\n";
      return dynamic_cast<const ConfigError *>(&ex) ? kUsage : kDataError;
    }
    std::vector<const char *> argv{"mtsrnn"};
    for (const auto &a : args) {
      argv.push_back(a.c_str());
    }
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (g->parsed()) {
      return cmd_generate(gen, out);
    }
    if (t->parsed()) {
      return cmd_train(tr, *t, out);
    }
    if (e->parsed()) {
      return cmd_evaluate(ev, *e, out);
    }
    if (i->parsed()) {
      return cmd_impute(im, out);
    }
    if (p->parsed()) {
      return cmd_project(pr, out);
    }
  } catch (const ConfigError &ex) {
    err << "configuration error: " << ex.what() << "\n";
    return kUsage;
  } catch (const NumericError &ex) {
    err << "numeric error: " << ex.what() << "\n";
    return kNumericError;
  } catch (const Error &ex) {
    err << "data error: " << ex.what() << "\n";
    return kDataError;
  } catch (const std::exception &ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

} // namespace mtsrnn::cli
