#ifndef NBSCREEN_CLI_HPP
#define NBSCREEN_CLI_HPP

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nbscreen/dataset.hpp"
#include "nbscreen/errors.hpp"
#include "nbscreen/hdrs.hpp"
#include "nbscreen/mca.hpp"
#include "nbscreen/metrics.hpp"
#include "nbscreen/naive_bayes.hpp"

namespace nbscreen::cli {

// Each subcommand is a thin adapter: read files, call one library
// operation, write the result. Exit codes: 0 ok, 1 domain error, 2 usage.

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

enum class OutputFormat { Table, Json };

struct RunConfig {
  std::string input, output, marginals, model, predictions, truth, confusion, responses, instrument;
  std::string out_train, out_test;
  double alpha = 1.0;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  std::size_t dims = 2;
  double ci_level = 0.95;
  bool proba = false;
  bool include_class = true;
  OutputFormat format = OutputFormat::Table;
  MissingPolicy missing = MissingPolicy::Error;
};

namespace detail {

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

inline Dataset read_dataset(const RunConfig& cfg) {
  auto in = open_in(cfg.input);
  return load_csv(in, {cfg.missing, "Class"});
}

inline void emit_report(std::ostream& out, const metrics::MetricsReport& r, OutputFormat format) {
  if (format == OutputFormat::Json)
    out << metrics::to_json(r).dump(2) << '\n';
  else
    metrics::print_table(out, r);
}

/// Prints each distinct warning once with its multiplicity.
inline void flush_warnings(std::ostream& err, const std::map<std::string, std::size_t>& warnings) {
  for (const auto& [text, count] : warnings) {
    err << "warning: " << text;
    if (count > 1) err << " (" << count << " rows)";
    err << '\n';
  }
}

/// CLI11 validator for an open interval.
inline CLI::Validator open_unit_interval() {
  return CLI::Validator(
      [](const std::string& s) -> std::string {
        const auto v = csv::parse_double(s);
        if (!v || !(*v > 0.0 && *v < 1.0)) return "value must lie strictly between 0 and 1";
        return {};
      },
      "(0,1)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  auto in = detail::open_in(cfg.marginals);
  const auto table = load_contingency_csv(in);
  const auto ds = synthesize(table, cfg.seed);
  auto f = detail::open_out(cfg.output);
  write_csv(f, ds);
  out << "wrote " << ds.size() << " rows to " << cfg.output << '\n';
  return kExitOk;
}

inline int cmd_split(const RunConfig& cfg, std::ostream& out) {
  const auto ds = detail::read_dataset(cfg);
  const auto parts = stratified_split(ds, cfg.train_fraction, cfg.seed);
  auto ft = detail::open_out(cfg.out_train);
  write_csv(ft, parts.train);
  auto fv = detail::open_out(cfg.out_test);
  write_csv(fv, parts.validation);
  out << "train " << parts.train.size() << " rows, validation " << parts.validation.size() << " rows\n";
  return kExitOk;
}

inline int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const auto ds = detail::read_dataset(cfg);
  const auto model = fit(ds, cfg.alpha);
  auto f = detail::open_out(cfg.model);
  f << save_model(model);
  out << "trained on " << model.total() << " rows, alpha " << csv::format_double(model.alpha()) << '\n';
  return kExitOk;
}

inline int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto model_in = detail::open_in(cfg.model);
  const auto model = load_model(model_in);
  auto in = detail::open_in(cfg.input);
  const auto table = csv::read_table(in);

  // Column -> model attribute; the class column, if present, is ignored.
  std::vector<std::optional<std::size_t>> column_attr(table.header.size());
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (csv::iequals(table.header[c], model.class_attribute())) continue;
    column_attr[c] = model.find_attribute(table.header[c]);
    if (!column_attr[c]) throw SchemaError("input column '" + table.header[c] + "' is not a model attribute");
  }

  auto f = detail::open_out(cfg.output);
  f << "predicted";
  if (cfg.proba)
    for (const auto& label : model.class_labels()) f << ",p_" << label;
  f << '\n';

  std::map<std::string, std::size_t> warnings;
  for (const auto& row : table.rows) {
    EncodedEvidence evidence(model.attributes().size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!column_attr[c] || is_missing(row[c])) continue;
      const auto& attr = model.attributes()[*column_attr[c]];
      evidence[*column_attr[c]] = attr.find(row[c]).value_or(attr.vocabulary.size());
    }
    const auto pred = predict(model, evidence);
    for (const auto& w : pred.posterior.warnings) ++warnings[w];
    f << model.class_labels()[pred.klass];
    if (cfg.proba)
      for (double p : pred.posterior.probabilities) f << ',' << csv::format_double(p);
    f << '\n';
  }
  detail::flush_warnings(err, warnings);
  out << "predicted " << table.rows.size() << " rows\n";
  return kExitOk;
}

inline std::vector<std::size_t> read_level_column(const std::string& path, std::string_view column) {
  auto in = detail::open_in(path);
  const auto table = csv::read_table(in);
  const auto col = csv::find_column(table.header, column);
  if (!col) throw FormatError("'" + path + "' has no '" + std::string(column) + "' column");
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto level = parse_level(table.rows[r][*col]);
    if (!level)
      throw ValueError(path + " line " + std::to_string(table.line_numbers[r]) + ": unknown class label '" +
                       table.rows[r][*col] + "'");
    out.push_back(slot(*level));
  }
  return out;
}

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const auto predicted = read_level_column(cfg.predictions, "predicted");
  const auto truth = read_level_column(cfg.truth, "Class");
  const auto cm = metrics::confusion(truth, predicted, level_labels());
  detail::emit_report(out, metrics::report(cm, cfg.ci_level), cfg.format);
  return kExitOk;
}

inline int cmd_metrics(const RunConfig& cfg, std::ostream& out) {
  auto in = detail::open_in(cfg.confusion);
  const auto cm = metrics::load_confusion_csv(in);
  detail::emit_report(out, metrics::report(cm, cfg.ci_level), cfg.format);
  return kExitOk;
}

inline int cmd_mca(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ds = detail::read_dataset(cfg);
  const auto res = mca::mca_fit(ds, cfg.dims, cfg.include_class);
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';
  auto f = detail::open_out(cfg.output);
  mca::export_coordinates(f, res);
  out << "Q = " << res.q << ", J = " << res.j << ", total inertia " << csv::format_double(res.total_inertia()) << '\n';
  for (std::size_t d = 0; d < res.principal_inertias.size(); ++d)
    out << "dim" << (d + 1) << ' ' << csv::format_double(res.principal_inertias[d]) << '\n';
  return kExitOk;
}

inline int cmd_hdrs(const RunConfig& cfg, std::ostream& out) {
  const auto instrument = [&] {
    if (cfg.instrument.empty()) return hdrs::default_instrument();
    auto in = detail::open_in(cfg.instrument);
    return hdrs::load_instrument(in);
  }();
  auto in = detail::open_in(cfg.responses);
  const auto responses = hdrs::load_responses(in);
  const auto scores = hdrs::score_batch(responses.responses, instrument);
  auto f = detail::open_out(cfg.output);
  hdrs::write_scores(f, responses, scores);
  out << "scored " << scores.size() << " responses\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Entry point shared by the executable and the tests. args excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Categorical Naive Bayes depression-screening toolkit", "nbscreen"};
  app.require_subcommand(1);
  RunConfig cfg;

  const std::map<std::string, OutputFormat> formats{{"table", OutputFormat::Table}, {"json", OutputFormat::Json}};
  const std::map<std::string, MissingPolicy> policies{
      {"error", MissingPolicy::Error}, {"drop", MissingPolicy::Drop}, {"as-category", MissingPolicy::AsCategory}};
  auto add_missing = [&](CLI::App* sub) {
    sub->add_option("--missing", cfg.missing, "Missing-value policy: error, drop or as-category")
        ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case));
  };

  auto* synth = app.add_subcommand("synth", "Expand a contingency table into a row-level dataset");
  synth->add_option("--marginals", cfg.marginals, "attribute,value,class,count CSV")->required();
  synth->add_option("--out", cfg.output, "Output dataset CSV")->required();
  synth->add_option("--seed", cfg.seed, "Shuffle seed")->required();

  auto* split = app.add_subcommand("split", "Stratified train/validation split");
  split->add_option("--input", cfg.input, "Dataset CSV")->required();
  split->add_option("--train-frac", cfg.train_fraction, "Training fraction in (0,1)")
      ->required()
      ->check(detail::open_unit_interval());
  split->add_option("--seed", cfg.seed, "Shuffle seed")->required();
  split->add_option("--out-train", cfg.out_train, "Training CSV")->required();
  split->add_option("--out-test", cfg.out_test, "Validation CSV")->required();
  add_missing(split);

  auto* train = app.add_subcommand("train", "Fit a Naive Bayes model");
  train->add_option("--input", cfg.input, "Training dataset CSV")->required();
  train->add_option("--alpha", cfg.alpha, "Smoothing pseudo-count (0 = unsmoothed)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  train->add_option("--model", cfg.model, "Output model JSON")->required();
  add_missing(train);

  auto* pred = app.add_subcommand("predict", "Classify rows with a saved model");
  pred->add_option("--model", cfg.model, "Model JSON")->required();
  pred->add_option("--input", cfg.input, "Rows to classify (CSV)")->required();
  pred->add_option("--out", cfg.output, "Predictions CSV")->required();
  pred->add_flag("--proba", cfg.proba, "Also write per-class posterior probabilities");

  auto* eval = app.add_subcommand("evaluate", "Score predictions against the true classes");
  eval->add_option("--predictions", cfg.predictions, "Predictions CSV")->required();
  eval->add_option("--truth", cfg.truth, "Dataset CSV with the class column")->required();

  auto* metr = app.add_subcommand("metrics", "Metrics from a confusion-matrix CSV");
  metr->add_option("--confusion", cfg.confusion, "Confusion-matrix CSV")->required();

  for (auto* sub : {eval, metr}) {
    sub->add_option("--ci-level", cfg.ci_level, "Confidence level of the accuracy interval")
        ->capture_default_str()
        ->check(detail::open_unit_interval());
    sub->add_option("--format", cfg.format, "table or json")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  }

  auto* mca_cmd = app.add_subcommand("mca", "Multiple correspondence analysis");
  mca_cmd->add_option("--input", cfg.input, "Dataset CSV")->required();
  mca_cmd->add_option("--dims", cfg.dims, "Output dimensions")
      ->capture_default_str()->check(CLI::PositiveNumber);
  mca_cmd->add_flag("--include-class,!--no-include-class", cfg.include_class,
                    "Treat the class as an active variable (default on)");
  mca_cmd->add_option("--out", cfg.output, "Coordinate CSV")->required();
  add_missing(mca_cmd);

  auto* hdrs_cmd = app.add_subcommand("hdrs-score", "Score HDRS-17 questionnaires");
  hdrs_cmd->add_option("--responses", cfg.responses, "Response CSV (item1..item17[,id])")->required();
  hdrs_cmd->add_option("--instrument", cfg.instrument, "Instrument JSON (default: standard HDRS-17)");
  hdrs_cmd->add_option("--out", cfg.output, "Scores CSV")->required();

  std::vector<const char*> argv{"nbscreen"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(cfg, out);
    if (*split) return cmd_split(cfg, out);
    if (*train) return cmd_train(cfg, out);
    if (*pred) return cmd_predict(cfg, out, err);
    if (*eval) return cmd_evaluate(cfg, out);
    if (*metr) return cmd_metrics(cfg, out);
    if (*mca_cmd) return cmd_mca(cfg, out, err);
    if (*hdrs_cmd) return cmd_hdrs(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace nbscreen::cli

#endif  // NBSCREEN_CLI_HPP
