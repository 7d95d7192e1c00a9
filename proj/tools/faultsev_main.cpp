// faultsev command line: synth, ingest, train, detect, severity, plot, run.
//
// Every subcommand reads the same configuration: a preset, an optional JSON
// file, then `--key value` overrides (dotted keys for nested settings).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "faultsev/checkpoint.hpp"
#include "faultsev/config.hpp"
#include "faultsev/csv.hpp"
#include "faultsev/detection.hpp"
#include "faultsev/error.hpp"
#include "faultsev/ingest.hpp"
#include "faultsev/pipeline.hpp"
#include "faultsev/plot.hpp"
#include "faultsev/severity.hpp"

namespace fs = std::filesystem;
using namespace faultsev;

namespace {

struct CommonArgs {
  std::string config_file;
  std::string preset;
};

std::vector<ConfigOverride> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<ConfigOverride> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) {
      throw ConfigError("unexpected argument '" + tok + "' (overrides are --key value)");
    }
    const std::string body = tok.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) throw ConfigError("override --" + body + " is missing a value");
    out.emplace_back(body, extras[++i]);
  }
  return out;
}

RunConfig load(const CommonArgs& args, const std::vector<std::string>& extras) {
  std::optional<fs::path> file;
  if (!args.config_file.empty()) file = args.config_file;
  std::optional<std::string> preset;
  if (!args.preset.empty()) preset = args.preset;
  return resolve_config(file, preset, parse_overrides(extras));
}

void report(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_synth(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.input.kind = SourceKind::synthetic;
  const ArtifactPaths paths{cfg.output_dir};
  AcquiredData data;
  run_stage("acquisition", [&] {
    fs::create_directories(paths.dir);
    data = acquire(cfg);
    write_text_file(paths.features(), features_csv(data.values, data.labels));
    write_text_file(paths.synthetic_meta(), "{\n  \"onset_index\": " + std::to_string(*data.onset_index) +
                                                ",\n  \"seed\": " + std::to_string(cfg.seed) + "\n}\n");
  });
  std::cout << "wrote " << paths.features().string() << " (" << data.values.rows() << " nodes x "
            << data.values.cols() << " steps, onset " << *data.onset_index << ")\n";
  return 0;
}

int cmd_ingest(const RunConfig& cfg) {
  if (cfg.input.kind == SourceKind::synthetic) throw ConfigError("ingest: set --input.kind ims or csv");
  const ArtifactPaths paths{cfg.output_dir};
  AcquiredData data;
  run_stage("acquisition", [&] {
    fs::create_directories(paths.dir);
    data = acquire(cfg);
    write_text_file(paths.features(), features_csv(data.values, data.labels));
  });
  std::cout << "wrote " << paths.features().string() << " (" << data.values.rows() << " channels x "
            << data.values.cols() << " steps from " << data.manifest.files.size() << " file(s))\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.output_dir};
  AcquiredData data;
  Dataset ds;
  std::optional<TrainingOutcome> trained;
  run_stage("setup", [&] {
    fs::create_directories(paths.dir);
    write_text_file(paths.config(), config_to_json(cfg));
  });
  run_stage("acquisition", [&] {
    data = acquire(cfg);
    write_text_file(paths.features(), features_csv(data.values, data.labels));
  });
  run_stage("preprocessing", [&] { ds = preprocess(cfg, data); });
  report(ds.warnings);
  run_stage("training", [&] {
    trained = train_stage(cfg, ds);
    save_checkpoint(trained->model, paths.model());
    write_text_file(paths.loss(), loss_history_csv(trained->result));
  });
  const auto& last = trained->result.history.back();
  std::cout << "trained " << trained->result.history.size() << " epochs: train_mse "
            << format_double(last.train_mse) << ", val_mse " << format_double(last.val_mse)
            << " (persistence " << format_double(trained->persistence_val_mse) << ")\n"
            << "wrote " << paths.model().string() << " and " << paths.loss().string() << "\n";
  return 0;
}

int cmd_detect(const RunConfig& cfg, const std::string& model_path) {
  const ArtifactPaths paths{cfg.output_dir};
  const fs::path model_file = model_path.empty() ? paths.model() : fs::path(model_path);
  AcquiredData data;
  Dataset ds;
  std::optional<TgcnModel> model;
  DetectionOutcome det;
  run_stage("acquisition", [&] { data = acquire(cfg); });
  run_stage("preprocessing", [&] { ds = preprocess(cfg, data); });
  run_stage("prediction", [&] {
    model = load_checkpoint(model_file);
    if (model->dims().nodes != ds.nodes() || model->dims().window != ds.window) {
      throw ConfigError("checkpoint dims do not match the configured data (nodes/window)");
    }
  });
  run_stage("detection", [&] {
    det = detect_stage(*model, ds);
    fs::create_directories(paths.dir);
    write_text_file(paths.anomaly(), anomaly_csv(det.test_scores));
  });
  report(det.warnings);
  const auto counts = fault_counts(flag(det.test_scores));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::cout << "node " << i << ": threshold " << format_double(det.test_scores.threshold[i]) << ", "
              << counts[i] << " of " << det.test_scores.length() << " test windows flagged\n";
  }
  std::cout << "wrote " << paths.anomaly().string() << "\n";
  return 0;
}

int cmd_severity(const RunConfig& cfg, const std::string& anomaly_path) {
  const ArtifactPaths paths{cfg.output_dir};
  const fs::path in = anomaly_path.empty() ? paths.anomaly() : fs::path(anomaly_path);
  run_stage("severity", [&] {
    const AnomalySeries series = parse_anomaly_csv(in);
    const auto sev = severity_for(series, cfg.m);
    fs::create_directories(paths.dir);
    write_text_file(paths.severity(), severity_csv(series, sev));
    for (std::size_t i = 0; i < sev.size(); ++i) {
      const double idx = sev[i].index.empty() ? 0.0 : sev[i].index.back();
      std::cout << "node " << i << ": final severity index " << format_double(idx) << " (m = " << format_double(cfg.m)
                << ")\n";
    }
  });
  std::cout << "wrote " << paths.severity().string() << "\n";
  return 0;
}

int cmd_plot(const RunConfig& cfg, const std::string& anomaly_path, const std::string& severity_path) {
  const ArtifactPaths paths{cfg.output_dir};
  const fs::path anomaly = anomaly_path.empty() ? paths.anomaly() : fs::path(anomaly_path);
  std::optional<fs::path> severity;
  if (!severity_path.empty()) {
    severity = severity_path;
  } else if (fs::exists(paths.severity())) {
    severity = paths.severity();
  }
  std::vector<fs::path> written;
  run_stage("report", [&] {
    std::vector<std::string> labels;
    if (fs::exists(paths.features())) labels = read_csv_file(paths.features()).header;
    written = render_plots(anomaly, severity, paths.plots(), labels);
  });
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

int cmd_run(const RunConfig& cfg) {
  const PipelineResult result = run_pipeline(cfg);
  report(result.dataset.warnings);
  report(result.detection.warnings);
  const auto counts = fault_counts(flag(result.detection.test_scores));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& sev = result.severity[i];
    std::cout << "node " << i << ": " << counts[i] << " faults, final index "
              << format_double(sev.index.empty() ? 0.0 : sev.index.back()) << "\n";
  }
  std::cout << "artifacts in " << cfg.output_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal graph convolutional fault detection and severity estimation"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string model_path, anomaly_path, severity_path;

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config_file, "JSON configuration file");
    sub->add_option("--preset", common.preset, "bearing, fanjet or synthetic");
    sub->allow_extras();
    sub->footer("Any setting can be overridden with --key value, e.g. --epochs 10 --input.path data/");
    return sub;
  };
  CLI::App* synth = add("synth", "Generate the synthetic fault-injection series");
  CLI::App* ingest = add("ingest", "Reduce IMS snapshots or a CSV to a feature table");
  CLI::App* train_cmd = add("train", "Train the forecaster on the healthy segment");
  CLI::App* detect = add("detect", "Score the test segment against the training threshold");
  detect->add_option("--model", model_path, "Checkpoint (default <output_dir>/model.json)");
  CLI::App* severity = add("severity", "Severity index from an anomaly CSV");
  severity->add_option("--anomaly", anomaly_path, "Anomaly CSV (default <output_dir>/anomaly.csv)");
  CLI::App* plot = add("plot", "Render per-node SVG plots");
  plot->add_option("--anomaly", anomaly_path, "Anomaly CSV (default <output_dir>/anomaly.csv)");
  plot->add_option("--severity", severity_path, "Severity CSV (default <output_dir>/severity.csv)");
  CLI::App* run = add("run", "Full pipeline: ingest, train, detect, severity, plots, summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) {
      const RunConfig cfg = load(common, sub->remaining());
      if (sub == synth) return cmd_synth(cfg);
      if (sub == ingest) return cmd_ingest(cfg);
      if (sub == train_cmd) return cmd_train(cfg);
      if (sub == detect) return cmd_detect(cfg, model_path);
      if (sub == severity) return cmd_severity(cfg, anomaly_path);
      if (sub == plot) return cmd_plot(cfg, anomaly_path, severity_path);
      if (sub == run) return cmd_run(cfg);
    }
  } catch (const Error& e) {
    std::cerr << "faultsev: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "faultsev: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
