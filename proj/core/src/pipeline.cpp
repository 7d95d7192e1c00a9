#include "faultsev/pipeline.hpp"

#include <algorithm>

#include "faultsev/checkpoint.hpp"
#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"
#include "faultsev/plot.hpp"
#include "faultsev/synthetic.hpp"
#include "json.hpp"

namespace faultsev {

namespace {

using nlohmann::json;

json rates_json(const OnsetRates& r) {
  return json{{"pre_onset_steps", r.pre_steps},   {"pre_onset_flags", r.pre_flags},
              {"pre_onset_rate", r.pre_rate()},   {"post_onset_steps", r.post_steps},
              {"post_onset_flags", r.post_flags}, {"post_onset_rate", r.post_rate()}};
}

}  // namespace

void run_stage(const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + name + "': " + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorKind::data, "stage '" + name + "': " + e.what());
  }
}

AcquiredData acquire(const RunConfig& config) {
  AcquiredData data;
  const Graph graph = build_graph(config.graph);
  switch (config.input.kind) {
    case SourceKind::synthetic: {
      SyntheticSpec spec = config.synthetic;
      spec.seed = config.seed;
      SyntheticSeries s = generate_synthetic(spec, graph);
      data.values = std::move(s.values);
      data.labels = std::move(s.labels);
      data.onset_index = s.onset_index;
      data.manifest.kind = SourceKind::synthetic;
      data.manifest.channels = graph.n_nodes();
      break;
    }
    case SourceKind::ims_raw: {
      FeatureTable t = ingest_ims(config.input.path, config.input.channels);
      data.values = std::move(t.values);
      data.labels = std::move(t.labels);
      data.manifest = std::move(t.manifest);
      break;
    }
    case SourceKind::csv: {
      FeatureTable t = ingest_csv(config.input.path);
      data.values = std::move(t.values);
      data.labels = std::move(t.labels);
      data.manifest = std::move(t.manifest);
      break;
    }
  }
  if (data.values.rows() != graph.n_nodes()) {
    throw DataError("input has " + std::to_string(data.values.rows()) + " channels but the graph has " +
                    std::to_string(graph.n_nodes()) + " nodes");
  }
  if (!graph.node_labels.empty() && config.input.kind == SourceKind::ims_raw) data.labels = graph.node_labels;
  return data;
}

Dataset preprocess(const RunConfig& config, const AcquiredData& data) {
  if (data.values.cols() < config.window + 2) {
    throw DataError("series has " + std::to_string(data.values.cols()) + " steps; need at least window + 2");
  }
  Dataset ds = normalize_dataset(data.values, SplitSpec{config.train_frac, config.val_frac}, config.window);
  for (Segment s : {Segment::train, Segment::validation, Segment::test}) {
    if (ds.split.length(s) <= config.window) {
      throw DataError(std::string(to_string(s)) + " segment has " + std::to_string(ds.split.length(s)) +
                      " steps; need more than the window of " + std::to_string(config.window));
    }
  }
  return ds;
}

TrainingOutcome train_stage(const RunConfig& config, const Dataset& ds) {
  const ModelDims dims{ds.nodes(), config.window, config.hidden, config.layers};
  TrainingOutcome out{init_params(config.seed, dims, build_graph(config.graph)), {}, 0.0};
  TrainConfig tc;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;
  tc.learning_rate = config.learning_rate;
  tc.seed = config.seed;
  tc.clip_norm = config.clip_norm;
  out.result = train(out.model, ds, tc);
  out.persistence_val_mse = persistence_mse(make_windows(ds, Segment::validation));
  return out;
}

DetectionOutcome detect_stage(const TgcnModel& model, const Dataset& ds) {
  DetectionOutcome out;
  out.train_scores = score(model, make_windows(ds, Segment::train));
  Calibration cal = threshold_from_scores(out.train_scores);
  out.train_scores.threshold = cal.threshold;
  out.test_scores = score(model, make_windows(ds, Segment::test));
  out.test_scores.threshold = cal.threshold;
  out.warnings = std::move(cal.warnings);
  return out;
}

std::size_t first_position_at_or_after(const AnomalySeries& series, std::size_t onset_index) {
  const auto it = std::lower_bound(series.time_index.begin(), series.time_index.end(), onset_index);
  return static_cast<std::size_t>(it - series.time_index.begin());
}

OnsetRates onset_rates(const AnomalySeries& series, std::size_t node, std::size_t onset_index) {
  if (node >= series.nodes()) throw ContractError("onset_rates: node out of range");
  const FlagMatrix flags = flag(series);
  OnsetRates r;
  for (std::size_t k = 0; k < series.length(); ++k) {
    if (series.time_index[k] < onset_index) {
      ++r.pre_steps;
      r.pre_flags += flags[node][k];
    } else {
      ++r.post_steps;
      r.post_flags += flags[node][k];
    }
  }
  return r;
}

std::string summary_json(const RunConfig& config, const PipelineResult& result) {
  const AnomalySeries& test = result.detection.test_scores;
  const auto test_counts = fault_counts(flag(test));
  const auto train_counts = fault_counts(flag(result.detection.train_scores));
  const std::size_t smoothing_from =
      result.data.onset_index ? first_position_at_or_after(test, *result.data.onset_index) : 0;

  json nodes = json::array();
  for (std::size_t i = 0; i < test.nodes(); ++i) {
    const SeveritySeries& sev = result.severity[i];
    const auto row = test.scores.row(i);
    const SmoothingComparison sm = compare_smoothing(row, test.threshold[i], sev, smoothing_from, false);
    json n{
        {"node", i},
        {"label", i < result.data.labels.size() ? result.data.labels[i] : "node" + std::to_string(i)},
        {"threshold", test.threshold[i]},
        {"fault_count", test_counts[i]},
        {"train_fault_count", train_counts[i]},
        {"final_mu", sev.mu.empty() ? 0.0 : sev.mu.back()},
        {"final_sigma", sev.sigma.empty() ? 0.0 : sev.sigma.back()},
        {"final_index", sev.index.empty() ? 0.0 : sev.index.back()},
        {"index_variation", sm.index_variation},
        {"exceedance_variation", sm.exceedance_variation},
    };
    if (result.data.onset_index) n["onset"] = rates_json(onset_rates(test, i, *result.data.onset_index));
    nodes.push_back(std::move(n));
  }

  if (!result.training) throw ContractError("summary: training has not run");
  const TrainingOutcome& trained = *result.training;
  const auto& hist = trained.result.history;
  json training{
      {"epochs", hist.size()},
      {"initial_train_mse", hist.empty() ? 0.0 : hist.front().train_mse},
      {"final_train_mse", hist.empty() ? 0.0 : hist.back().train_mse},
      {"final_val_mse", hist.empty() ? 0.0 : hist.back().val_mse},
      {"persistence_val_mse", trained.persistence_val_mse},
      {"converged", trained.result.converged},
      {"recent_relative_change", trained.result.recent_relative_change},
  };

  const SplitBounds& sp = result.dataset.split;
  json doc{
      {"config", json::parse(config_to_json(config))},
      {"series", {{"nodes", result.dataset.nodes()},
                  {"length", result.dataset.length()},
                  {"train_end", sp.train_end},
                  {"val_end", sp.val_end},
                  {"test_windows", test.length()},
                  {"first_test_t", test.time_index.empty() ? 0 : test.time_index.front()},
                  {"last_test_t", test.time_index.empty() ? 0 : test.time_index.back()}}},
      {"training", training},
      {"nodes", nodes},
      {"warnings", [&] {
         std::vector<std::string> w = result.dataset.warnings;
         w.insert(w.end(), result.detection.warnings.begin(), result.detection.warnings.end());
         return w;
       }()},
  };
  if (result.data.onset_index) {
    doc["synthetic"] = {{"onset_index", *result.data.onset_index},
                        {"fault_nodes", config.synthetic.fault_nodes}};
  }
  return doc.dump(2) + "\n";
}

PipelineResult run_pipeline(const RunConfig& config) {
  validate(config);
  const ArtifactPaths paths{config.output_dir};
  run_stage("setup", [&] {
    std::filesystem::create_directories(paths.dir);
    write_text_file(paths.config(), config_to_json(config));
  });

  PipelineResult result;

  run_stage("acquisition", [&] {
    result.data = acquire(config);
    write_text_file(paths.features(), features_csv(result.data.values, result.data.labels));
    if (result.data.onset_index) {
      write_text_file(paths.synthetic_meta(),
                      json{{"onset_index", *result.data.onset_index}, {"seed", config.seed}}.dump(2) + "\n");
    }
  });
  run_stage("preprocessing", [&] { result.dataset = preprocess(config, result.data); });
  run_stage("training", [&] {
    result.training = train_stage(config, result.dataset);
    save_checkpoint(result.training->model, paths.model());
    write_text_file(paths.loss(), loss_history_csv(result.training->result));
  });
  run_stage("detection", [&] {
    result.detection = detect_stage(result.training->model, result.dataset);
    write_text_file(paths.anomaly(), anomaly_csv(result.detection.test_scores));
  });
  run_stage("severity", [&] {
    result.severity = severity_for(result.detection.test_scores, config.m);
    write_text_file(paths.severity(), severity_csv(result.detection.test_scores, result.severity));
  });
  run_stage("report", [&] {
    result.plots = render_plots(paths.anomaly(), paths.severity(), paths.plots(), result.data.labels);
    result.summary_json = summary_json(config, result);
    write_text_file(paths.summary(), result.summary_json);
  });
  return result;
}

}  // namespace faultsev
