#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "faultsev/config.hpp"
#include "faultsev/csv.hpp"
#include "faultsev/detection.hpp"
#include "faultsev/error.hpp"
#include "faultsev/ingest.hpp"
#include "faultsev/pipeline.hpp"
#include "faultsev/plot.hpp"
#include "faultsev/synthetic.hpp"

namespace fs = std::filesystem;

namespace faultsev {
namespace {

const fs::path kFixtures = FAULTSEV_FIXTURE_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("faultsev_pipeline_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<fs::path> ims_files() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kFixtures / "ims_mini")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

TEST(IngestTest, ColumnRms) {
  const std::vector<double> rms = column_rms(Matrix{{3.0, 0.0}, {-4.0, 0.0}});
  EXPECT_NEAR(rms[0], std::sqrt(12.5), 1e-15);
  EXPECT_EQ(rms[1], 0.0);
}

TEST(IngestTest, TimestampNames) {
  EXPECT_TRUE(is_ims_timestamp("2004.02.12.10.32.39"));
  EXPECT_FALSE(is_ims_timestamp("2004.02.12.10.32"));
  EXPECT_FALSE(is_ims_timestamp("notes.txt"));
}

TEST(IngestTest, FileOrderDoesNotMatter) {
  std::vector<fs::path> files = ims_files();
  const FeatureTable sorted = ingest_ims_files(files, 4);
  std::reverse(files.begin(), files.end());
  std::swap(files[1], files[3]);
  const FeatureTable shuffled = ingest_ims_files(files, 4);
  EXPECT_EQ(sorted.values, shuffled.values);
  EXPECT_EQ(sorted.manifest.files, shuffled.manifest.files);
  EXPECT_EQ(sorted.values.rows(), 4u);
  EXPECT_EQ(sorted.values.cols(), 5u);
  EXPECT_EQ(sorted.manifest.samples_per_snapshot, 64u);
}

TEST(IngestTest, MalformedSnapshotsNameTheFile) {
  const fs::path dir = scratch_dir("ims_bad");
  auto expect_error_naming = [&](const std::string& name, const std::string& body, std::size_t channels) {
    const fs::path f = dir / name;
    write_text_file(f, body);
    try {
      ingest_ims_files({f}, channels);
      ADD_FAILURE() << "expected DataError for " << name;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
    }
    fs::remove(f);
  };
  expect_error_naming("2004.01.01.00.00.00", "0.1\t0.2\n0.3\n", 0);
  expect_error_naming("2004.01.01.00.10.00", "0.1\tabc\n0.3\t0.4\n", 0);
  expect_error_naming("2004.01.01.00.20.00", "0.1\t0.2\n0.3\t0.4\n", 4);
  expect_error_naming("2004.01.01.00.30.00", "", 0);
}

TEST(IngestTest, CsvLayoutAndErrors) {
  const FeatureTable t = ingest_csv(kFixtures / "fanjet_mini.csv");
  EXPECT_EQ(t.labels, (std::vector<std::string>{"vibration_rms", "rpm"}));
  EXPECT_EQ(t.values.rows(), 2u);
  EXPECT_EQ(t.values.cols(), 160u);

  const fs::path dir = scratch_dir("csv_bad");
  write_text_file(dir / "header_only.csv", "a,b\n");
  EXPECT_THROW(ingest_csv(dir / "header_only.csv"), DataError);
  write_text_file(dir / "missing.csv", "a,b\n1,2\n3,\n");
  try {
    ingest_csv(dir / "missing.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  write_text_file(dir / "ragged.csv", "a,b\n1,2\n3\n");
  EXPECT_THROW(ingest_csv(dir / "ragged.csv"), DataError);
  EXPECT_THROW(ingest_csv(dir / "absent.csv"), DataError);
}

TEST(IngestTest, FeaturesCsvRoundTrips) {
  const FeatureTable t = ingest_csv(kFixtures / "fanjet_mini.csv");
  const fs::path dir = scratch_dir("csv_round");
  write_text_file(dir / "f.csv", features_csv(t.values, t.labels));
  EXPECT_EQ(ingest_csv(dir / "f.csv").values, t.values);
}

TEST(SyntheticTest, OnsetAndShape) {
  SyntheticSpec spec;
  const SyntheticSeries s = generate_synthetic(spec, graph_from_preset("path4"));
  EXPECT_EQ(s.values.rows(), 4u);
  EXPECT_EQ(s.values.cols(), 1000u);
  EXPECT_EQ(s.onset_index, 500u);
  EXPECT_EQ(onset_index(999, 0.5), 499u);
}

TEST(SyntheticTest, NullFaultMatchesHealthySignal) {
  const Graph g = graph_from_preset("path4");
  SyntheticSpec null_fault;
  null_fault.gain = 1.0;
  null_fault.fault_oscillation = 0.0;
  SyntheticSpec healthy;
  healthy.fault_nodes.clear();
  EXPECT_EQ(generate_synthetic(null_fault, g).values, generate_synthetic(healthy, g).values);
}

TEST(SyntheticTest, NullFaultHalvesAgree) {
  SyntheticSpec spec;
  spec.gain = 1.0;
  spec.fault_oscillation = 0.0;
  const SyntheticSeries s = generate_synthetic(spec, graph_from_preset("path4"));
  for (std::size_t node = 0; node < 4; ++node) {
    const auto row = s.values.row(node);
    auto stats = [&](std::size_t begin, std::size_t end) {
      double mean = 0.0, var = 0.0;
      for (std::size_t t = begin; t < end; ++t) mean += row[t];
      mean /= static_cast<double>(end - begin);
      for (std::size_t t = begin; t < end; ++t) var += (row[t] - mean) * (row[t] - mean);
      return std::pair{mean, var / static_cast<double>(end - begin - 1)};
    };
    const auto [m1, v1] = stats(0, s.onset_index);
    const auto [m2, v2] = stats(s.onset_index, 1000);
    const double se = std::sqrt(v1 / 500.0 + v2 / 500.0);
    EXPECT_LE(std::abs(m1 - m2), 3.0 * se) << "node " << node;
  }
}

TEST(SyntheticTest, SameSeedSameSeries) {
  const Graph g = graph_from_preset("path4");
  SyntheticSpec other;
  other.seed = 8;
  EXPECT_EQ(generate_synthetic(SyntheticSpec{}, g).values, generate_synthetic(SyntheticSpec{}, g).values);
  EXPECT_NE(generate_synthetic(SyntheticSpec{}, g).values, generate_synthetic(other, g).values);
}

TEST(SyntheticTest, FaultOnlyChangesFaultedNodeAfterOnset) {
  const Graph g = graph_from_preset("path4");
  SyntheticSpec healthy;
  healthy.fault_nodes.clear();
  const SyntheticSeries a = generate_synthetic(SyntheticSpec{}, g);
  const SyntheticSeries b = generate_synthetic(healthy, g);
  for (std::size_t t = 0; t < 1000; ++t) {
    for (std::size_t i = 1; i < 4; ++i) ASSERT_EQ(a.values(i, t), b.values(i, t));
    if (t < 500) ASSERT_EQ(a.values(0, t), b.values(0, t));
  }
  EXPECT_NE(a.values(0, 600), b.values(0, 600));
}

TEST(SyntheticTest, BadParameters) {
  SyntheticSpec spec;
  spec.fault_nodes = {9};
  EXPECT_THROW(generate_synthetic(spec, graph_from_preset("path4")), ConfigError);
  spec = SyntheticSpec{};
  spec.onset_fraction = 1.5;
  EXPECT_THROW(generate_synthetic(spec, graph_from_preset("path4")), ConfigError);
}

TEST(ConfigTest, BearingAndFanjetPresetValues) {
  const RunConfig bearing = preset_config("bearing");
  EXPECT_EQ(bearing.graph.preset, "path4");
  EXPECT_EQ(bearing.window, 4u);
  EXPECT_EQ(bearing.batch_size, 32u);
  EXPECT_EQ(bearing.hidden, 128u);
  EXPECT_EQ(bearing.layers, 2u);
  EXPECT_EQ(bearing.learning_rate, 1e-3);
  EXPECT_EQ(bearing.epochs, 50u);
  EXPECT_EQ(bearing.train_frac, 0.4);
  EXPECT_EQ(bearing.val_frac, 0.2);

  const RunConfig fanjet = preset_config("fanjet");
  EXPECT_EQ(fanjet.graph.preset, "pair2");
  EXPECT_EQ(fanjet.batch_size, 4u);
  EXPECT_EQ(fanjet.hidden, 256u);
  EXPECT_EQ(fanjet.train_frac, 0.6);
  EXPECT_EQ(fanjet.val_frac, 0.3);
  EXPECT_EQ(fanjet.m, 2.0);
  EXPECT_EQ(fanjet.seed, 7u);
  EXPECT_THROW(preset_config("nope"), ConfigError);
}

void expect_config_error_naming(const std::vector<ConfigOverride>& overrides, const std::string& field) {
  try {
    resolve_config(std::nullopt, "synthetic", overrides);
    ADD_FAILURE() << "expected ConfigError naming " << field;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'" + field + "'"), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, ValidationNamesTheField) {
  expect_config_error_naming({{"window", "0"}}, "window");
  expect_config_error_naming({{"train_frac", "1.5"}}, "train_frac");
  expect_config_error_naming({{"epochs", "-3"}}, "epochs");
  expect_config_error_naming({{"m", "\"big\""}}, "m");
  expect_config_error_naming({{"bogus", "1"}}, "bogus");
  expect_config_error_naming({{"synthetic.gain", "0"}}, "synthetic.gain");
  expect_config_error_naming({{"synthetic.fault_nodes", "[4]"}}, "synthetic.fault_nodes");
  expect_config_error_naming({{"graph.edges", "[[0,5]]"}, {"graph.n", "3"}}, "graph");
}

TEST(ConfigTest, LayeringOrder) {
  const fs::path dir = scratch_dir("config");
  write_text_file(dir / "c.json", R"({"preset": "fanjet", "epochs": 3, "input": {"path": "x.csv"}, "graph": {"n": 2, "edges": [[0, 1]]}})");
  const RunConfig c = resolve_config(dir / "c.json", std::nullopt, {{"epochs", "5"}, {"output_dir", "123"}});
  EXPECT_EQ(c.preset, "fanjet");
  EXPECT_EQ(c.hidden, 256u);
  EXPECT_EQ(c.epochs, 5u);
  EXPECT_EQ(c.output_dir, fs::path("123"));
  EXPECT_TRUE(c.graph.preset.empty());
  EXPECT_EQ(c.graph.n, 2u);

  const RunConfig again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));

  write_text_file(dir / "bad.json", "{not json");
  EXPECT_THROW(resolve_config(dir / "bad.json", std::nullopt, {}), ConfigError);
  EXPECT_THROW(resolve_config(dir / "absent.json", std::nullopt, {}), ConfigError);
}

RunConfig small_synthetic(const fs::path& out) {
  return resolve_config(std::nullopt, "synthetic",
                        {{"epochs", "3"}, {"hidden", "6"}, {"synthetic.length", "300"},
                         {"output_dir", out.string()}});
}

class PipelineRunTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = new fs::path(scratch_dir("run"));
    result_ = new PipelineResult(run_pipeline(small_synthetic(*out_)));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete out_;
  }
  static fs::path* out_;
  static PipelineResult* result_;
};

fs::path* PipelineRunTest::out_ = nullptr;
PipelineResult* PipelineRunTest::result_ = nullptr;

TEST_F(PipelineRunTest, WritesEveryArtifact) {
  const ArtifactPaths p{*out_};
  for (const fs::path& f : {p.config(), p.features(), p.synthetic_meta(), p.model(), p.loss(), p.anomaly(),
                            p.severity(), p.summary()}) {
    EXPECT_TRUE(fs::exists(f)) << f;
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(fs::exists(p.plots() / ("node_" + std::to_string(i) + ".svg")));
}

TEST_F(PipelineRunTest, SummaryCountsMatchAnomalyCsv) {
  const AnomalySeries read = parse_anomaly_csv(ArtifactPaths{*out_}.anomaly());
  const auto counts = fault_counts(flag(read));
  const std::string summary = read_text_file(ArtifactPaths{*out_}.summary());
  EXPECT_EQ(summary, result_->summary_json);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::string needle = "\"fault_count\": " + std::to_string(counts[i]);
    EXPECT_NE(summary.find(needle), std::string::npos) << "node " << i;
  }
  EXPECT_EQ(read.scores, result_->detection.test_scores.scores);
  EXPECT_EQ(read.threshold, result_->detection.test_scores.threshold);
}

TEST_F(PipelineRunTest, NoTrainingFlags) {
  for (std::size_t c : fault_counts(flag(result_->detection.train_scores))) EXPECT_EQ(c, 0u);
}

TEST_F(PipelineRunTest, TestWindowsStartAfterValidation) {
  const auto& ti = result_->detection.test_scores.time_index;
  ASSERT_FALSE(ti.empty());
  EXPECT_EQ(ti.front(), result_->dataset.split.val_end + result_->dataset.window);
  EXPECT_EQ(ti.back(), result_->dataset.length() - 1);
}

TEST_F(PipelineRunTest, PlotsAreWellFormedAndPlaceTheThreshold) {
  namespace pt = boost::property_tree;
  const auto traces = read_traces(ArtifactPaths{*out_}.anomaly(), ArtifactPaths{*out_}.severity());
  ASSERT_EQ(traces.size(), 4u);
  for (const NodeTrace& trace : traces) {
    const fs::path svg = ArtifactPaths{*out_}.plots() / ("node_" + std::to_string(trace.node) + ".svg");
    pt::ptree tree;
    ASSERT_NO_THROW(pt::read_xml(svg.string(), tree)) << svg;
    const pt::ptree& root = tree.get_child("svg");
    const PlotFrame frame = frame_for(trace);
    bool found = false;
    for (const auto& [tag, child] : root) {
      if (tag != "line" || child.get("<xmlattr>.class", "") != "threshold") continue;
      found = true;
      EXPECT_NEAR(child.get<double>("<xmlattr>.y1"), frame.y(trace.threshold), 0.01);
      EXPECT_NEAR(child.get<double>("<xmlattr>.y2"), frame.y(trace.threshold), 0.01);
    }
    EXPECT_TRUE(found) << svg;
  }
}

TEST(PlotTest, AnomalyOnlyPlotHasNoSeverityCurves) {
  const fs::path dir = scratch_dir("plot_only");
  write_text_file(dir / "a.csv", "t,node,score,threshold,flag\n5,0,0.5,1,0\n5,1,2,1,1\n6,0,1.5,1,1\n6,1,0.1,1,0\n");
  const auto written = render_plots(dir / "a.csv", std::nullopt, dir / "plots");
  ASSERT_EQ(written.size(), 2u);
  const std::string svg = read_text_file(written[0]);
  EXPECT_NE(svg.find("class=\"score\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"threshold\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"mu\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"index\""), std::string::npos);
}

TEST(PlotTest, MalformedCsvNamesTheLine) {
  const fs::path dir = scratch_dir("plot_bad");
  write_text_file(dir / "a.csv", "t,node,score,threshold,flag\n5,0,0.5,1,0\n6,0,oops,1,0\n");
  try {
    read_traces(dir / "a.csv", std::nullopt);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(PipelineTest, FourColumnCsvWithPathGraph) {
  const fs::path dir = scratch_dir("csv4");
  std::string csv = "a,b,c,d\n";
  for (int t = 0; t < 30; ++t) csv += std::to_string(t) + ",1,2," + std::to_string(t % 3) + "\n";
  write_text_file(dir / "in.csv", csv);
  const RunConfig c = resolve_config(std::nullopt, "fanjet",
                                     {{"graph.preset", "path4"}, {"input.path", (dir / "in.csv").string()}});
  const AcquiredData d = acquire(c);
  EXPECT_EQ(d.values.rows(), 4u);
  const RunConfig wrong = resolve_config(std::nullopt, "fanjet", {{"input.path", (dir / "in.csv").string()}});
  EXPECT_THROW(acquire(wrong), DataError);
}

TEST(PipelineTest, StageFailuresArePrefixed) {
  const fs::path out = scratch_dir("fail");
  RunConfig c = resolve_config(std::nullopt, "fanjet",
                               {{"input.path", (out / "absent.csv").string()}, {"output_dir", out.string()}});
  try {
    run_pipeline(c);
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_EQ(std::string(e.what()).rfind("stage 'acquisition'", 0), 0u) << e.what();
  }
}

TEST(PipelineTest, TooShortSeriesIsDataError) {
  const fs::path out = scratch_dir("short");
  const RunConfig c = resolve_config(std::nullopt, "synthetic",
                                     {{"synthetic.length", "20"}, {"output_dir", out.string()}});
  try {
    run_pipeline(c);
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data) << e.what();
  }
}

}  // namespace
}  // namespace faultsev
