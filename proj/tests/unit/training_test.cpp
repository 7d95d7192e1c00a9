#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "faultsev/error.hpp"
#include "faultsev/model.hpp"
#include "faultsev/random.hpp"
#include "faultsev/training.hpp"

namespace faultsev {
namespace {

// Two noisy sinusoids on the pair2 graph, T columns.
Matrix toy_series(std::size_t t_len, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(2, t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    m(0, t) = 3.0 + std::sin(0.6 * static_cast<double>(t)) + 0.05 * rng.normal();
    m(1, t) = -1.0 + 2.0 * std::cos(0.6 * static_cast<double>(t)) + 0.05 * rng.normal();
  }
  return m;
}

TEST(SplitTest, FloorsBothFractions) {
  const SplitBounds b = compute_split(1000, SplitSpec{0.4, 0.2});
  EXPECT_EQ(b.train_end, 320u);
  EXPECT_EQ(b.val_end, 400u);
  EXPECT_EQ(b.length(Segment::test), 600u);
  const SplitBounds c = compute_split(101, SplitSpec{0.6, 0.3});
  EXPECT_EQ(c.val_end, 60u);
  EXPECT_EQ(c.train_end, 42u);
  EXPECT_THROW(compute_split(10, SplitSpec{1.0, 0.2}), ContractError);
  EXPECT_THROW(compute_split(10, SplitSpec{0.5, 0.0}), ContractError);
}

TEST(NormalizeTest, UsesTrainSegmentStatistics) {
  // Train segment [3, 7, 3, 7] has mean 5 and population std 2.
  Matrix raw{{3, 7, 3, 7, 5, 9, 9, 9, 9, 9}};
  const Dataset ds = normalize_dataset(raw, SplitSpec{0.5, 0.2}, 2);
  ASSERT_EQ(ds.split.train_end, 4u);
  EXPECT_DOUBLE_EQ(ds.stats[0].mean, 5.0);
  EXPECT_DOUBLE_EQ(ds.stats[0].std, 2.0);
  EXPECT_DOUBLE_EQ(ds.features(0, 5), 2.0);
  EXPECT_TRUE(ds.warnings.empty());
}

TEST(NormalizeTest, StandardizedInputIsUnchanged) {
  Matrix raw{{1, -1, 1, -1, 0.3, 0.2, -0.7, 2.0, 1.1, 0.0}};
  const Dataset ds = normalize_dataset(raw, SplitSpec{0.5, 0.2}, 2);
  EXPECT_LE(max_abs_diff(ds.features, raw), 1e-15);
}

TEST(NormalizeTest, ConstantChannelWarnsAndZeroes) {
  Matrix raw = toy_series(40, 1);
  for (double& x : raw.row(1)) x = 4.25;
  const Dataset ds = normalize_dataset(raw, SplitSpec{0.5, 0.2}, 3);
  ASSERT_EQ(ds.warnings.size(), 1u);
  EXPECT_NE(ds.warnings[0].find("channel 1"), std::string::npos);
  EXPECT_TRUE(ds.stats[1].constant);
  for (double x : ds.features.row(1)) EXPECT_EQ(x, 0.0);
}

TEST(WindowTest, CountsAndAlignment) {
  Matrix raw(1, 50);
  for (std::size_t t = 0; t < 50; ++t) raw(0, t) = static_cast<double>(t);
  // fit = 25, val = 5: train [0,20), validation [20,25), test [25,50).
  const Dataset ds = normalize_dataset(raw, SplitSpec{0.5, 0.2}, 4);
  const auto train = make_windows(ds, Segment::train);
  ASSERT_EQ(train.size(), 16u);
  const auto val = make_windows(ds, Segment::validation);
  ASSERT_EQ(val.size(), 1u);
  EXPECT_EQ(val[0].target_index, 24u);
  for (const Segment seg : {Segment::train, Segment::validation, Segment::test}) {
    for (const Window& w : make_windows(ds, seg)) {
      ASSERT_EQ(w.inputs.size(), 4u);
      const std::size_t start = w.target_index - 4;
      EXPECT_GE(start, ds.split.begin(seg));
      EXPECT_LT(w.target_index, ds.split.end(seg));
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(w.inputs[k](0, 0), ds.features(0, start + k));
      EXPECT_EQ(w.target(0, 0), ds.features(0, w.target_index));
    }
  }
  const Dataset short_val = normalize_dataset(raw, SplitSpec{0.5, 0.1}, 4);
  EXPECT_THROW(make_windows(short_val, Segment::validation), ContractError);
}

TEST(WindowTest, TenStepsWindowFourGivesSix) {
  Matrix raw(1, 40);
  for (std::size_t t = 0; t < 40; ++t) raw(0, t) = std::sin(static_cast<double>(t));
  // fit = 20, val = 10: validation segment is 10 long.
  const Dataset ds = normalize_dataset(raw, SplitSpec{0.5, 0.5}, 4);
  EXPECT_EQ(make_windows(ds, Segment::validation).size(), 6u);
}

TEST(WindowTest, ShuffleIsAPermutation) {
  const Dataset ds = normalize_dataset(toy_series(100, 2), SplitSpec{0.6, 0.2}, 3);
  const auto ordered = make_windows(ds, Segment::train);
  const auto shuffled = make_windows(ds, Segment::train, 5);
  ASSERT_EQ(ordered.size(), shuffled.size());
  std::set<std::size_t> targets;
  for (const Window& w : shuffled) targets.insert(w.target_index);
  EXPECT_EQ(targets.size(), ordered.size());
  const auto again = make_windows(ds, Segment::train, 5);
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_EQ(again[i].target_index, shuffled[i].target_index);
}

TEST(LossTest, MeanSquaredError) {
  EXPECT_DOUBLE_EQ(mse_loss(Matrix{{0}, {0}}, Matrix{{3}, {4}}), 12.5);
  EXPECT_DOUBLE_EQ(mse_loss(Matrix{{1.5}, {2}}, Matrix{{1.5}, {2}}), 0.0);
  EXPECT_THROW(mse_loss(Matrix(2, 1), Matrix(3, 1)), ShapeError);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Matrix w{{1.0, -2.0, 0.5}};
  const Matrix g{{0.3, -7.0, 1e-3}};
  std::vector<Matrix*> params{&w};
  AdamState state = make_adam_state(AdamConfig{0.01}, std::vector<const Matrix*>{&w});
  adam_step(state, params, std::vector<Matrix>{g});
  EXPECT_NEAR(w(0, 0) - 1.0, -0.01, 1e-6);
  EXPECT_NEAR(w(0, 1) + 2.0, 0.01, 1e-6);
  EXPECT_NEAR(w(0, 2) - 0.5, -0.01, 1e-6);
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  Matrix w{{1.0, -2.0}};
  const Matrix before = w;
  std::vector<Matrix*> params{&w};
  AdamState state = make_adam_state(AdamConfig{}, std::vector<const Matrix*>{&w});
  for (int i = 0; i < 3; ++i) adam_step(state, params, std::vector<Matrix>{Matrix(1, 2)});
  EXPECT_EQ(w, before);
  EXPECT_THROW(adam_step(state, params, std::vector<Matrix>{Matrix(2, 2)}), ShapeError);
}

class TrainLoopTest : public ::testing::Test {
 protected:
  Dataset ds = normalize_dataset(toy_series(120, 3), SplitSpec{0.6, 0.25}, 3);
  ModelDims dims{2, 3, 4, 2};
  Graph graph = graph_from_preset("pair2");
};

TEST_F(TrainLoopTest, HistoryAndFittedFlag) {
  TgcnModel model = init_params(7, dims, graph);
  const TrainResult r = train(model, ds, TrainConfig{6, 8, 0.01, 7, 0.0});
  ASSERT_EQ(r.history.size(), 6u);
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    EXPECT_EQ(r.history[i].epoch, i + 1);
    EXPECT_TRUE(std::isfinite(r.history[i].train_mse));
    EXPECT_TRUE(std::isfinite(r.history[i].val_mse));
  }
  EXPECT_LT(r.history.back().train_mse, r.history.front().train_mse);
  EXPECT_TRUE(model.fitted());
  const std::string csv = loss_history_csv(r);
  EXPECT_EQ(csv.rfind("epoch,train_mse,val_mse\n1,", 0), 0u);
}

TEST_F(TrainLoopTest, LearnsCoupledSinusoids) {
  const Dataset longer = normalize_dataset(toy_series(300, 4), SplitSpec{0.6, 0.2}, 3);
  TgcnModel model = init_params(7, ModelDims{2, 3, 8, 2}, graph);
  const TrainResult r = train(model, longer, TrainConfig{15, 8, 0.01, 7, 0.0});
  EXPECT_LT(r.history.back().train_mse, 0.5 * r.history.front().train_mse);
}

TEST_F(TrainLoopTest, RunsAreBitIdentical) {
  TgcnModel a = init_params(7, dims, graph);
  TgcnModel b = init_params(7, dims, graph);
  const TrainResult ra = train(a, ds, TrainConfig{3, 5, 0.01, 7, 0.0});
  const TrainResult rb = train(b, ds, TrainConfig{3, 5, 0.01, 7, 0.0});
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].train_mse, rb.history[i].train_mse);
    EXPECT_EQ(ra.history[i].val_mse, rb.history[i].val_mse);
  }
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
}

TEST_F(TrainLoopTest, InvalidSettingsAreContractErrors) {
  TgcnModel model = init_params(7, dims, graph);
  EXPECT_THROW(train(model, ds, TrainConfig{0, 8, 0.01, 7, 0.0}), ContractError);
  EXPECT_THROW(train(model, ds, TrainConfig{1, 0, 0.01, 7, 0.0}), ContractError);
  TgcnModel wrong = init_params(7, ModelDims{2, 4, 4, 2}, graph);
  EXPECT_THROW(train(wrong, ds, TrainConfig{1, 8, 0.01, 7, 0.0}), ShapeError);
}

TEST_F(TrainLoopTest, DivergenceIsReported) {
  TgcnModel model = init_params(7, dims, graph);
  model.layers()[0].gcn.weight(0, 0) = std::nan("");
  try {
    train(model, ds, TrainConfig{2, 8, 0.01, 7, 0.0});
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST_F(TrainLoopTest, BatchLossEqualsMeanOfWindowLosses) {
  const TgcnModel model = init_params(9, dims, graph);
  const auto windows = make_windows(ds, Segment::train);
  const std::span<const Window> batch(windows.data(), 5);
  const BatchGradients bg = batch_gradients(model, batch);
  double direct = 0.0;
  for (const Window& w : batch) direct += mse_loss(predict(model, w.inputs), w.target);
  EXPECT_NEAR(bg.loss, direct / 5.0, 1e-12);
  EXPECT_EQ(bg.grads.size(), model.parameters().size());
}

TEST_F(TrainLoopTest, PersistenceBaseline) {
  const auto windows = make_windows(ds, Segment::validation);
  double direct = 0.0;
  for (const Window& w : windows) direct += mse_loss(w.inputs.back(), w.target);
  EXPECT_DOUBLE_EQ(persistence_mse(windows), direct / static_cast<double>(windows.size()));
}

}  // namespace
}  // namespace faultsev
