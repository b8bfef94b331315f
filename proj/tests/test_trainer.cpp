// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "distilforge/trainer.hpp"
#include "support.hpp"

using namespace distilforge;
using distilforge::testing::make_pair;
using distilforge::testing::short_config;
using distilforge::testing::toy_blobs;

TEST(Sgd, PlainStep) {
  std::vector<double> w{0.0}, g{1.0}, v{0.0};
  sgd_step(w, g, v, 0.1, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(w[0], -0.1);
}

TEST(Sgd, MomentumSecondStep) {
  std::vector<double> w{0.0}, g{1.0}, v{0.0};
  sgd_step(w, g, v, 0.1, 0.9, 0.0);
  const double before = w[0];
  sgd_step(w, g, v, 0.1, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(v[0], 1.9);
  EXPECT_DOUBLE_EQ(w[0] - before, -0.19);
}

TEST(Sgd, WeightDecayOnly) {
  std::vector<double> w{2.0}, g{0.0}, v{0.0};
  sgd_step(w, g, v, 1.0, 0.0, 0.5);
  EXPECT_EQ(w[0], 1.0);
}

TEST(Sgd, NonFiniteGradientLeavesNetworkUntouched) {
  PeerNetwork net(NetworkConfig{2, {3}, 2, 0});
  const PeerNetwork before = net.clone();
  OptimizerState opt(net);
  net.zero_grad();
  net.parameters().back().value.mutable_grad()[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sgd_step(net, opt, 0.1, 0.9, 0.0), NonFiniteError);
  EXPECT_TRUE(same_parameters(net, before));
}

TEST(Schedule, StepDecayValues) {
  TrainConfig cfg;
  cfg.stage2_epochs = 200;
  cfg.lr = 0.1;
  cfg.lr_milestones = {60, 120, 160};
  cfg.lr_factor = 0.2;
  EXPECT_EQ(lr_at(0, cfg), 0.1);
  EXPECT_EQ(lr_at(59, cfg), 0.1);
  EXPECT_EQ(lr_at(60, cfg), 0.02);
  EXPECT_EQ(lr_at(120, cfg), 0.004);
  EXPECT_EQ(lr_at(161, cfg), 0.0008);
}

TEST(Schedule, MonotoneNonIncreasing) {
  TrainConfig cfg;
  for (std::size_t e = 1; e < cfg.stage2_epochs; ++e) EXPECT_LE(lr_at(e, cfg), lr_at(e - 1, cfg));
}

TEST(TrainConfig, RejectsBadValues) {
  TrainConfig cfg;
  cfg.lr = -0.1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lr_milestones = {6, 6};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lr_milestones = {cfg.stage2_epochs};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Variants, SwitchTheExpectedTerms) {
  TrainConfig cfg;
  cfg.variant = Variant::A;
  EXPECT_EQ(objective_for(cfg).weights.gamma, cfg.weights.gamma);
  cfg.variant = Variant::B;
  EXPECT_EQ(objective_for(cfg).weights.gamma, 0.0);
  EXPECT_FALSE(objective_for(cfg).terms.self_distill);
  cfg.variant = Variant::C;
  EXPECT_EQ(objective_for(cfg).weights.beta2, 0.0);
  EXPECT_FALSE(objective_for(cfg).terms.mutual_kl);
  EXPECT_TRUE(objective_for(cfg).terms.self_distill);
  cfg.variant = Variant::D;
  EXPECT_EQ(objective_for(cfg).weights.beta1, 0.0);
  EXPECT_FALSE(objective_for(cfg).terms.distance);
  EXPECT_FALSE(objective_for(cfg).terms.angle);
  EXPECT_TRUE(objective_for(cfg).terms.mutual_kl);
  EXPECT_EQ(parse_variant("C"), Variant::C);
  EXPECT_THROW(parse_variant("E"), std::invalid_argument);
}

TEST(Evaluate, PerfectPredictor) {
  // Identity-like classifier on one-hot features.
  const NetworkConfig cfg{2, {2}, 2, 0};
  std::vector<NamedParameter> p{{"hidden.0.weight", Tensor::matrix({{1, 0}, {0, 1}})},
                                {"hidden.0.bias", Tensor::zeros({2})},
                                {"classifier.weight", Tensor::matrix({{1, 0}, {0, 1}})},
                                {"classifier.bias", Tensor::zeros({2})}};
  const PeerNetwork net = PeerNetwork::from_parameters(cfg, std::move(p));
  const Dataset ds{Tensor::matrix({{1, 0}, {0, 1}, {2, 0}}), {0, 1, 0}, 2, ""};
  EXPECT_EQ(evaluate_top1(net, ds), 1.0);
}

TEST(Evaluate, ConstantLogitsTieBreakToClassZero) {
  PeerNetwork net(NetworkConfig{2, {4}, 3, 0});
  for (auto& p : net.parameters())
    for (double& v : p.value.mutable_data()) v = 0.0;
  EXPECT_DOUBLE_EQ(evaluate_top1(net, toy_blobs(1, 10)), 1.0 / 3.0);
}

TEST(Stage1, ZeroEpochsSnapshotsInitialization) {
  TrainConfig cfg = short_config(0);
  cfg.stage1_epochs = 0;
  PeerPair nets = make_pair();
  const PeerPair init = make_pair();
  const Stage1Result r = pretrain_stage1(nets, toy_blobs(0), toy_blobs(0), cfg);
  EXPECT_TRUE(same_parameters(r.snapshots[0], init[0]));
  EXPECT_TRUE(same_parameters(r.snapshots[1], init[1]));
  EXPECT_EQ(r.snapshots[0].mode(), NetworkMode::frozen);
  EXPECT_TRUE(r.metrics.empty());
}

TEST(Stage1, CrossEntropyFallsOverFirstEpochs) {
  TrainConfig cfg = short_config(3);
  cfg.stage1_epochs = 5;
  cfg.lr = 0.05;
  cfg.lr_milestones = {};
  const Dataset train = toy_blobs(3, 40);
  PeerPair nets = make_pair();
  const Stage1Result r = pretrain_stage1(nets, train, train, cfg);
  ASSERT_EQ(r.metrics.size(), 10u);
  for (int k = 0; k < 2; ++k)
    for (std::size_t e = 1; e < 5; ++e)
      EXPECT_LT(r.metrics[e * 2 + k].loss_ce, r.metrics[(e - 1) * 2 + k].loss_ce);
}

TEST(Stage1, UntrainedNetworkIsNearChance) {
  // Observed for these seeds and frozen: untrained accuracy stays well below
  // what one epoch of training reaches.
  const Dataset ds = toy_blobs(4, 100);
  const PeerPair nets = make_pair();
  for (const auto& net : nets) EXPECT_LT(evaluate_top1(net, ds), 0.7);
}

TEST(Stage2, CrossEntropyOnlyMatchesIndependentRuns) {
  LossWeights w;
  w.alpha = 1.0;
  w.beta = 0.0;
  w.gamma = 0.0;
  EXPECT_TRUE(distilforge::testing::degenerate_matches_reference(w, false, 1));
}

TEST(Stage2, ZeroBetaMatchesSelfDistillationOnly) {
  LossWeights w;
  w.beta = 0.0;
  EXPECT_TRUE(distilforge::testing::degenerate_matches_reference(w, true, 2));
}

TEST(Stage2, IdenticalPeersStayIdenticalWhenUpdatedSimultaneously) {
  TrainConfig cfg = short_config(6);
  cfg.update_order = UpdateOrder::simultaneous;
  const Dataset train = toy_blobs(6);
  PeerPair nets = make_pair(5, 5);
  nets[1] = PeerNetwork(nets[0].config());
  const Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
  const auto metrics = train_stage2(nets, s1.snapshots, train, train, cfg);
  EXPECT_TRUE(same_parameters(nets[0], nets[1]));
  for (std::size_t i = 0; i + 1 < metrics.size(); i += 2) {
    MetricsRecord a = metrics[i], b = metrics[i + 1];
    b.net = a.net;
    EXPECT_EQ(a, b);
  }
}

TEST(Stage2, SequentialUpdatesBreakPeerSymmetry) {
  TrainConfig cfg = short_config(6);
  const Dataset train = toy_blobs(6);
  PeerPair nets{PeerNetwork(NetworkConfig{2, {8, 4}, 3, 5}), PeerNetwork(NetworkConfig{2, {8, 4}, 3, 5})};
  const Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
  train_stage2(nets, s1.snapshots, train, train, cfg);
  EXPECT_FALSE(same_parameters(nets[0], nets[1]));
}

TEST(Stage2, RepeatedRunsAreBitIdentical) {
  auto run = [] {
    TrainConfig cfg = short_config(8);
    const Dataset train = toy_blobs(8);
    PeerPair nets = make_pair();
    const Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
    auto m = train_stage2(nets, s1.snapshots, train, train, cfg);
    return std::make_tuple(m, nets[0].clone(), nets[1].clone());
  };
  const auto [m1, a1, b1] = run();
  const auto [m2, a2, b2] = run();
  EXPECT_EQ(m1, m2);
  EXPECT_TRUE(same_parameters(a1, a2));
  EXPECT_TRUE(same_parameters(b1, b2));
}

TEST(Stage2, MetricsAreFiniteAndComplete) {
  TrainConfig cfg = short_config(9);
  const Dataset train = toy_blobs(9);
  PeerPair nets = make_pair();
  const Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
  const auto metrics = train_stage2(nets, s1.snapshots, train, train, cfg);
  ASSERT_EQ(metrics.size(), 2 * cfg.stage2_epochs);
  for (const auto& r : metrics) {
    EXPECT_EQ(r.stage, 2);
    for (double v : {r.loss_total, r.loss_ce, r.loss_kl_mutual, r.loss_dd, r.loss_ad, r.loss_sd})
      EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(r.loss_kl_mutual, 0.0);
  }
  std::ostringstream csv;
  write_metrics_csv(csv, metrics);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), metrics_csv_header());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(metrics.size() + 1));
}

TEST(Stage2, ExplodingLearningRateReportsDivergence) {
  TrainConfig cfg = short_config(10);
  cfg.stage1_epochs = 0;
  cfg.lr = 1e200;
  cfg.momentum = 0.0;
  const Dataset train = toy_blobs(10);
  PeerPair nets = make_pair();
  const Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
  try {
    train_stage2(nets, s1.snapshots, train, train, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.stage(), 2);
    EXPECT_EQ(e.epoch(), 0u);
  }
}
