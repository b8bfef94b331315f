// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "distilforge/model.hpp"
#include "support.hpp"

using namespace distilforge;

namespace {

const NetworkConfig kSmall{2, {8, 4}, 3, 1};

}  // namespace

TEST(NetworkConfig, ParameterCount) {
  EXPECT_EQ(kSmall.parameter_count(), 75u);
  std::size_t total = 0;
  for (const auto& p : PeerNetwork(kSmall).parameters()) total += p.value.numel();
  EXPECT_EQ(total, 75u);
}

TEST(NetworkConfig, RejectsEmptyShapes) {
  EXPECT_THROW((NetworkConfig{0, {4}, 3, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((NetworkConfig{2, {}, 3, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((NetworkConfig{2, {4, 0}, 3, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((NetworkConfig{2, {4}, 1, 0}.validate()), std::invalid_argument);
}

TEST(PeerNetwork, SameSeedIsBitIdentical) {
  EXPECT_TRUE(same_parameters(PeerNetwork(kSmall), PeerNetwork(kSmall)));
}

TEST(PeerNetwork, DifferentSeedsDiffer) {
  NetworkConfig other = kSmall;
  other.init_seed = 2;
  EXPECT_FALSE(same_parameters(PeerNetwork(kSmall), PeerNetwork(other)));
}

TEST(PeerNetwork, GlorotBoundsAndZeroBias) {
  const PeerNetwork net(NetworkConfig{10, {20}, 5, 3});
  const double bound = std::sqrt(6.0 / 30.0);
  for (double w : net.parameter("hidden.0.weight").data()) EXPECT_LE(std::abs(w), bound);
  for (double b : net.parameter("hidden.0.bias").data()) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(net.parameter("classifier.weight").shape(), (Shape{20, 5}));
}

TEST(PeerNetwork, ZeroParametersGiveUniformPrediction) {
  PeerNetwork net(kSmall);
  for (auto& p : net.parameters())
    for (double& v : p.value.mutable_data()) v = 0.0;
  const ForwardOutput out = net.forward(Tensor::matrix({{0.3, -2.0}, {1.0, 4.0}}));
  for (double z : out.logits.data()) EXPECT_EQ(z, 0.0);
  const Tensor p = softmax_with_temperature(out.logits, 1.0);
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(PeerNetwork, HandComputedForward) {
  // x = [1, 2]; hidden pre-activation [2, 3] + bias [0.5, -4] -> relu [2.5, 0];
  // logits [2.5, 0] W2 + [0.1, 0.2] = [2.6, 5.2].
  const NetworkConfig cfg{2, {2}, 2, 0};
  std::vector<NamedParameter> params{
      {"hidden.0.weight", Tensor::matrix({{1, -1}, {0.5, 2}})},
      {"hidden.0.bias", Tensor::from({2}, {0.5, -4})},
      {"classifier.weight", Tensor::matrix({{1, 2}, {3, 4}})},
      {"classifier.bias", Tensor::from({2}, {0.1, 0.2})}};
  const PeerNetwork net = PeerNetwork::from_parameters(cfg, std::move(params));
  const ForwardOutput out = net.forward(Tensor::matrix({{1, 2}}));
  EXPECT_EQ(out.embedding.at(0), 2.5);
  EXPECT_EQ(out.embedding.at(1), 0.0);
  EXPECT_DOUBLE_EQ(out.logits.at(0), 2.6);
  EXPECT_DOUBLE_EQ(out.logits.at(1), 5.2);
}

TEST(PeerNetwork, ForwardShapes) {
  const ForwardOutput out = PeerNetwork(kSmall).forward(Tensor::zeros({5, 2}));
  EXPECT_EQ(out.embedding.shape(), (Shape{5, 4}));
  EXPECT_EQ(out.logits.shape(), (Shape{5, 3}));
  EXPECT_THROW(PeerNetwork(kSmall).forward(Tensor::zeros({5, 3})), ShapeError);
}

TEST(PeerNetwork, SnapshotIsFrozenAndIndependent) {
  PeerNetwork net(kSmall);
  const PeerNetwork snap = net.snapshot();
  EXPECT_EQ(snap.mode(), NetworkMode::frozen);
  for (const auto& p : snap.parameters()) EXPECT_FALSE(p.value.requires_grad());
  const Tensor x = Tensor::matrix({{0.5, -1.0}});
  const Tensor first = snap.forward(x).logits;
  const std::vector<double> before(first.data().begin(), first.data().end());
  for (auto& p : net.parameters())
    for (double& v : p.value.mutable_data()) v += 1.0;
  const Tensor after = snap.forward(x).logits;
  EXPECT_EQ(std::vector<double>(after.data().begin(), after.data().end()), before);
  EXPECT_FALSE(same_parameters(net, snap));
}

TEST(PeerNetwork, CloneKeepsTrainingMode) {
  const PeerNetwork net(kSmall);
  const PeerNetwork copy = net.clone();
  EXPECT_EQ(copy.mode(), NetworkMode::training);
  EXPECT_TRUE(same_parameters(net, copy));
  EXPECT_FALSE(copy.parameters()[0].value.same_node(net.parameters()[0].value));
}

TEST(PeerNetwork, FromParametersRejectsWrongLayout) {
  std::vector<NamedParameter> params{{"hidden.0.weight", Tensor::zeros({3, 2})}};
  EXPECT_THROW(PeerNetwork::from_parameters(NetworkConfig{2, {2}, 2, 0}, std::move(params)),
               std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const PeerNetwork net(kSmall);
  const PeerNetwork back = checkpoint_from_json(checkpoint_to_json(net));
  EXPECT_TRUE(same_parameters(net, back));
  EXPECT_EQ(back.config(), kSmall);

  const auto dir = distilforge::testing::scratch_dir("checkpoint");
  save_checkpoint(dir / "net.json", net);
  EXPECT_TRUE(same_parameters(net, load_checkpoint(dir / "net.json")));
}

TEST(Checkpoint, MissingFileThrows) {
  EXPECT_THROW(load_checkpoint("/nonexistent/net.json"), std::runtime_error);
}
