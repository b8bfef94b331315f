// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit tests and the acceptance binary.
#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "distilforge/data.hpp"
#include "distilforge/experiment.hpp"
#include "distilforge/losses.hpp"
#include "distilforge/model.hpp"
#include "distilforge/trainer.hpp"

namespace distilforge::testing {

inline Dataset toy_blobs(std::uint64_t seed, std::size_t per_class = 20) {
  return synth_blobs({3, per_class, 2, 0.5, seed});
}

inline TrainConfig short_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.stage1_epochs = 2;
  cfg.stage2_epochs = 3;
  cfg.batch_size = 16;
  cfg.lr_milestones = {2};
  cfg.seed = seed;
  return cfg;
}

inline PeerPair make_pair(std::uint64_t a = 11, std::uint64_t b = 12) {
  return PeerPair{PeerNetwork(NetworkConfig{2, {8, 4}, 3, a}),
                  PeerNetwork(NetworkConfig{2, {6, 4}, 3, b})};
}

/// Hand-written stage-two loop for a single network that uses only
/// alpha * CE (+ gamma * SD when `self_distill`). Shares batching, schedule
/// and optimizer with the trainer but none of its loss composition.
inline void reference_stage2(PeerNetwork& net, const PeerNetwork& snapshot, const Dataset& train,
                             const TrainConfig& cfg, bool self_distill) {
  OptimizerState opt(net);
  const std::uint64_t shuffle = stage_shuffle_seed(cfg.seed, 2);
  for (std::size_t epoch = 0; epoch < cfg.stage2_epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    for (const Batch& b : make_batches(train, cfg.batch_size, shuffle, epoch)) {
      Tensor snap;
      {
        NoGradGuard no_grad;
        snap = snapshot.forward(b.features).logits;
      }
      const Tensor logits = net.forward(b.features).logits;
      Tensor loss = cross_entropy(logits, b.one_hot) * cfg.weights.alpha;
      if (self_distill)
        loss = loss + self_distill_kl(logits, snap, cfg.weights.temperature) * cfg.weights.gamma;
      net.zero_grad();
      loss.backward();
      sgd_step(net, opt, lr, cfg.momentum, cfg.weight_decay);
    }
  }
}

/// True when a two-peer stage-two run with the given weights leaves both
/// networks bit-identical to independent reference runs.
inline bool degenerate_matches_reference(const LossWeights& weights, bool self_distill,
                                         std::uint64_t seed) {
  const Dataset train = toy_blobs(seed);
  TrainConfig cfg = short_config(seed);
  cfg.weights = weights;
  PeerPair nets = make_pair();
  const Stage1Result s1 = pretrain_stage1(nets, train, train, cfg);
  PeerPair ref{nets[0].clone(), nets[1].clone()};
  train_stage2(nets, s1.snapshots, train, train, cfg);
  for (int k = 0; k < 2; ++k) reference_stage2(ref[k], s1.snapshots[k], train, cfg, self_distill);
  return same_parameters(nets[0], ref[0]) && same_parameters(nets[1], ref[1]);
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("distilforge_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Desk-scale blobs experiment: 3 classes, 100 per class, spread 0.5.
inline nlohmann::json blobs_experiment(std::size_t seeds, std::uint64_t seed = 0) {
  return {
      {"dataset",
       {{"kind", "blobs"}, {"num_classes", 3}, {"per_class", 100}, {"test_per_class", 100},
        {"dim", 2}, {"spread", 0.5}, {"seed", 7}}},
      {"networks",
       {{{"input_dim", 2}, {"hidden_dims", {16, 8}}, {"num_classes", 3}, {"init_seed", 1}},
        {{"input_dim", 2}, {"hidden_dims", {12, 8}}, {"num_classes", 3}, {"init_seed", 2}}}},
      {"train",
       {{"stage1_epochs", 10}, {"stage2_epochs", 20}, {"batch_size", 32}, {"lr", 0.1},
        {"lr_milestones", {6, 12, 16}}, {"lr_factor", 0.2}, {"momentum", 0.9},
        {"weight_decay", 5e-4}, {"seed", seed}, {"variant", "A"}}},
      {"seeds", seeds}};
}

inline int run_command(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace distilforge::testing
