// SPDX-License-Identifier: Apache-2.0
//
// Two-stage collaborative training: stage one pre-trains both peers with
// cross-entropy and freezes a snapshot of each; stage two trains them
// jointly, each against its own objective with the peer held constant.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "distilforge/data.hpp"
#include "distilforge/losses.hpp"
#include "distilforge/model.hpp"

namespace distilforge {

/// Ablation variants. A: full objective. B: no self-distillation.
/// C: no mutual KL. D: no relation transfer.
enum class Variant { A, B, C, D };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

/// Sequential: network 2 sees network 1's post-step parameters within a
/// batch. Simultaneous: both see the pre-step peer.
enum class UpdateOrder { sequential, simultaneous };

std::string_view to_string(UpdateOrder o);
UpdateOrder parse_update_order(std::string_view s);

struct TrainConfig {
  std::size_t stage1_epochs = 20;
  std::size_t stage2_epochs = 20;
  std::size_t batch_size = 32;
  double lr = 0.1;
  std::vector<std::size_t> lr_milestones{6, 12, 16};
  double lr_factor = 0.2;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  LossWeights weights;
  Variant variant = Variant::A;
  UpdateOrder update_order = UpdateOrder::sequential;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct EffectiveObjective {
  LossWeights weights;
  ObjectiveTerms terms;
};

/// Applies the variant's switches to the configured weights.
EffectiveObjective objective_for(const TrainConfig& config);

/// Learning rate for a (stage-local) epoch: lr scaled by lr_factor once per
/// milestone that is <= epoch.
double lr_at(std::size_t epoch, const TrainConfig& config);

/// Momentum buffers, one per parameter tensor, zero-initialized.
struct OptimizerState {
  std::vector<std::vector<double>> velocity;

  explicit OptimizerState(const PeerNetwork& net);
};

/// g' = g + wd w;  v = momentum v + g';  w = w - lr v.
void sgd_step(std::span<double> weights, std::span<const double> grads,
              std::span<double> velocity, double lr, double momentum, double weight_decay);

/// Applies sgd_step to every parameter. Non-finite gradients throw
/// NonFiniteError before anything is modified.
void sgd_step(PeerNetwork& net, OptimizerState& state, double lr, double momentum,
              double weight_decay);

/// Fraction of rows whose argmax logit (lowest index on ties) equals the label.
double evaluate_top1(const PeerNetwork& net, const Dataset& ds);

/// One CSV row: a network's measurements after one epoch.
struct MetricsRecord {
  std::size_t epoch = 0;
  int stage = 1;
  int net = 1;
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_ce = 0.0;
  double loss_kl_mutual = 0.0;
  double loss_dd = 0.0;
  double loss_ad = 0.0;
  double loss_sd = 0.0;
  double train_top1 = 0.0;
  double test_top1 = 0.0;
  std::size_t pi_collapses = 0;
  std::size_t triples_skipped = 0;
  std::size_t small_batches = 0;  // not part of the CSV schema

  bool operator==(const MetricsRecord&) const = default;
};

std::string_view metrics_csv_header();
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int stage, std::size_t epoch, int net, const std::string& what);

  int stage() const { return stage_; }
  std::size_t epoch() const { return epoch_; }
  int net() const { return net_; }

 private:
  int stage_;
  std::size_t epoch_;
  int net_;
};

using PeerPair = std::array<PeerNetwork, 2>;

/// Seed of the batch shuffle used in `stage` (1 or 2) of a run.
std::uint64_t stage_shuffle_seed(std::uint64_t run_seed, int stage);
/// Seed of the triple subsample for one stage-two batch.
std::uint64_t tuple_seed(std::uint64_t run_seed, std::size_t epoch, std::size_t batch);

struct Stage1Result {
  PeerPair snapshots;
  std::vector<MetricsRecord> metrics;
  /// Per network: relative change of the final epoch's CE below 1e-3.
  std::array<bool, 2> converged{false, false};
};

/// Trains each network alone with cross-entropy, then snapshots both.
Stage1Result pretrain_stage1(PeerPair& nets, const Dataset& train, const Dataset& test,
                             const TrainConfig& config);

/// Collaborative training. For every batch each network computes its own
/// objective against a fresh, detached forward pass of its peer and steps.
std::vector<MetricsRecord> train_stage2(PeerPair& nets, const PeerPair& snapshots,
                                        const Dataset& train, const Dataset& test,
                                        const TrainConfig& config);

}  // namespace distilforge
