// SPDX-License-Identifier: Apache-2.0
#include "distilforge/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "distilforge/rng.hpp"

namespace distilforge {

namespace {

// Stream identifiers mixed into the run seed.
constexpr std::uint64_t kStage1Shuffle = 1;
constexpr std::uint64_t kStage2Shuffle = 2;
constexpr std::uint64_t kTupleStream = 3;

constexpr std::size_t kEvalChunk = 1024;

}  // namespace

std::uint64_t stage_shuffle_seed(std::uint64_t run_seed, int stage) {
  return derive_seed(run_seed, {stage == 1 ? kStage1Shuffle : kStage2Shuffle});
}

std::uint64_t tuple_seed(std::uint64_t run_seed, std::size_t epoch, std::size_t batch) {
  return derive_seed(run_seed, {kTupleStream, epoch, batch});
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::A: return "A";
    case Variant::B: return "B";
    case Variant::C: return "C";
    case Variant::D: return "D";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "A") return Variant::A;
  if (s == "B") return Variant::B;
  if (s == "C") return Variant::C;
  if (s == "D") return Variant::D;
  throw std::invalid_argument("variant: expected one of A, B, C, D");
}

std::string_view to_string(UpdateOrder o) {
  return o == UpdateOrder::sequential ? "sequential" : "simultaneous";
}

UpdateOrder parse_update_order(std::string_view s) {
  if (s == "sequential") return UpdateOrder::sequential;
  if (s == "simultaneous") return UpdateOrder::simultaneous;
  throw std::invalid_argument("update_order: expected sequential or simultaneous");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size: must be at least 1");
  if (!std::isfinite(lr) || !(lr > 0.0)) throw std::invalid_argument("lr: must be positive");
  for (std::size_t i = 0; i < lr_milestones.size(); ++i) {
    if (i > 0 && lr_milestones[i] <= lr_milestones[i - 1])
      throw std::invalid_argument("lr_milestones: must be strictly increasing");
    if (lr_milestones[i] >= stage2_epochs)
      throw std::invalid_argument("lr_milestones: must be below stage2_epochs");
  }
  if (!(lr_factor > 0.0 && lr_factor <= 1.0))
    throw std::invalid_argument("lr_factor: must lie in (0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum: must lie in [0, 1)");
  if (!std::isfinite(weight_decay) || weight_decay < 0.0)
    throw std::invalid_argument("weight_decay: must be non-negative");
  weights.validate();
}

EffectiveObjective objective_for(const TrainConfig& config) {
  EffectiveObjective obj{config.weights, {}};
  switch (config.variant) {
    case Variant::A: break;
    case Variant::B:
      obj.weights.gamma = 0.0;
      obj.terms.self_distill = false;
      break;
    case Variant::C:
      obj.weights.beta2 = 0.0;
      obj.terms.mutual_kl = false;
      break;
    case Variant::D:
      obj.weights.beta1 = 0.0;
      obj.terms.distance = false;
      obj.terms.angle = false;
      break;
  }
  return obj;
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  std::size_t passed = 0;
  for (std::size_t m : config.lr_milestones) passed += m <= epoch ? 1 : 0;
  // Dividing by the integer-valued reciprocal keeps decimal schedules exact
  // (0.1 -> 0.02 rather than 0.1 * 0.2 = 0.020000000000000004).
  double divisor = 1.0;
  const double step = 1.0 / config.lr_factor;
  for (std::size_t i = 0; i < passed; ++i) divisor *= step;
  return config.lr / divisor;
}

// ---- optimizer -------------------------------------------------------------

OptimizerState::OptimizerState(const PeerNetwork& net) {
  for (const auto& p : net.parameters()) velocity.emplace_back(p.value.numel(), 0.0);
}

void sgd_step(std::span<double> weights, std::span<const double> grads,
              std::span<double> velocity, double lr, double momentum, double weight_decay) {
  if (weights.size() != grads.size() || weights.size() != velocity.size())
    throw ShapeError("sgd_step: weights, grads and velocity differ in size");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double g = grads[i] + weight_decay * weights[i];
    velocity[i] = momentum * velocity[i] + g;
    weights[i] -= lr * velocity[i];
  }
}

void sgd_step(PeerNetwork& net, OptimizerState& state, double lr, double momentum,
              double weight_decay) {
  auto& params = net.parameters();
  if (state.velocity.size() != params.size())
    throw ShapeError("sgd_step: optimizer state does not match network");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].value.has_grad())
      throw std::logic_error("sgd_step: parameter " + params[k].name + " has no gradient");
    for (double g : params[k].value.grad())
      if (!std::isfinite(g))
        throw NonFiniteError("sgd_step: non-finite gradient in " + params[k].name);
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].value;
    sgd_step(p.mutable_data(), p.grad(), state.velocity[k], lr, momentum, weight_decay);
  }
}

// ---- evaluation ------------------------------------------------------------

double evaluate_top1(const PeerNetwork& net, const Dataset& ds) {
  NoGradGuard no_grad;
  std::size_t correct = 0;
  const std::size_t n = ds.size(), m = ds.num_classes;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, n - start);
    idx.resize(len);
    for (std::size_t i = 0; i < len; ++i) idx[i] = start + i;
    const Batch b = gather_batch(ds, idx);
    const Tensor logits = net.forward(b.features).logits;
    if (logits.cols() != m) throw ShapeError("evaluate_top1: class count mismatch");
    const auto z = logits.data();
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < m; ++j)
        if (z[i * m + j] > z[i * m + best]) best = j;
      correct += best == ds.labels[start + i] ? 1 : 0;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

// ---- metrics ---------------------------------------------------------------

std::string_view metrics_csv_header() {
  return "epoch,stage,net,lr,loss_total,loss_ce,loss_kl_mutual,loss_dd,loss_ad,loss_sd,"
         "train_top1,test_top1,pi_collapses,triples_skipped";
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << metrics_csv_header() << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& r : records) {
    out << r.epoch << ',' << r.stage << ',' << r.net << ',' << num(r.lr) << ','
        << num(r.loss_total) << ',' << num(r.loss_ce) << ',' << num(r.loss_kl_mutual) << ','
        << num(r.loss_dd) << ',' << num(r.loss_ad) << ',' << num(r.loss_sd) << ','
        << num(r.train_top1) << ',' << num(r.test_top1) << ',' << r.pi_collapses << ','
        << r.triples_skipped << '\n';
  }
}

DivergenceError::DivergenceError(int stage, std::size_t epoch, int net, const std::string& what)
    : std::runtime_error("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) +
                         " net " + std::to_string(net) + ": " + what),
      stage_(stage),
      epoch_(epoch),
      net_(net) {}

// ---- stage 1 ---------------------------------------------------------------

namespace {

// Sample-weighted running means of the per-batch losses.
struct EpochAccumulator {
  double samples = 0.0;
  double total = 0.0, ce = 0.0, kl = 0.0, dd = 0.0, ad = 0.0, sd = 0.0;
  RelationDiagnostics diag;

  void add(const LossBreakdown& l, std::size_t batch) {
    const double w = static_cast<double>(batch);
    samples += w;
    total += w * l.total.item();
    ce += w * l.cross_entropy;
    kl += w * l.kl_mutual;
    dd += w * l.distance;
    ad += w * l.angle;
    sd += w * l.self_distill;
    diag.pi_collapses += l.diagnostics.pi_collapses;
    diag.triples_skipped += l.diagnostics.triples_skipped;
    diag.small_batches += l.diagnostics.small_batches;
  }

  MetricsRecord record(std::size_t epoch, int stage, int net, double lr) const {
    MetricsRecord r;
    r.epoch = epoch;
    r.stage = stage;
    r.net = net;
    r.lr = lr;
    r.loss_total = total / samples;
    r.loss_ce = ce / samples;
    r.loss_kl_mutual = kl / samples;
    r.loss_dd = dd / samples;
    r.loss_ad = ad / samples;
    r.loss_sd = sd / samples;
    r.pi_collapses = diag.pi_collapses;
    r.triples_skipped = diag.triples_skipped;
    r.small_batches = diag.small_batches;
    return r;
  }
};

void check_loss(double value, int stage, std::size_t epoch, int net) {
  if (!std::isfinite(value)) throw DivergenceError(stage, epoch, net, "non-finite loss");
}

}  // namespace

Stage1Result pretrain_stage1(PeerPair& nets, const Dataset& train, const Dataset& test,
                             const TrainConfig& config) {
  config.validate();
  std::vector<MetricsRecord> metrics;
  std::array<OptimizerState, 2> opt{OptimizerState(nets[0]), OptimizerState(nets[1])};
  std::array<double, 2> previous_ce{0.0, 0.0};
  std::array<bool, 2> converged{false, false};
  const std::uint64_t shuffle_seed = stage_shuffle_seed(config.seed, 1);

  for (std::size_t epoch = 0; epoch < config.stage1_epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    const auto batches = make_batches(train, config.batch_size, shuffle_seed, epoch);
    for (int k = 0; k < 2; ++k) {
      EpochAccumulator acc;
      try {
        for (const Batch& b : batches) {
          const ForwardOutput out = nets[k].forward(b.features);
          LossBreakdown l;
          l.total = cross_entropy(out.logits, b.one_hot);
          l.cross_entropy = l.total.item();
          check_loss(l.cross_entropy, 1, epoch, k + 1);
          nets[k].zero_grad();
          l.total.backward();
          sgd_step(nets[k], opt[k], lr, config.momentum, config.weight_decay);
          acc.add(l, b.size());
        }
      } catch (const NonFiniteError& e) {
        throw DivergenceError(1, epoch, k + 1, e.what());
      }
      MetricsRecord r = acc.record(epoch, 1, k + 1, lr);
      r.train_top1 = evaluate_top1(nets[k], train);
      r.test_top1 = evaluate_top1(nets[k], test);
      if (epoch > 0)
        converged[k] = std::abs(previous_ce[k] - r.loss_ce) < 1e-3 * std::abs(previous_ce[k]);
      previous_ce[k] = r.loss_ce;
      metrics.push_back(r);
    }
  }
  return {PeerPair{nets[0].snapshot(), nets[1].snapshot()}, std::move(metrics), converged};
}

// ---- stage 2 ---------------------------------------------------------------

std::vector<MetricsRecord> train_stage2(PeerPair& nets, const PeerPair& snapshots,
                                        const Dataset& train, const Dataset& test,
                                        const TrainConfig& config) {
  config.validate();
  const EffectiveObjective obj = objective_for(config);
  std::vector<MetricsRecord> metrics;
  std::array<OptimizerState, 2> opt{OptimizerState(nets[0]), OptimizerState(nets[1])};
  const std::uint64_t shuffle_seed = stage_shuffle_seed(config.seed, 2);

  auto detached_forward = [](const PeerNetwork& net, const Tensor& x) {
    NoGradGuard no_grad;
    return net.forward(x);
  };

  for (std::size_t epoch = 0; epoch < config.stage2_epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    const auto batches = make_batches(train, config.batch_size, shuffle_seed, epoch);
    std::array<EpochAccumulator, 2> acc;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& b = batches[bi];
      const TupleSets tuples =
          TupleSets::build(b.size(), tuple_seed(config.seed, epoch, bi));
      std::array<ForwardOutput, 2> pre_step;
      if (config.update_order == UpdateOrder::simultaneous)
        pre_step = {detached_forward(nets[0], b.features), detached_forward(nets[1], b.features)};

      for (int k = 0; k < 2; ++k) {
        const int peer = 1 - k;
        try {
          const ForwardOutput peer_out = config.update_order == UpdateOrder::sequential
                                             ? detached_forward(nets[peer], b.features)
                                             : pre_step[peer];
          const Tensor snapshot_logits = detached_forward(snapshots[k], b.features).logits;
          const ForwardOutput self = nets[k].forward(b.features);
          LossBreakdown l = total_loss(self, peer_out, snapshot_logits, b.one_hot, tuples,
                                       obj.weights, obj.terms);
          check_loss(l.total.item(), 2, epoch, k + 1);
          nets[k].zero_grad();
          l.total.backward();
          sgd_step(nets[k], opt[k], lr, config.momentum, config.weight_decay);
          acc[k].add(l, b.size());
        } catch (const NonFiniteError& e) {
          throw DivergenceError(2, epoch, k + 1, e.what());
        }
      }
    }
    for (int k = 0; k < 2; ++k) {
      MetricsRecord r = acc[k].record(epoch, 2, k + 1, lr);
      r.train_top1 = evaluate_top1(nets[k], train);
      r.test_top1 = evaluate_top1(nets[k], test);
      metrics.push_back(r);
    }
  }
  return metrics;
}

}  // namespace distilforge
