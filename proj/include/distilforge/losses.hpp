// SPDX-License-Identifier: Apache-2.0
//
// Response-based (CE, mutual KL, self-distillation KL) and relation-based
// (distance-wise and angle-wise) distillation losses, and their composition
// into the per-peer collaborative objective. Every loss is a batch mean.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "distilforge/model.hpp"
#include "distilforge/tensor.hpp"

namespace distilforge {

struct LossWeights {
  double alpha = 0.4;        // cross-entropy
  double beta = 0.4;         // mutual distillation
  double gamma = 0.6;        // self-distillation
  double beta1 = 2.0;        // angle term inside the relation loss
  double beta2 = 2.0;        // mutual KL inside the mutual distillation loss
  double temperature = 3.0;  // self-distillation softening

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Which relation/response terms participate, on top of the weights.
/// Ablation variants switch these off.
struct ObjectiveTerms {
  bool distance = true;
  bool angle = true;
  bool mutual_kl = true;
  bool self_distill = true;
};

/// Above this batch size the triple set is subsampled.
inline constexpr std::size_t kTripleCapBatch = 16;
inline constexpr std::size_t kTripleCap = 16 * 15 * 14;

/// Ordered index tuples of distinct samples within one batch.
struct TupleSets {
  std::size_t batch_size = 0;
  std::vector<std::array<std::size_t, 2>> pairs;
  std::vector<Triple> triples;
  bool capped = false;

  /// All ordered pairs; all ordered triples, or a seeded uniform subsample of
  /// kTripleCap of them when batch_size > kTripleCapBatch. Triples come out in
  /// lexicographic order either way.
  static TupleSets build(std::size_t batch_size, std::uint64_t seed);
};

// ---- response-based --------------------------------------------------------

/// Batch mean of -log softmax(logits)[true class]. Labels are one-hot rows.
Tensor cross_entropy(const Tensor& logits, const Tensor& one_hot);

/// Batch mean of KL(softmax(teacher) || softmax(student)) at temperature one.
/// The teacher is treated as a constant.
Tensor kl_mutual(const Tensor& student_logits, const Tensor& teacher_logits);

/// Batch mean of KL(softmax(teacher / t) || softmax(student / t)). No t^2 factor.
Tensor self_distill_kl(const Tensor& student_logits, const Tensor& teacher_logits, double t);

// ---- relation-based --------------------------------------------------------

double huber(double a, double b);

struct DistancePotentials {
  Tensor values;            // [n x n], zero diagonal; entry (u, v) is the potential of (u, v)
  Tensor normalizer;        // scalar mean pair distance
  bool degenerate = false;  // normalizer below 1e-8: values forced to zero
};

inline constexpr double kDegenerateNormalizer = 1e-8;

/// Pairwise distances divided by their mean over ordered pairs.
DistancePotentials distance_potentials(const Tensor& embedding);

struct AnglePotentials {
  Tensor values;            // one cosine per triple
  std::vector<char> valid;  // zero for triples with a coincident pair
  std::size_t skipped = 0;
};

AnglePotentials angle_potentials(const Tensor& embedding, const TupleSets& tuples);

struct RelationDiagnostics {
  std::size_t pi_collapses = 0;     // degenerate distance normalizers seen
  std::size_t triples_skipped = 0;  // triples dropped for a coincident pair
  std::size_t small_batches = 0;    // batches too small for a relation term
};

struct RelationLoss {
  Tensor distance;  // L_DD, mean Huber over ordered pairs
  Tensor angle;     // L_AD, mean Huber over usable triples
  Tensor total;     // distance + beta1 * angle, restricted to enabled terms
  RelationDiagnostics diagnostics;
};

/// Relation distillation between this network's embedding and its peer's.
/// The peer embedding is detached.
RelationLoss relation_distill_loss(const Tensor& embedding, const Tensor& peer_embedding,
                                   const TupleSets& tuples, const LossWeights& weights,
                                   const ObjectiveTerms& terms = {});

struct MutualLoss {
  RelationLoss relation;
  Tensor kl;     // kl_mutual(self, peer)
  Tensor total;  // relation.total + beta2 * kl
};

MutualLoss mutual_distill_loss(const ForwardOutput& self, const ForwardOutput& peer,
                               const TupleSets& tuples, const LossWeights& weights,
                               const ObjectiveTerms& terms = {});

struct LossBreakdown {
  Tensor total;  // alpha CE + beta L_MD + gamma L_SD
  double cross_entropy = 0.0;
  double kl_mutual = 0.0;
  double distance = 0.0;
  double angle = 0.0;
  double self_distill = 0.0;
  RelationDiagnostics diagnostics;
};

/// Full per-peer objective. `snapshot_logits` come from the frozen stage-one
/// copy of this network on the same batch. Terms whose weight is zero, or
/// that `terms` disables, are evaluated for reporting but left out of the
/// graph of `total`.
LossBreakdown total_loss(const ForwardOutput& self, const ForwardOutput& peer,
                         const Tensor& snapshot_logits, const Tensor& one_hot,
                         const TupleSets& tuples, const LossWeights& weights,
                         const ObjectiveTerms& terms = {});

}  // namespace distilforge
