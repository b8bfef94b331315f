// SPDX-License-Identifier: Apache-2.0
#include "distilforge/losses.hpp"

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>

#include "distilforge/rng.hpp"

namespace distilforge {

void LossWeights::validate() const {
  auto check = [](double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(std::string(field) + ": must be finite and non-negative");
  };
  check(alpha, "alpha");
  check(beta, "beta");
  check(gamma, "gamma");
  check(beta1, "beta1");
  check(beta2, "beta2");
  if (!std::isfinite(temperature) || !(temperature > 0.0))
    throw std::invalid_argument("temperature: must be positive");
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0)
    throw std::invalid_argument("alpha: at least one of alpha, beta, gamma must be positive");
}

// ---- tuple sets ------------------------------------------------------------

namespace {

// Decodes a rank in [0, n(n-1)(n-2)) into the ordered triple of that rank.
Triple decode_triple(std::uint64_t rank, std::size_t n) {
  const std::uint64_t per_u = std::uint64_t(n - 1) * (n - 2);
  const std::size_t u = static_cast<std::size_t>(rank / per_u);
  const std::uint64_t rem = rank % per_u;
  std::size_t v = static_cast<std::size_t>(rem / (n - 2));
  std::size_t w = static_cast<std::size_t>(rem % (n - 2));
  if (v >= u) ++v;
  const std::size_t lo = std::min(u, v), hi = std::max(u, v);
  if (w >= lo) ++w;
  if (w >= hi) ++w;
  return {u, v, w};
}

}  // namespace

TupleSets TupleSets::build(std::size_t batch_size, std::uint64_t seed) {
  TupleSets t;
  t.batch_size = batch_size;
  const std::size_t n = batch_size;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v) t.pairs.push_back({u, v});
  if (n < 3) return t;

  if (n <= kTripleCapBatch) {
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t w = 0; w < n; ++w)
          if (u != v && v != w && u != w) t.triples.push_back({u, v, w});
    return t;
  }

  // Floyd's sampling without replacement over triple ranks.
  const std::uint64_t total = std::uint64_t(n) * (n - 1) * (n - 2);
  Rng rng(seed);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = total - kTripleCap; j < total; ++j) {
    const std::uint64_t r = rng.below(j + 1);
    if (!chosen.insert(r).second) chosen.insert(j);
  }
  t.triples.reserve(chosen.size());
  for (std::uint64_t r : chosen) t.triples.push_back(decode_triple(r, n));
  t.capped = true;
  return t;
}

// ---- response-based --------------------------------------------------------

Tensor cross_entropy(const Tensor& logits, const Tensor& one_hot) {
  if (logits.shape() != one_hot.shape())
    throw ShapeError("cross_entropy: logits " + shape_string(logits.shape()) + " vs labels " +
                     shape_string(one_hot.shape()));
  const std::size_t n = one_hot.rows(), m = one_hot.cols();
  const auto y = one_hot.data();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = y[i * m + j];
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("cross_entropy: label row " + std::to_string(i) +
                                    " is not one-hot");
      row += v;
    }
    if (row != 1.0)
      throw std::invalid_argument("cross_entropy: label row " + std::to_string(i) +
                                  " does not sum to 1");
  }
  Tensor log_p = log_softmax_with_temperature(logits, 1.0);
  return sum(mul(log_p, one_hot.detach())) * (-1.0 / static_cast<double>(n));
}

namespace {

Tensor softened_kl(const Tensor& student_logits, const Tensor& teacher_logits, double t,
                   const char* op) {
  if (student_logits.shape() != teacher_logits.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(student_logits.shape()) + " vs " +
                     shape_string(teacher_logits.shape()));
  const Tensor teacher = teacher_logits.detach();
  const Tensor q = softmax_with_temperature(teacher, t);
  const Tensor log_q = log_softmax_with_temperature(teacher, t);
  const Tensor log_p = log_softmax_with_temperature(student_logits, t);
  const double n = static_cast<double>(student_logits.rows());
  return sum(mul(sub(log_q, log_p), q)) / n;
}

}  // namespace

Tensor kl_mutual(const Tensor& student_logits, const Tensor& teacher_logits) {
  return softened_kl(student_logits, teacher_logits, 1.0, "kl_mutual");
}

Tensor self_distill_kl(const Tensor& student_logits, const Tensor& teacher_logits, double t) {
  if (!(t > 0.0)) throw std::domain_error("self_distill_kl: temperature must be positive");
  return softened_kl(student_logits, teacher_logits, t, "self_distill_kl");
}

// ---- relation-based --------------------------------------------------------

double huber(double a, double b) {
  const double r = std::abs(a - b);
  return r <= 1.0 ? 0.5 * r * r : r - 0.5;
}

DistancePotentials distance_potentials(const Tensor& embedding) {
  const std::size_t n = embedding.rows();
  Tensor dist = pairwise_l2(embedding);
  Tensor normalizer = sum(dist) / static_cast<double>(n * (n - 1));
  if (normalizer.item() < kDegenerateNormalizer)
    return {Tensor::zeros({n, n}), normalizer.detach(), true};
  return {div(dist, normalizer), std::move(normalizer), false};
}

AnglePotentials angle_potentials(const Tensor& embedding, const TupleSets& tuples) {
  if (embedding.rows() != tuples.batch_size)
    throw ShapeError("angle_potentials: embedding has " + std::to_string(embedding.rows()) +
                     " rows, tuples built for " + std::to_string(tuples.batch_size));
  AngleCosines cos = angle_cosines(embedding, tuples.triples);
  std::size_t skipped = 0;
  for (char v : cos.valid) skipped += v ? 0 : 1;
  return {std::move(cos.values), std::move(cos.valid), skipped};
}

namespace {

// Running sum of the enabled terms of a composite loss.
class TermSum {
 public:
  void add(const Tensor& term) { total_ = total_ ? distilforge::add(*total_, term) : term; }
  bool empty() const { return !total_.has_value(); }
  Tensor get() const { return total_ ? *total_ : Tensor::scalar(0.0); }

 private:
  std::optional<Tensor> total_;
};

}  // namespace

RelationLoss relation_distill_loss(const Tensor& embedding, const Tensor& peer_embedding,
                                   const TupleSets& tuples, const LossWeights& weights,
                                   const ObjectiveTerms& terms) {
  if (embedding.shape() != peer_embedding.shape())
    throw ShapeError("relation_distill_loss: embeddings " + shape_string(embedding.shape()) +
                     " vs " + shape_string(peer_embedding.shape()));
  const Tensor peer = peer_embedding.detach();
  const std::size_t n = embedding.rows();
  RelationLoss out{Tensor::scalar(0.0), Tensor::scalar(0.0), Tensor::scalar(0.0), {}};
  TermSum total;

  if (n < 2) {
    out.diagnostics.small_batches = 1;
    return out;
  }

  DistancePotentials mine = distance_potentials(embedding);
  DistancePotentials theirs = distance_potentials(peer);
  out.diagnostics.pi_collapses = std::size_t(mine.degenerate) + std::size_t(theirs.degenerate);
  out.distance = sum(huber(mine.values, theirs.values)) / static_cast<double>(n * (n - 1));
  if (terms.distance) total.add(out.distance);

  if (n < 3) {
    out.diagnostics.small_batches = 1;
  } else {
    AnglePotentials a = angle_potentials(embedding, tuples);
    AnglePotentials b = angle_potentials(peer, tuples);
    std::vector<double> mask(a.valid.size());
    std::size_t used = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = (a.valid[i] && b.valid[i]) ? 1.0 : 0.0;
      used += a.valid[i] && b.valid[i];
    }
    out.diagnostics.triples_skipped = mask.size() - used;
    if (used > 0) {
      Tensor per_triple = huber(a.values, b.values);
      if (used < mask.size()) per_triple = mul(per_triple, Tensor::from({mask.size()}, mask));
      out.angle = sum(per_triple) / static_cast<double>(used);
    }
    if (terms.angle && weights.beta1 > 0.0 && used > 0) total.add(out.angle * weights.beta1);
  }
  out.total = total.get();
  return out;
}

MutualLoss mutual_distill_loss(const ForwardOutput& self, const ForwardOutput& peer,
                               const TupleSets& tuples, const LossWeights& weights,
                               const ObjectiveTerms& terms) {
  RelationLoss relation =
      relation_distill_loss(self.embedding, peer.embedding, tuples, weights, terms);
  Tensor kl = kl_mutual(self.logits, peer.logits);
  TermSum total;
  if (terms.distance || (terms.angle && weights.beta1 > 0.0)) total.add(relation.total);
  if (terms.mutual_kl && weights.beta2 > 0.0) total.add(kl * weights.beta2);
  Tensor t = total.get();
  return {std::move(relation), std::move(kl), std::move(t)};
}

LossBreakdown total_loss(const ForwardOutput& self, const ForwardOutput& peer,
                         const Tensor& snapshot_logits, const Tensor& one_hot,
                         const TupleSets& tuples, const LossWeights& weights,
                         const ObjectiveTerms& terms) {
  Tensor ce = cross_entropy(self.logits, one_hot);
  MutualLoss md = mutual_distill_loss(self, peer, tuples, weights, terms);
  Tensor sd = self_distill_kl(self.logits, snapshot_logits, weights.temperature);

  const bool md_active = terms.distance || (terms.angle && weights.beta1 > 0.0) ||
                         (terms.mutual_kl && weights.beta2 > 0.0);
  TermSum total;
  if (weights.alpha > 0.0) total.add(ce * weights.alpha);
  if (weights.beta > 0.0 && md_active) total.add(md.total * weights.beta);
  if (weights.gamma > 0.0 && terms.self_distill) total.add(sd * weights.gamma);

  LossBreakdown out;
  out.total = total.get();
  out.cross_entropy = ce.item();
  out.kl_mutual = md.kl.item();
  out.distance = md.relation.distance.item();
  out.angle = md.relation.angle.item();
  out.self_distill = sd.item();
  out.diagnostics = md.relation.diagnostics;
  return out;
}

}  // namespace distilforge
