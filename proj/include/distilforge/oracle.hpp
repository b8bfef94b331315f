// SPDX-License-Identifier: Apache-2.0
//
// Plain scalar-loop reference evaluations of the losses. They enumerate every
// pair and triple explicitly and share no code with the tensor path, so they
// serve as an independent check on it.
#pragma once

#include <cstddef>
#include <vector>

#include "distilforge/tensor.hpp"

namespace distilforge::oracle {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const Tensor& t);

/// mean_x -log p(true | x)
double cross_entropy(const Rows& logits, const std::vector<std::size_t>& labels);

/// mean_x sum_i q_i log(q_i / p_i), q = softmax(teacher / t), p = softmax(student / t).
double kl(const Rows& student, const Rows& teacher, double t);

double huber(double a, double b);

/// Mean Huber over ordered pairs of distance potentials.
double distance_loss(const Rows& a, const Rows& b);

/// Mean Huber over every ordered triple of distinct indices whose angle is
/// defined in both embeddings.
double angle_loss(const Rows& a, const Rows& b);

double relation_loss(const Rows& a, const Rows& b, double beta1);

}  // namespace distilforge::oracle
