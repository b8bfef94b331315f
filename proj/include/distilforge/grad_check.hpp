// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>

#include "distilforge/tensor.hpp"

namespace distilforge {

/// Compares reverse-mode gradients of a scalar function against central
/// differences. Returns max_i |analytic_i - fd_i| / max(1, |fd_i|).
/// `f` must return a single-element tensor; it is evaluated at x and at
/// x +/- h e_i for every coordinate.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double h = 1e-5);

/// Same check, but over tensors that `f` closes over (typically network
/// parameters). Each parameter must require gradients; their data is
/// perturbed in place and restored.
double grad_check_parameters(const std::function<Tensor()>& f, std::span<Tensor> params,
                             double h = 1e-5);

}  // namespace distilforge
