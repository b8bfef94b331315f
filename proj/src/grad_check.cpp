// SPDX-License-Identifier: Apache-2.0
#include "distilforge/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace distilforge {

namespace {

double scalar_value(const Tensor& y) {
  if (y.numel() != 1) throw ShapeError("grad_check: function output is not scalar");
  return y.item();
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

}  // namespace

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h) {
  Tensor probe = x.clone(true);
  Tensor y = f(probe);
  scalar_value(y);
  y.backward();
  const std::vector<double> analytic(probe.grad().begin(), probe.grad().end());

  NoGradGuard no_grad;
  auto data = probe.mutable_data();
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double saved = data[i];
    data[i] = saved + h;
    const double up = scalar_value(f(probe));
    data[i] = saved - h;
    const double down = scalar_value(f(probe));
    data[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

double grad_check_parameters(const std::function<Tensor()>& f, std::span<Tensor> params,
                             double h) {
  for (Tensor& p : params) {
    if (!p.requires_grad()) throw std::invalid_argument("grad_check: parameter without grad");
    p.zero_grad();
  }
  Tensor y = f();
  scalar_value(y);
  y.backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const Tensor& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  NoGradGuard no_grad;
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto data = params[k].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double up = scalar_value(f());
      data[i] = saved - h;
      const double down = scalar_value(f());
      data[i] = saved;
      worst = std::max(worst, relative_error(analytic[k][i], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

}  // namespace distilforge
