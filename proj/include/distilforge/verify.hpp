// SPDX-License-Identifier: Apache-2.0
//
// Self-contained invariant suite run by `distilforge verify`.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace distilforge {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  /// Scalar Huber under test. Replaced by a mutant for fault injection.
  std::function<double(double, double)> huber;
  std::uint64_t seed = 20240607;
};

/// Default options; `fault` names a mutant to inject ("huber") or is empty.
VerifyOptions verify_options(std::string_view fault = {});

/// Max relative finite-difference error of each composed loss's parameter
/// gradients on a random 4-sample batch. Keys: CE, KL, SD, DD, AD, RD, MD, KD.
std::vector<std::pair<std::string, double>> loss_gradient_errors(std::uint64_t seed);

std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace distilforge
