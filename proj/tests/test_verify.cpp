// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "distilforge/verify.hpp"

using namespace distilforge;

TEST(Verify, AllChecksPassOnCleanBuild) {
  for (const auto& r : run_verification(verify_options())) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Verify, HuberMutantFailsOnlyTheHuberCheck) {
  for (const auto& r : run_verification(verify_options("huber")))
    EXPECT_EQ(r.passed, r.name != "huber values") << r.name;
}

TEST(Verify, UnknownFaultIsRejected) {
  EXPECT_THROW(verify_options("nope"), std::invalid_argument);
}

TEST(Verify, EveryLossGradientIsChecked) {
  const auto errors = loss_gradient_errors(3);
  ASSERT_EQ(errors.size(), 8u);
  for (const auto& [name, err] : errors) EXPECT_LT(err, 1e-4) << name;
}
