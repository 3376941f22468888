// Copyright 2026 The feelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "feelsim/compute_model.h"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"

namespace feel {
namespace {

TEST(ComputeProfileTest, MuIsMeanMinusMinimum) {
  ComputeProfile p{4, 0.005, 0.012};
  EXPECT_DOUBLE_EQ(p.mu_s(), 0.007);
  EXPECT_NO_THROW(p.Validate());
}

TEST(ComputeProfileTest, RejectsBadProfiles) {
  EXPECT_THROW((ComputeProfile{0, 0.005, 0.01}).Validate(),
               std::invalid_argument);
  EXPECT_THROW((ComputeProfile{4, 0.0, 0.01}).Validate(),
               std::invalid_argument);
  EXPECT_THROW((ComputeProfile{4, 0.01, 0.005}).Validate(),
               std::invalid_argument);
}

TEST(ComputeLatencyTest, DegenerateProfileIsDeterministic) {
  ComputeProfile p{4, 0.005, 0.005};
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(SampleComputeLatency(p, rng), 0.02);
  }
}

TEST(ComputeLatencyTest, MeanAndSupport) {
  ComputeProfile p{4, 0.005, 0.010};
  Rng rng(2);
  constexpr int kDraws = 1'000'000;
  double sum = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kDraws; ++i) {
    const double t = SampleComputeLatency(p, rng);
    sum += t;
    lowest = std::min(lowest, t);
  }
  EXPECT_NEAR(sum / kDraws, 0.040, 0.040 * 0.01);
  EXPECT_GE(lowest, p.tau * p.t_min_s);
}

TEST(ComputeLatencyCdfTest, Boundaries) {
  ComputeProfile p{4, 0.005, 0.010};
  EXPECT_EQ(ComputeLatencyCdf(p, 0.0), 0.0);
  EXPECT_EQ(ComputeLatencyCdf(p, 0.019), 0.0);
  EXPECT_EQ(ComputeLatencyCdf(p, p.tau * p.t_min_s), 0.0);
  EXPECT_NEAR(ComputeLatencyCdf(p, 10.0), 1.0, 1e-12);
  // One mean of the exponential part past the shift: 1 - 1/e.
  EXPECT_NEAR(ComputeLatencyCdf(p, 4 * (0.005 + 0.005)), 1 - std::exp(-1.0),
              1e-12);
}

TEST(ComputeLatencyCdfTest, Nondecreasing) {
  ComputeProfile p{3, 0.01, 0.05};
  double previous = 0.0;
  for (double t = 0.0; t < 1.0; t += 0.001) {
    const double f = ComputeLatencyCdf(p, t);
    EXPECT_GE(f, previous);
    EXPECT_LE(f, 1.0);
    previous = f;
  }
}

TEST(ComputeLatencyCdfTest, AgreesWithSamplerKolmogorovSmirnov) {
  ComputeProfile p{4, 0.005, 0.010};
  Rng rng(4);
  std::vector<double> samples(100'000);
  for (double& s : samples) s = SampleComputeLatency(p, rng);
  const double ks = oracle::KsDistance(
      samples, [&](double t) { return ComputeLatencyCdf(p, t); });
  EXPECT_LT(ks, 0.01);
}

}  // namespace
}  // namespace feel
