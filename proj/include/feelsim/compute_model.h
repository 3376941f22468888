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

#ifndef FEELSIM_COMPUTE_MODEL_H_
#define FEELSIM_COMPUTE_MODEL_H_

#include "feelsim/channel_model.h"

namespace feel {

// Shifted-exponential latency of tau local SGD steps. Each step takes at
// least t_min_s and t_mean_s on average; the exponential part has mean
// mu = t_mean_s - t_min_s (rate 1/mu).
struct ComputeProfile {
  int tau = 4;
  double t_min_s = 0.005;
  double t_mean_s = 0.010;

  double mu_s() const { return t_mean_s - t_min_s; }
  // Throws std::invalid_argument on tau < 1, t_min_s <= 0 or
  // t_mean_s < t_min_s.
  void Validate() const;
};

// tau * (t_min + E), E ~ Exp(mean mu). Exactly tau * t_min when mu == 0.
double SampleComputeLatency(const ComputeProfile& profile, Rng& rng);

// P(latency <= t).
double ComputeLatencyCdf(const ComputeProfile& profile, double t);

}  // namespace feel

#endif  // FEELSIM_COMPUTE_MODEL_H_
