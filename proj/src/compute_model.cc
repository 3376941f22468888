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

#include <cmath>
#include <stdexcept>

namespace feel {

void ComputeProfile::Validate() const {
  if (tau < 1) throw std::invalid_argument("tau must be >= 1");
  if (!(t_min_s > 0.0)) throw std::invalid_argument("t_min_s must be > 0");
  if (!(t_mean_s >= t_min_s)) {
    throw std::invalid_argument("t_mean_s must be >= t_min_s");
  }
}

double SampleComputeLatency(const ComputeProfile& profile, Rng& rng) {
  const double mu = profile.mu_s();
  double per_step = profile.t_min_s;
  if (mu > 0.0) {
    std::exponential_distribution<double> tail(1.0 / mu);
    per_step += tail(rng);
  }
  return profile.tau * per_step;
}

double ComputeLatencyCdf(const ComputeProfile& profile, double t) {
  const double shift = t / profile.tau - profile.t_min_s;
  if (shift < 0.0) return 0.0;
  const double mu = profile.mu_s();
  if (mu <= 0.0) return 1.0;
  return -std::expm1(-shift / mu);
}

}  // namespace feel
