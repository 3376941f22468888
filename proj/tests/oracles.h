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

// Reference implementations used only by tests. They deliberately take the
// slow, obvious route (exhaustive scans, sampling, textbook formulas) so they
// stay independent of the code they check.

#ifndef FEELSIM_TESTS_ORACLES_H_
#define FEELSIM_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "feelsim/fl_toy.h"
#include "feelsim/round_engine.h"
#include "feelsim/scheduling.h"

namespace feel::oracle {

// Exhaustive selection of the lowest-id element whose key is minimal: every
// candidate is compared against every other one.
template <typename Key>
ClientId BruteArgMin(std::span<const IdleCandidate> cands, Key key) {
  std::optional<ClientId> best;
  for (const IdleCandidate& a : cands) {
    bool beats_all = true;
    for (const IdleCandidate& b : cands) {
      if (key(b) < key(a) || (key(b) == key(a) && b.id < a.id)) {
        beats_all = false;
        break;
      }
    }
    if (beats_all) best = a.id;
  }
  return *best;
}

inline ClientId Mrtp(std::span<const IdleCandidate> cands) {
  return BruteArgMin(cands, [](const IdleCandidate& c) {
    return c.remaining_bits / c.ul_rate_bps;
  });
}

inline bool InMrtpPhase(int completed, double alpha, int n) {
  // Smallest integer m with m >= alpha * n, found by counting.
  int m = 0;
  while (m < alpha * n - 1e-9) ++m;
  return completed < m;
}

inline ClientId Amrtp(std::span<const IdleCandidate> cands, int completed,
                      const PolicyParams& p, int n) {
  if (InMrtpPhase(completed, p.alpha, n)) return Mrtp(cands);
  return BruteArgMin(cands, [](const IdleCandidate& c) {
    return (c.remaining_bits / c.ul_rate_bps) / c.age;
  });
}

inline ClientId OfMrtp(std::span<const IdleCandidate> cands, int completed,
                       const PolicyParams& p, int n) {
  std::vector<IdleCandidate> tilde;
  std::copy_if(cands.begin(), cands.end(), std::back_inserter(tilde),
               [&](const IdleCandidate& c) { return c.frequency < p.f_max; });
  if (tilde.empty()) return Mrtp(cands);
  if (InMrtpPhase(completed, p.alpha, n)) return Mrtp(tilde);
  std::vector<IdleCandidate> hat;
  std::copy_if(tilde.begin(), tilde.end(), std::back_inserter(hat),
               [&](const IdleCandidate& c) {
                 return c.age > p.age_threshold && c.gamma > p.gamma_min;
               });
  if (hat.empty()) return Mrtp(tilde);
  return BruteArgMin(hat, [](const IdleCandidate& c) { return -c.gamma; });
}

// Time-stepped replay of a round: given the sequence of (time, client)
// scheduling decisions, integrates each client's progress with fine steps
// and reports when each one finishes. Independent of the event engine.
struct ReplayResult {
  std::vector<double> finish;  // +inf when not finished
  double completion = 0.0;
};

inline ReplayResult ReplayDecisions(const RoundSnapshot& snap,
                                    std::span<const Decision> decisions,
                                    int target) {
  const std::size_t k = snap.num_clients();
  ReplayResult out;
  out.finish.assign(k, std::numeric_limits<double>::infinity());
  std::vector<double> rem(k, snap.model_bits);
  int done = 0;
  for (std::size_t i = 0; i < decisions.size() && done < target; ++i) {
    const ClientId c = decisions[i].client;
    const double start = decisions[i].time_s;
    const double until = i + 1 < decisions.size()
                             ? decisions[i + 1].time_s
                             : std::numeric_limits<double>::infinity();
    const double need = rem[c] / snap.clients[c].ul_rate_bps;
    if (start + need <= until) {
      rem[c] = 0.0;
      out.finish[c] = start + need;
      out.completion = start + need;
      ++done;
    } else {
      rem[c] -= (until - start) * snap.clients[c].ul_rate_bps;
    }
  }
  return out;
}

// Mean cross-entropy with explicit loops and an unshifted softmax.
inline double SoftmaxLoss(const ModelVector& m, const Dataset& d) {
  const int f = d.num_features;
  const int c = d.num_classes;
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<double> logits(c);
    for (int k = 0; k < c; ++k) {
      logits[k] = m.params[c * f + k];
      for (int j = 0; j < f; ++j) logits[k] += m.params[k * f + j] * d.row(i)[j];
    }
    double z = 0.0;
    for (double v : logits) z += std::exp(v);
    total += -std::log(std::exp(logits[d.labels[i]]) / z);
  }
  return total / d.size();
}

// One-sample Kolmogorov-Smirnov statistic.
template <typename Cdf>
double KsDistance(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace feel::oracle

#endif  // FEELSIM_TESTS_ORACLES_H_
