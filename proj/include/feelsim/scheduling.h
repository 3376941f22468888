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

#ifndef FEELSIM_SCHEDULING_H_
#define FEELSIM_SCHEDULING_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feelsim/channel_model.h"

namespace feel {

using ClientId = std::uint32_t;

// Cross-round fairness bookkeeping: the age of each client's last update and
// how many rounds it has participated in. Ages start at 1 in round 1.
class FairnessState {
 public:
  explicit FairnessState(std::size_t num_clients);
  // Explicit state, mostly for tests. Throws std::invalid_argument on size
  // mismatch, non-positive ages, or round_index < 1.
  FairnessState(std::vector<int> ages, std::vector<int> participation_counts,
                int round_index);

  std::size_t num_clients() const { return ages_.size(); }
  int round_index() const { return round_index_; }
  int age(ClientId k) const { return ages_.at(k); }
  int participation_count(ClientId k) const {
    return participation_counts_.at(k);
  }
  const std::vector<int>& ages() const { return ages_; }
  const std::vector<int>& participation_counts() const {
    return participation_counts_;
  }

  // l_k(n) / (n - 1); zero in the first round, when there is no history.
  double Frequency(ClientId k) const;

  // Closes the current round: scheduled clients get age 1 and one more
  // participation, everyone else ages by one. Throws std::out_of_range for
  // an unknown id and std::invalid_argument for a duplicated one.
  void Advance(std::span<const ClientId> scheduled);

 private:
  std::vector<int> ages_;
  std::vector<int> participation_counts_;
  int round_index_ = 1;
};

// Value-returning form of FairnessState::Advance.
FairnessState UpdateAges(FairnessState state,
                         std::span<const ClientId> scheduled);

struct PolicyParams {
  double alpha = 0.5;       // fraction of uploads scheduled by plain MRTP
  int age_threshold = 5;    // a_th
  double gamma_min = 1.0;   // minimum relative channel quality
  double f_max = 0.4;       // participation frequency ceiling

  // Throws std::invalid_argument when a field is out of range.
  void Validate() const;
};

struct IdleCandidate {
  ClientId id = 0;
  double remaining_bits = 0.0;
  double ul_rate_bps = 0.0;
  double gamma = 0.0;  // instantaneous / long-term average uplink rate
  int age = 1;
  double frequency = 0.0;

  double RemainingTime() const { return remaining_bits / ul_rate_bps; }
};

// Number of completed uploads after which A-MRTP and OF-MRTP leave the plain
// MRTP phase: ceil(alpha * N), robust to alpha * N landing a rounding error
// above an integer.
int MrtpPhaseLength(double alpha, int target_uploads);

// All pick functions throw std::invalid_argument on an empty candidate list
// and break ties towards the lowest client id.

// Minimum remaining upload time.
ClientId MrtpPick(std::span<const IdleCandidate> candidates);

// MRTP for the first ceil(alpha N) uploads, then the minimum ratio of
// remaining time to age.
ClientId AmrtpPick(std::span<const IdleCandidate> candidates,
                   int uploads_completed, const PolicyParams& params,
                   int target_uploads);

// Restricts to clients below f_max (falling back to every candidate if none
// qualifies). Within that set: MRTP during the first phase; afterwards the
// largest gamma among clients with age > a_th and gamma > gamma_min, or MRTP
// when no client meets both.
ClientId OfMrtpPick(std::span<const IdleCandidate> candidates,
                    int uploads_completed, const PolicyParams& params,
                    int target_uploads);

ClientId RandomPick(std::span<const IdleCandidate> candidates, Rng& rng);

// Oldest update first.
ClientId RoundRobinPick(std::span<const IdleCandidate> candidates);

enum class PolicyKind { kMrtp, kAMrtp, kOfMrtp, kRandom, kRoundRobin };

// Accepts "mrtp", "a_mrtp", "of_mrtp", "random", "round_robin".
PolicyKind ParsePolicyKind(std::string_view name);
std::string_view PolicyName(PolicyKind kind);

// What a policy sees at a scheduling instant.
struct PickContext {
  std::span<const IdleCandidate> candidates;  // sorted by id, nonempty
  int uploads_completed = 0;
  int target_uploads = 0;
  bool arrivals_pending = false;  // more clients will become idle this round
  double time_s = 0.0;
};

// A scheduling rule bound to its parameters. Returning nullopt leaves the
// uplink unused until the next arrival, and is only legal while
// arrivals_pending is true.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::optional<ClientId> Pick(const PickContext& ctx) = 0;
  virtual PolicyKind kind() const = 0;
};

// The OF-MRTP policy defers rather than taking the all-candidates fallback
// while further arrivals are pending, so it never schedules a client at or
// above f_max unless the round could not finish otherwise.
std::unique_ptr<Policy> MakePolicy(PolicyKind kind, const PolicyParams& params,
                                   std::uint64_t seed = 0);

}  // namespace feel

#endif  // FEELSIM_SCHEDULING_H_
