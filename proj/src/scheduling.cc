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

#include "feelsim/scheduling.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace feel {

FairnessState::FairnessState(std::size_t num_clients)
    : ages_(num_clients, 1), participation_counts_(num_clients, 0) {}

FairnessState::FairnessState(std::vector<int> ages,
                             std::vector<int> participation_counts,
                             int round_index)
    : ages_(std::move(ages)),
      participation_counts_(std::move(participation_counts)),
      round_index_(round_index) {
  if (ages_.size() != participation_counts_.size()) {
    throw std::invalid_argument("ages and participation counts differ in size");
  }
  if (round_index_ < 1) throw std::invalid_argument("round_index must be >= 1");
  for (std::size_t k = 0; k < ages_.size(); ++k) {
    if (ages_[k] < 1) throw std::invalid_argument("ages must be >= 1");
    if (participation_counts_[k] < 0 ||
        participation_counts_[k] > round_index_ - 1) {
      throw std::invalid_argument("participation count out of range");
    }
  }
}

double FairnessState::Frequency(ClientId k) const {
  const int count = participation_counts_.at(k);
  if (round_index_ <= 1) return 0.0;
  return static_cast<double>(count) / (round_index_ - 1);
}

void FairnessState::Advance(std::span<const ClientId> scheduled) {
  std::vector<bool> in_round(ages_.size(), false);
  for (ClientId k : scheduled) {
    if (k >= ages_.size()) {
      throw std::out_of_range("unknown client id " + std::to_string(k));
    }
    if (in_round[k]) {
      throw std::invalid_argument("client " + std::to_string(k) +
                                  " scheduled twice in one round");
    }
    in_round[k] = true;
  }
  for (std::size_t k = 0; k < ages_.size(); ++k) {
    if (in_round[k]) {
      ages_[k] = 1;
      ++participation_counts_[k];
    } else {
      ++ages_[k];
    }
  }
  ++round_index_;
}

FairnessState UpdateAges(FairnessState state,
                         std::span<const ClientId> scheduled) {
  state.Advance(scheduled);
  return state;
}

void PolicyParams::Validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  if (age_threshold < 0) {
    throw std::invalid_argument("age_threshold must be >= 0");
  }
  if (!(gamma_min >= 0.0)) {
    throw std::invalid_argument("gamma_min must be >= 0");
  }
  // f_max above 1 switches the frequency filter off.
  if (!(f_max > 0.0)) throw std::invalid_argument("f_max must be > 0");
}

int MrtpPhaseLength(double alpha, int target_uploads) {
  return static_cast<int>(std::ceil(alpha * target_uploads - 1e-9));
}

namespace {

void RequireCandidates(std::span<const IdleCandidate> candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("no idle candidates to schedule");
  }
}

// Lowest key wins; equal keys resolve to the lower id.
template <typename Key>
ClientId ArgMin(std::span<const IdleCandidate> candidates, Key key) {
  RequireCandidates(candidates);
  const IdleCandidate* best = &candidates.front();
  double best_key = key(*best);
  for (const IdleCandidate& c : candidates.subspan(1)) {
    const double k = key(c);
    if (k < best_key || (k == best_key && c.id < best->id)) {
      best = &c;
      best_key = k;
    }
  }
  return best->id;
}

std::vector<IdleCandidate> BelowFrequencyCap(
    std::span<const IdleCandidate> candidates, double f_max) {
  std::vector<IdleCandidate> eligible;
  for (const IdleCandidate& c : candidates) {
    if (c.frequency < f_max) eligible.push_back(c);
  }
  return eligible;
}

}  // namespace

ClientId MrtpPick(std::span<const IdleCandidate> candidates) {
  return ArgMin(candidates,
                [](const IdleCandidate& c) { return c.RemainingTime(); });
}

ClientId AmrtpPick(std::span<const IdleCandidate> candidates,
                   int uploads_completed, const PolicyParams& params,
                   int target_uploads) {
  if (uploads_completed < MrtpPhaseLength(params.alpha, target_uploads)) {
    return MrtpPick(candidates);
  }
  return ArgMin(candidates, [](const IdleCandidate& c) {
    return c.RemainingTime() / c.age;
  });
}

ClientId OfMrtpPick(std::span<const IdleCandidate> candidates,
                    int uploads_completed, const PolicyParams& params,
                    int target_uploads) {
  RequireCandidates(candidates);
  const std::vector<IdleCandidate> eligible =
      BelowFrequencyCap(candidates, params.f_max);
  if (eligible.empty()) return MrtpPick(candidates);
  if (uploads_completed < MrtpPhaseLength(params.alpha, target_uploads)) {
    return MrtpPick(eligible);
  }
  std::vector<IdleCandidate> opportunistic;
  for (const IdleCandidate& c : eligible) {
    if (c.age > params.age_threshold && c.gamma > params.gamma_min) {
      opportunistic.push_back(c);
    }
  }
  if (opportunistic.empty()) return MrtpPick(eligible);
  return ArgMin(opportunistic,
                [](const IdleCandidate& c) { return -c.gamma; });
}

ClientId RandomPick(std::span<const IdleCandidate> candidates, Rng& rng) {
  RequireCandidates(candidates);
  std::uniform_int_distribution<std::size_t> index(0, candidates.size() - 1);
  return candidates[index(rng)].id;
}

ClientId RoundRobinPick(std::span<const IdleCandidate> candidates) {
  return ArgMin(candidates, [](const IdleCandidate& c) {
    return -static_cast<double>(c.age);
  });
}

PolicyKind ParsePolicyKind(std::string_view name) {
  if (name == "mrtp") return PolicyKind::kMrtp;
  if (name == "a_mrtp") return PolicyKind::kAMrtp;
  if (name == "of_mrtp") return PolicyKind::kOfMrtp;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "round_robin") return PolicyKind::kRoundRobin;
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected mrtp, a_mrtp, of_mrtp, random or "
                              "round_robin)");
}

std::string_view PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kMrtp:
      return "mrtp";
    case PolicyKind::kAMrtp:
      return "a_mrtp";
    case PolicyKind::kOfMrtp:
      return "of_mrtp";
    case PolicyKind::kRandom:
      return "random";
    case PolicyKind::kRoundRobin:
      return "round_robin";
  }
  return "unknown";
}

namespace {

class MrtpPolicy final : public Policy {
 public:
  std::optional<ClientId> Pick(const PickContext& ctx) override {
    return MrtpPick(ctx.candidates);
  }
  PolicyKind kind() const override { return PolicyKind::kMrtp; }
};

class AmrtpPolicy final : public Policy {
 public:
  explicit AmrtpPolicy(const PolicyParams& params) : params_(params) {}
  std::optional<ClientId> Pick(const PickContext& ctx) override {
    return AmrtpPick(ctx.candidates, ctx.uploads_completed, params_,
                     ctx.target_uploads);
  }
  PolicyKind kind() const override { return PolicyKind::kAMrtp; }

 private:
  PolicyParams params_;
};

class OfMrtpPolicy final : public Policy {
 public:
  explicit OfMrtpPolicy(const PolicyParams& params) : params_(params) {}
  std::optional<ClientId> Pick(const PickContext& ctx) override {
    const bool any_eligible =
        std::any_of(ctx.candidates.begin(), ctx.candidates.end(),
                    [&](const IdleCandidate& c) {
                      return c.frequency < params_.f_max;
                    });
    if (!any_eligible && ctx.arrivals_pending) return std::nullopt;
    return OfMrtpPick(ctx.candidates, ctx.uploads_completed, params_,
                      ctx.target_uploads);
  }
  PolicyKind kind() const override { return PolicyKind::kOfMrtp; }

 private:
  PolicyParams params_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::optional<ClientId> Pick(const PickContext& ctx) override {
    return RandomPick(ctx.candidates, rng_);
  }
  PolicyKind kind() const override { return PolicyKind::kRandom; }

 private:
  Rng rng_;
};

class RoundRobinPolicy final : public Policy {
 public:
  std::optional<ClientId> Pick(const PickContext& ctx) override {
    return RoundRobinPick(ctx.candidates);
  }
  PolicyKind kind() const override { return PolicyKind::kRoundRobin; }
};

}  // namespace

std::unique_ptr<Policy> MakePolicy(PolicyKind kind, const PolicyParams& params,
                                   std::uint64_t seed) {
  params.Validate();
  switch (kind) {
    case PolicyKind::kMrtp:
      return std::make_unique<MrtpPolicy>();
    case PolicyKind::kAMrtp:
      return std::make_unique<AmrtpPolicy>(params);
    case PolicyKind::kOfMrtp:
      return std::make_unique<OfMrtpPolicy>(params);
    case PolicyKind::kRandom:
      return std::make_unique<RandomPolicy>(seed);
    case PolicyKind::kRoundRobin:
      return std::make_unique<RoundRobinPolicy>();
  }
  throw std::invalid_argument("unhandled policy kind");
}

}  // namespace feel
