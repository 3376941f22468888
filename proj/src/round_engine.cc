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

#include "feelsim/round_engine.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace feel {

std::vector<ClientState> MakeClients(std::span<const double> distances_km,
                                     const RadioParams& radio,
                                     const ComputeProfile& compute,
                                     double bandwidth_hz) {
  compute.Validate();
  std::vector<ClientState> clients;
  clients.reserve(distances_km.size());
  for (double d : distances_km) {
    ClientState c;
    c.geometry = RadioGeometry::FromDistance(d, radio);
    c.avg_ul_rate_bps =
        LongTermAverageRate(c.geometry, Direction::kUplink, bandwidth_hz);
    c.compute = compute;
    clients.push_back(c);
  }
  return clients;
}

void RoundSnapshot::SortArrivals() {
  arrival_order.resize(clients.size());
  std::iota(arrival_order.begin(), arrival_order.end(), ClientId{0});
  std::stable_sort(arrival_order.begin(), arrival_order.end(),
                   [&](ClientId a, ClientId b) {
                     return clients[a].arrival_time_s <
                            clients[b].arrival_time_s;
                   });
}

RoundSnapshot BuildRoundSnapshot(std::span<const ClientState> clients,
                                 const SnapshotParams& params, Rng& rng) {
  if (!(params.model_bits > 0.0)) {
    throw std::invalid_argument("model_bits must be > 0");
  }
  if (clients.empty()) throw std::invalid_argument("no clients");
  if (!(params.fountain_overhead >= 1.0)) {
    throw std::invalid_argument("fountain_overhead must be >= 1");
  }
  RoundSnapshot snap;
  snap.model_bits = params.model_bits;
  snap.clients.reserve(clients.size());
  for (const ClientState& c : clients) {
    const LinkRates rates =
        SampleLinkRates(c.geometry, params.bandwidth_hz, rng);
    ClientRound r;
    r.dl_rate_bps = std::max(rates.dl_rate_bps, params.rate_floor_bps);
    r.ul_rate_bps = std::max(rates.ul_rate_bps, params.rate_floor_bps);
    r.gamma = r.ul_rate_bps / c.avg_ul_rate_bps;
    r.dl_latency_s = params.fountain_overhead * params.model_bits /
                     r.dl_rate_bps;
    r.compute_latency_s = SampleComputeLatency(c.compute, rng);
    r.arrival_time_s = r.dl_latency_s + r.compute_latency_s;
    snap.clients.push_back(r);
  }
  snap.SortArrivals();
  return snap;
}

RoundSnapshot MakeSnapshot(double model_bits, std::span<const double> arrivals,
                           std::span<const double> ul_rates_bps) {
  if (arrivals.size() != ul_rates_bps.size()) {
    throw std::invalid_argument("arrivals and rates differ in size");
  }
  RoundSnapshot snap;
  snap.model_bits = model_bits;
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    ClientRound r;
    r.ul_rate_bps = ul_rates_bps[k];
    r.arrival_time_s = arrivals[k];
    r.compute_latency_s = arrivals[k];
    snap.clients.push_back(r);
  }
  snap.SortArrivals();
  return snap;
}

std::string_view TraceKindName(TraceKind kind) {
  switch (kind) {
    case TraceKind::kArrival:
      return "arrival";
    case TraceKind::kSchedule:
      return "schedule";
    case TraceKind::kPreempt:
      return "preempt";
    case TraceKind::kComplete:
      return "complete";
    case TraceKind::kDefer:
      return "defer";
    case TraceKind::kRoundEnd:
      return "round_end";
  }
  return "unknown";
}

std::vector<ClientId> RoundOutcome::ScheduledIds() const {
  std::vector<ClientId> ids;
  ids.reserve(scheduled.size());
  for (const Completion& c : scheduled) ids.push_back(c.id);
  return ids;
}

double RoundOutcome::FinishTime(ClientId k) const {
  for (const Completion& c : scheduled) {
    if (c.id == k) return c.finish_time_s;
  }
  return std::numeric_limits<double>::infinity();
}

namespace {

class UplinkSimulation {
 public:
  UplinkSimulation(const RoundSnapshot& snapshot, Policy& policy,
                   const FairnessState& fairness, int target_uploads,
                   const RunOptions& options)
      : snap_(snapshot),
        policy_(policy),
        fairness_(fairness),
        target_(target_uploads),
        options_(options),
        idle_(snapshot.num_clients(), false) {
    const std::size_t k = snapshot.num_clients();
    out_.intervals.resize(k);
    out_.remaining_bits.assign(k, snapshot.model_bits);
  }

  RoundOutcome Run() {
    const std::size_t num_clients = snap_.num_clients();
    while (true) {
      AdmitArrivals();
      if (static_cast<int>(out_.scheduled.size()) == target_) break;
      ++out_.num_events;
      if (num_idle_ == 0) {
        out_.idle_waiting_time_s += WaitForArrival();
        continue;
      }
      std::vector<IdleCandidate> candidates = Candidates();
      PickContext ctx;
      ctx.candidates = candidates;
      ctx.uploads_completed = static_cast<int>(out_.scheduled.size());
      ctx.target_uploads = target_;
      ctx.arrivals_pending = next_arrival_ < num_clients;
      ctx.time_s = now_;
      const std::optional<ClientId> pick = policy_.Pick(ctx);
      if (!pick) {
        if (!ctx.arrivals_pending) {
          throw std::logic_error("policy deferred with no arrivals pending");
        }
        Trace(TraceKind::kDefer, -1, 0.0);
        current_.reset();
        out_.deferred_time_s += WaitForArrival();
        continue;
      }
      const ClientId k = *pick;
      if (k >= num_clients || !idle_[k]) {
        throw std::logic_error("policy picked client " + std::to_string(k) +
                               " which is not idle");
      }
      RecordDecision(k, candidates);
      Transmit(k);
    }
    out_.completion_time_s = now_;
    Trace(TraceKind::kRoundEnd, -1, 0.0);
    return std::move(out_);
  }

 private:
  double NextArrivalTime() const {
    if (next_arrival_ >= snap_.num_clients()) {
      return std::numeric_limits<double>::infinity();
    }
    return snap_.clients[snap_.arrival_order[next_arrival_]].arrival_time_s;
  }

  void AdmitArrivals() {
    while (next_arrival_ < snap_.num_clients() &&
           NextArrivalTime() <= now_) {
      const ClientId k = snap_.arrival_order[next_arrival_++];
      idle_[k] = true;
      ++num_idle_;
      Trace(TraceKind::kArrival, static_cast<int>(k), out_.remaining_bits[k]);
    }
  }

  // Advances the clock to the next arrival; returns the time skipped.
  double WaitForArrival() {
    const double next = NextArrivalTime();
    if (!std::isfinite(next)) {
      throw std::logic_error("round cannot complete: no more arrivals");
    }
    const double waited = next - now_;
    now_ = next;
    return waited;
  }

  std::vector<IdleCandidate> Candidates() const {
    std::vector<IdleCandidate> candidates;
    candidates.reserve(num_idle_);
    for (ClientId k = 0; k < idle_.size(); ++k) {
      if (!idle_[k]) continue;
      IdleCandidate c;
      c.id = k;
      c.remaining_bits = out_.remaining_bits[k];
      c.ul_rate_bps = snap_.clients[k].ul_rate_bps;
      c.gamma = snap_.clients[k].gamma;
      c.age = fairness_.age(k);
      c.frequency = fairness_.Frequency(k);
      candidates.push_back(c);
    }
    return candidates;
  }

  void RecordDecision(ClientId k, std::span<const IdleCandidate> candidates) {
    if (current_ && *current_ != k && idle_[*current_]) {
      ++out_.num_preemptions;
      Trace(TraceKind::kPreempt, static_cast<int>(*current_),
            out_.remaining_bits[*current_]);
    }
    if (!current_ || *current_ != k) {
      Trace(TraceKind::kSchedule, static_cast<int>(k), out_.remaining_bits[k]);
    }
    for (const IdleCandidate& c : candidates) {
      if (c.id != k) continue;
      out_.decisions.push_back(
          {now_, k, static_cast<int>(out_.scheduled.size()), c.age,
           c.frequency, c.gamma});
      break;
    }
    current_ = k;
  }

  // Uploads k until it finishes or the next arrival, whichever is first.
  void Transmit(ClientId k) {
    const double rate = snap_.clients[k].ul_rate_bps;
    const double finish = now_ + out_.remaining_bits[k] / rate;
    const double next = NextArrivalTime();
    if (finish <= next) {
      AddInterval(k, now_, finish);
      now_ = finish;
      out_.remaining_bits[k] = 0.0;
      idle_[k] = false;
      --num_idle_;
      current_.reset();
      out_.scheduled.push_back({k, now_});
      Trace(TraceKind::kComplete, static_cast<int>(k), 0.0);
    } else {
      AddInterval(k, now_, next);
      out_.remaining_bits[k] =
          std::max(0.0, out_.remaining_bits[k] - rate * (next - now_));
      now_ = next;
    }
  }

  void AddInterval(ClientId k, double start, double end) {
    auto& list = out_.intervals[k];
    if (!list.empty() && list.back().end_s == start) {
      list.back().end_s = end;
    } else {
      list.push_back({start, end});
    }
  }

  void Trace(TraceKind kind, int client, double remaining) {
    if (options_.trace) out_.trace.push_back({now_, kind, client, remaining});
  }

  const RoundSnapshot& snap_;
  Policy& policy_;
  const FairnessState& fairness_;
  const int target_;
  const RunOptions options_;

  RoundOutcome out_;
  std::vector<bool> idle_;
  std::size_t num_idle_ = 0;
  std::size_t next_arrival_ = 0;
  std::optional<ClientId> current_;
  double now_ = 0.0;
};

}  // namespace

RoundOutcome RunRound(const RoundSnapshot& snapshot, Policy& policy,
                      const FairnessState& fairness, int target_uploads,
                      const RunOptions& options) {
  const auto k = static_cast<int>(snapshot.num_clients());
  if (target_uploads < 1 || target_uploads > k) {
    throw std::invalid_argument("target uploads N=" +
                                std::to_string(target_uploads) +
                                " must lie in [1, K=" + std::to_string(k) +
                                "]");
  }
  if (fairness.num_clients() != snapshot.num_clients()) {
    throw std::invalid_argument("fairness state tracks " +
                                std::to_string(fairness.num_clients()) +
                                " clients, snapshot has " + std::to_string(k));
  }
  if (snapshot.arrival_order.size() != snapshot.num_clients()) {
    throw std::invalid_argument("snapshot arrival order is incomplete");
  }
  for (const ClientRound& c : snapshot.clients) {
    if (!std::isfinite(c.arrival_time_s) || !(c.ul_rate_bps > 0.0)) {
      throw std::invalid_argument("arrivals must be finite, rates positive");
    }
  }
  return UplinkSimulation(snapshot, policy, fairness, target_uploads, options)
      .Run();
}

bool ConservationCheck(const RoundOutcome& outcome,
                       const RoundSnapshot& snapshot) {
  const double q = snapshot.model_bits;
  if (outcome.intervals.size() != snapshot.num_clients() ||
      outcome.remaining_bits.size() != snapshot.num_clients()) {
    return false;
  }
  std::vector<bool> done(snapshot.num_clients(), false);
  for (const Completion& c : outcome.scheduled) {
    if (c.id >= done.size()) return false;
    done[c.id] = true;
  }
  for (ClientId k = 0; k < snapshot.num_clients(); ++k) {
    if (done[k]) {
      double airtime = 0.0;
      for (const UploadInterval& iv : outcome.intervals[k]) {
        airtime += iv.length();
      }
      const double sent = airtime * snapshot.clients[k].ul_rate_bps;
      if (std::abs(sent - q) > 1e-9 * q) return false;
    } else {
      const double rem = outcome.remaining_bits[k];
      if (!(rem >= 0.0 && rem <= q)) return false;
    }
  }
  return true;
}

void WriteTrace(std::ostream& out, const RoundOutcome& outcome, int trial,
                int round) {
  for (const TraceEvent& e : outcome.trace) {
    nlohmann::ordered_json j;
    j["trial"] = trial;
    j["round"] = round;
    j["time_s"] = e.time_s;
    j["event"] = TraceKindName(e.kind);
    j["client"] = e.client;
    j["remaining_bits"] = e.remaining_bits;
    out << j.dump() << '\n';
  }
}

}  // namespace feel
