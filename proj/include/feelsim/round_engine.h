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

#ifndef FEELSIM_ROUND_ENGINE_H_
#define FEELSIM_ROUND_ENGINE_H_

#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "feelsim/channel_model.h"
#include "feelsim/compute_model.h"
#include "feelsim/scheduling.h"

namespace feel {

// Static per-client description used to draw each round.
struct ClientState {
  RadioGeometry geometry;
  double avg_ul_rate_bps = 0.0;  // long-term average, fixed at setup
  ComputeProfile compute;
};

// Builds clients at the given distances with the same compute profile.
std::vector<ClientState> MakeClients(std::span<const double> distances_km,
                                     const RadioParams& radio,
                                     const ComputeProfile& compute,
                                     double bandwidth_hz);

struct ClientRound {
  double dl_rate_bps = 0.0;
  double ul_rate_bps = 0.0;
  double gamma = 1.0;
  double dl_latency_s = 0.0;
  double compute_latency_s = 0.0;
  double arrival_time_s = 0.0;  // dl_latency_s + compute_latency_s
};

// One round's realization. clients is indexed by client id; arrival_order
// lists ids by ascending arrival time, ties by id.
struct RoundSnapshot {
  double model_bits = 0.0;
  std::vector<ClientRound> clients;
  std::vector<ClientId> arrival_order;

  std::size_t num_clients() const { return clients.size(); }
  // Recomputes arrival_order from the clients' arrival times.
  void SortArrivals();
};

struct SnapshotParams {
  double model_bits = 0.0;
  double bandwidth_hz = 1e6;
  double fountain_overhead = 1.0;  // multiplies downlink bits, >= 1
  double rate_floor_bps = 1e-6;
};

// Draws fading and compute latency for every client. Each client consumes
// the same number of rng draws regardless of the outcome, so two policies
// fed the same seed see identical channels.
RoundSnapshot BuildRoundSnapshot(std::span<const ClientState> clients,
                                 const SnapshotParams& params, Rng& rng);

// Hand-built snapshot with gamma = 1 everywhere.
RoundSnapshot MakeSnapshot(double model_bits, std::span<const double> arrivals,
                           std::span<const double> ul_rates_bps);

struct UploadInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  double length() const { return end_s - start_s; }
};

struct Completion {
  ClientId id = 0;
  double finish_time_s = 0.0;
};

// A scheduling instant and what the policy saw about the chosen client.
struct Decision {
  double time_s = 0.0;
  ClientId client = 0;
  int uploads_completed = 0;
  int age = 0;
  double frequency = 0.0;
  double gamma = 0.0;
};

enum class TraceKind { kArrival, kSchedule, kPreempt, kComplete, kDefer,
                       kRoundEnd };
std::string_view TraceKindName(TraceKind kind);

struct TraceEvent {
  double time_s = 0.0;
  TraceKind kind = TraceKind::kArrival;
  int client = -1;  // -1 for events not tied to a client
  double remaining_bits = 0.0;
};

struct RoundOutcome {
  double completion_time_s = 0.0;
  std::vector<Completion> scheduled;  // in finishing order
  std::vector<std::vector<UploadInterval>> intervals;  // per client
  std::vector<double> remaining_bits;                  // per client, at end
  std::vector<Decision> decisions;
  std::vector<TraceEvent> trace;  // only with RunOptions::trace
  double idle_waiting_time_s = 0.0;
  double deferred_time_s = 0.0;
  int num_events = 0;
  int num_preemptions = 0;

  std::vector<ClientId> ScheduledIds() const;
  // Finish time of client k, or +inf if it never completed.
  double FinishTime(ClientId k) const;
};

struct RunOptions {
  bool trace = false;
};

// Simulates the uplink of one round. Decisions happen only when the idle set
// changes: a new arrival may preempt the current upload, which keeps its
// progress. The round ends when target_uploads uploads have finished. Events
// at equal times resolve completions before arrivals. Throws
// std::invalid_argument if target_uploads is outside [1, K] or the fairness
// state has the wrong size, and std::logic_error if the policy picks a
// client that is not idle.
RoundOutcome RunRound(const RoundSnapshot& snapshot, Policy& policy,
                      const FairnessState& fairness, int target_uploads,
                      const RunOptions& options = {});

// Every scheduled client moved exactly model_bits (relative 1e-9) and
// everyone else retains a remaining size within [0, model_bits].
bool ConservationCheck(const RoundOutcome& outcome,
                       const RoundSnapshot& snapshot);

// Writes the trace as JSON lines tagged with trial and round.
void WriteTrace(std::ostream& out, const RoundOutcome& outcome, int trial,
                int round);

}  // namespace feel

#endif  // FEELSIM_ROUND_ENGINE_H_
