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

#ifndef FEELSIM_EXPERIMENT_H_
#define FEELSIM_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feelsim/channel_model.h"
#include "feelsim/compute_model.h"
#include "feelsim/fl_toy.h"
#include "feelsim/scheduling.h"

namespace feel {

// Defaults keep the model large relative to each client's data, so clients
// that are scheduled over and over get overfit.
struct TaskConfig {
  int num_features = 100;
  int num_classes = 10;
  int classes_per_client = 4;
  int samples_per_client = 50;
  int test_samples_per_class = 1000;
  double class_separation = 0.25;
  // Extra training samples per class beyond the exact need, so the random
  // class choice of the partitioner stays feasible.
  double train_slack = 0.25;
};

// Defaults: 100 clients, 20 uploads per round, 4 local steps of batch 32,
// 15/10 dBm transmit powers.
struct ExperimentConfig {
  int num_clients = 100;
  int num_participants = 20;
  int rounds = 5000;
  int trials = 10;
  std::uint64_t seed = 1;
  PolicyKind policy = PolicyKind::kOfMrtp;
  PolicyParams policy_params;
  RadioParams radio;
  double bandwidth_hz = 1e6;
  double model_bits = 0.0;  // 0 means 32 bits per toy-model parameter
  double fountain_overhead = 1.0;
  ComputeProfile compute;
  SgdConfig sgd;
  TaskConfig task;
  bool train = false;
  int eval_every = 0;  // 0 evaluates only after the last round
  std::optional<std::uint64_t> fixed_placement_seed;
  bool record_fairness = false;
  bool trace = false;
  int threads = 1;

  double EffectiveModelBits() const;
  // Throws std::invalid_argument describing the first violated constraint.
  void Validate() const;
};

// Sets one "key = value" entry. Throws std::invalid_argument for unknown
// keys or unparsable values.
void ApplyConfigValue(ExperimentConfig& config, std::string_view key,
                      std::string_view value);

// Reads "key = value" lines; '#' starts a comment.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfigFile(const std::filesystem::path& path);

struct MetricsRecord {
  int trial = 0;
  int round = 0;  // 1-based
  double wallclock_s = 0.0;
  double latency_s = 0.0;
  double accuracy = 0.0;  // NaN when the round was not evaluated
  std::vector<ClientId> scheduled_ids;
  // Filled only with record_fairness: state seen by the round's decisions.
  std::vector<int> ages;
  std::vector<double> frequencies;
};

struct TrialResult {
  int trial = 0;
  std::vector<double> distances_km;
  std::vector<MetricsRecord> records;
  std::vector<int> participation_counts;
  // Largest participation frequency of any client at the moment it was
  // picked, over every decision of the trial.
  double max_decision_frequency = 0.0;
  std::string trace_jsonl;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for fewer than 2 values
  std::size_t count = 0;
};
MeanStd ComputeMeanStd(std::span<const double> values);

struct TrialSummary {
  int trial = 0;
  int rounds = 0;
  double mean_latency_s = 0.0;
  double final_wallclock_s = 0.0;
  double final_accuracy = 0.0;  // NaN without evaluation
  int max_participation = 0;
  int min_participation = 0;
};

struct Summary {
  std::string policy;
  std::vector<TrialSummary> trials;
  MeanStd latency;         // across per-trial mean per-round latencies
  MeanStd final_accuracy;  // across trials that were evaluated
};

// Per-trial statistics from raw records; participation counts are rebuilt
// from scheduled ids over num_clients clients.
Summary SummarizeRecords(std::span<const MetricsRecord> records,
                         std::string_view policy, int num_clients);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  Summary summary;

  std::vector<MetricsRecord> AllRecords() const;
};

// Runs config.trials independent trials. Each trial redraws placement
// (unless fixed_placement_seed is set), resets fairness state and chains
// config.rounds rounds; with config.train each round also runs local SGD on
// the participants and averages their models.
ExperimentResult RunExperiment(const ExperimentConfig& config);

// Per-trial random streams derived from the master seed.
enum class Stream : std::uint32_t { kPlacement, kChannel, kPolicy, kData,
                                    kSgd };
std::uint64_t DeriveSeed(std::uint64_t master, int trial, Stream stream);

void WriteRoundsCsv(std::ostream& out, std::span<const MetricsRecord> records);
std::vector<MetricsRecord> ReadRoundsCsv(std::istream& in);
void WriteSummaryJsonl(std::ostream& out, const Summary& summary);
void WritePlotData(std::ostream& out, std::span<const MetricsRecord> records,
                   std::string_view policy);

// Writes rounds.csv, summary.jsonl, plot.csv and (when traced) trace.jsonl
// under out_dir, creating it if needed. Throws std::runtime_error on I/O
// failure.
void EmitOutputs(const ExperimentResult& result,
                 const std::filesystem::path& out_dir);

}  // namespace feel

#endif  // FEELSIM_EXPERIMENT_H_
