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

#include "feelsim/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "feelsim/round_engine.h"
#include "json.hpp"

namespace feel {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("bad value '" + std::string(text) +
                                "' for key '" + std::string(key) + "'");
  }
  return value;
}

bool ParseBool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("bad boolean '" + std::string(text) +
                              "' for key '" + std::string(key) + "'");
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ExperimentConfig::EffectiveModelBits() const {
  if (model_bits > 0.0) return model_bits;
  return 32.0 * static_cast<double>(
                    SoftmaxModelDim(task.num_features, task.num_classes));
}

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid config: " + what);
  };
  if (num_clients < 1) fail("num_clients must be >= 1");
  if (num_participants < 1 || num_participants > num_clients) {
    fail("num_participants must lie in [1, num_clients]");
  }
  if (rounds < 1) fail("rounds must be >= 1");
  if (trials < 1) fail("trials must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be > 0");
  if (model_bits < 0.0) fail("model_bits must be >= 0");
  if (!(fountain_overhead >= 1.0)) fail("fountain_overhead must be >= 1");
  if (!(radio.region_radius_km >= radio.min_distance_km) ||
      !(radio.min_distance_km > 0.0)) {
    fail("need 0 < min_distance_km <= region_radius_km");
  }
  if (!(radio.noise_ps_watts > 0.0) || !(radio.noise_client_watts > 0.0)) {
    fail("noise variances must be > 0");
  }
  if (eval_every < 0) fail("eval_every must be >= 0");
  if (compute.tau != sgd.tau) fail("compute and SGD step counts differ");
  try {
    policy_params.Validate();
    compute.Validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (train) {
    if (task.num_classes < 2 || task.num_features < 1) {
      fail("toy task needs >= 2 classes and >= 1 feature");
    }
    if (task.classes_per_client < 1) fail("classes_per_client must be >= 1");
    if (task.samples_per_client < 1) fail("samples_per_client must be >= 1");
    if (task.test_samples_per_class < 1) {
      fail("test_samples_per_class must be >= 1");
    }
    if (sgd.batch_size < 1 || sgd.batch_size > task.samples_per_client) {
      fail("batch_size must lie in [1, samples_per_client]");
    }
    if (!(sgd.learning_rate > 0.0)) fail("learning_rate must be > 0");
    if (task.train_slack < 0.0) fail("train_slack must be >= 0");
  }
}

void ApplyConfigValue(ExperimentConfig& c, std::string_view key,
                      std::string_view value) {
  value = Trim(value);
  auto i = [&] { return ParseNumber<int>(key, value); };
  auto d = [&] { return ParseNumber<double>(key, value); };
  if (key == "num_clients") c.num_clients = i();
  else if (key == "num_participants") c.num_participants = i();
  else if (key == "rounds") c.rounds = i();
  else if (key == "trials") c.trials = i();
  else if (key == "seed") c.seed = ParseNumber<std::uint64_t>(key, value);
  else if (key == "policy") c.policy = ParsePolicyKind(value);
  else if (key == "alpha") c.policy_params.alpha = d();
  else if (key == "age_threshold") c.policy_params.age_threshold = i();
  else if (key == "gamma_min") c.policy_params.gamma_min = d();
  else if (key == "f_max") c.policy_params.f_max = d();
  else if (key == "region_radius_km") c.radio.region_radius_km = d();
  else if (key == "min_distance_km") c.radio.min_distance_km = d();
  else if (key == "tx_power_ps_dbm") c.radio.tx_power_ps_dbm = d();
  else if (key == "tx_power_client_dbm") c.radio.tx_power_client_dbm = d();
  else if (key == "noise_ps_watts") c.radio.noise_ps_watts = d();
  else if (key == "noise_client_watts") c.radio.noise_client_watts = d();
  else if (key == "bandwidth_hz") c.bandwidth_hz = d();
  else if (key == "model_bits") c.model_bits = d();
  else if (key == "fountain_overhead") c.fountain_overhead = d();
  else if (key == "tau") c.compute.tau = c.sgd.tau = i();
  else if (key == "t_min_s") c.compute.t_min_s = d();
  else if (key == "t_mean_s") c.compute.t_mean_s = d();
  else if (key == "batch_size") c.sgd.batch_size = i();
  else if (key == "learning_rate") c.sgd.learning_rate = d();
  else if (key == "num_features") c.task.num_features = i();
  else if (key == "num_classes") c.task.num_classes = i();
  else if (key == "classes_per_client") c.task.classes_per_client = i();
  else if (key == "samples_per_client") c.task.samples_per_client = i();
  else if (key == "test_samples_per_class") {
    c.task.test_samples_per_class = i();
  } else if (key == "class_separation") c.task.class_separation = d();
  else if (key == "train_slack") c.task.train_slack = d();
  else if (key == "train") c.train = ParseBool(key, value);
  else if (key == "eval_every") c.eval_every = i();
  else if (key == "fixed_placement_seed") {
    c.fixed_placement_seed = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "record_fairness") {
    c.record_fairness = ParseBool(key, value);
  } else if (key == "trace") c.trace = ParseBool(key, value);
  else if (key == "threads") c.threads = i();
  else
    throw std::invalid_argument("unknown config key '" + std::string(key) +
                                "'");
}

ExperimentConfig ParseConfig(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    try {
      ApplyConfigValue(config, Trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return config;
}

ExperimentConfig LoadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  return ParseConfig(in);
}

MeanStd ComputeMeanStd(std::span<const double> values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) {
    out.mean = out.std = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (values.size() - 1));
  }
  return out;
}

Summary SummarizeRecords(std::span<const MetricsRecord> records,
                         std::string_view policy, int num_clients) {
  Summary summary;
  summary.policy = std::string(policy);
  std::vector<double> latencies;
  std::vector<double> accuracies;
  std::size_t i = 0;
  while (i < records.size()) {
    TrialSummary t;
    t.trial = records[i].trial;
    t.final_accuracy = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> counts(num_clients, 0);
    double latency_sum = 0.0;
    for (; i < records.size() && records[i].trial == t.trial; ++i) {
      const MetricsRecord& r = records[i];
      ++t.rounds;
      latency_sum += r.latency_s;
      t.final_wallclock_s = r.wallclock_s;
      if (!std::isnan(r.accuracy)) t.final_accuracy = r.accuracy;
      for (ClientId k : r.scheduled_ids) ++counts.at(k);
    }
    t.mean_latency_s = latency_sum / t.rounds;
    if (!counts.empty()) {
      const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
      t.min_participation = *mn;
      t.max_participation = *mx;
    }
    latencies.push_back(t.mean_latency_s);
    if (!std::isnan(t.final_accuracy)) accuracies.push_back(t.final_accuracy);
    summary.trials.push_back(t);
  }
  summary.latency = ComputeMeanStd(latencies);
  summary.final_accuracy = ComputeMeanStd(accuracies);
  return summary;
}

std::vector<MetricsRecord> ExperimentResult::AllRecords() const {
  std::vector<MetricsRecord> all;
  for (const TrialResult& t : trials) {
    all.insert(all.end(), t.records.begin(), t.records.end());
  }
  return all;
}

std::uint64_t DeriveSeed(std::uint64_t master, int trial, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

namespace {

struct TrainingState {
  std::vector<Dataset> local_data;
  Dataset test;
  ModelVector global;
  Rng sgd_rng;
};

TrainingState SetUpTraining(const ExperimentConfig& cfg, int trial) {
  const TaskConfig& task = cfg.task;
  Rng data_rng(DeriveSeed(cfg.seed, trial, Stream::kData));
  const GaussianMixture mixture = GaussianMixture::Random(
      task.num_features, task.num_classes, task.class_separation, data_rng);
  const double needed = static_cast<double>(cfg.num_clients) *
                        task.samples_per_client / task.num_classes;
  const int per_class =
      static_cast<int>(std::ceil(needed * (1.0 + task.train_slack)));
  const Dataset train = mixture.SampleBalanced(per_class, data_rng);
  TrainingState state{{},
                      mixture.SampleBalanced(task.test_samples_per_class,
                                             data_rng),
                      ZeroModel(task.num_features, task.num_classes),
                      Rng(DeriveSeed(cfg.seed, trial, Stream::kSgd))};
  for (const auto& shard :
       PartitionNonIid(train, cfg.num_clients, task.classes_per_client,
                       task.samples_per_client, data_rng)) {
    state.local_data.push_back(train.Subset(shard));
  }
  return state;
}

TrialResult RunTrial(const ExperimentConfig& cfg, int trial) {
  TrialResult result;
  result.trial = trial;

  Rng placement_rng(
      cfg.fixed_placement_seed
          ? DeriveSeed(*cfg.fixed_placement_seed, 0, Stream::kPlacement)
          : DeriveSeed(cfg.seed, trial, Stream::kPlacement));
  for (int k = 0; k < cfg.num_clients; ++k) {
    result.distances_km.push_back(SampleDistanceKm(cfg.radio, placement_rng));
  }
  const std::vector<ClientState> clients = MakeClients(
      result.distances_km, cfg.radio, cfg.compute, cfg.bandwidth_hz);

  Rng channel_rng(DeriveSeed(cfg.seed, trial, Stream::kChannel));
  auto policy = MakePolicy(cfg.policy, cfg.policy_params,
                           DeriveSeed(cfg.seed, trial, Stream::kPolicy));
  FairnessState fairness(cfg.num_clients);
  std::optional<TrainingState> training;
  if (cfg.train) training = SetUpTraining(cfg, trial);

  SnapshotParams snap_params;
  snap_params.model_bits = cfg.EffectiveModelBits();
  snap_params.bandwidth_hz = cfg.bandwidth_hz;
  snap_params.fountain_overhead = cfg.fountain_overhead;
  RunOptions run_options;
  run_options.trace = cfg.trace;

  std::ostringstream trace;
  double wallclock = 0.0;
  for (int round = 1; round <= cfg.rounds; ++round) {
    const RoundSnapshot snapshot =
        BuildRoundSnapshot(clients, snap_params, channel_rng);
    const RoundOutcome outcome =
        RunRound(snapshot, *policy, fairness, cfg.num_participants,
                 run_options);
    for (const Decision& d : outcome.decisions) {
      result.max_decision_frequency =
          std::max(result.max_decision_frequency, d.frequency);
    }

    MetricsRecord rec;
    rec.trial = trial;
    rec.round = round;
    rec.latency_s = outcome.completion_time_s;
    wallclock += outcome.completion_time_s;
    rec.wallclock_s = wallclock;
    rec.scheduled_ids = outcome.ScheduledIds();
    rec.accuracy = std::numeric_limits<double>::quiet_NaN();
    if (cfg.record_fairness) {
      rec.ages = fairness.ages();
      for (int k = 0; k < cfg.num_clients; ++k) {
        rec.frequencies.push_back(fairness.Frequency(k));
      }
    }

    if (training) {
      std::vector<ModelVector> updates;
      updates.reserve(rec.scheduled_ids.size());
      for (ClientId k : rec.scheduled_ids) {
        updates.push_back(LocalSgd(training->global, training->local_data[k],
                                   cfg.sgd, training->sgd_rng));
      }
      training->global = Aggregate(updates);
      const bool evaluate = round == cfg.rounds ||
                            (cfg.eval_every > 0 && round % cfg.eval_every == 0);
      if (evaluate) rec.accuracy = Evaluate(training->global, training->test);
    }

    if (cfg.trace) WriteTrace(trace, outcome, trial, round);
    fairness.Advance(rec.scheduled_ids);
    result.records.push_back(std::move(rec));
  }
  result.participation_counts = fairness.participation_counts();
  result.trace_jsonl = trace.str();
  return result;
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  ExperimentResult result;
  result.config = config;
  result.trials.resize(config.trials);
  if (config.threads <= 1) {
    for (int t = 0; t < config.trials; ++t) {
      result.trials[t] = RunTrial(config, t);
    }
  } else {
    for (int first = 0; first < config.trials; first += config.threads) {
      const int last = std::min(config.trials, first + config.threads);
      std::vector<std::future<TrialResult>> pending;
      for (int t = first; t < last; ++t) {
        pending.push_back(
            std::async(std::launch::async, RunTrial, std::cref(config), t));
      }
      for (int t = first; t < last; ++t) {
        result.trials[t] = pending[t - first].get();
      }
    }
  }
  const std::vector<MetricsRecord> all = result.AllRecords();
  result.summary =
      SummarizeRecords(all, PolicyName(config.policy), config.num_clients);
  return result;
}

void WriteRoundsCsv(std::ostream& out,
                    std::span<const MetricsRecord> records) {
  out << "trial,round,wallclock_s,latency_s,accuracy,scheduled_ids\n";
  for (const MetricsRecord& r : records) {
    out << r.trial << ',' << r.round << ',' << FormatDouble(r.wallclock_s)
        << ',' << FormatDouble(r.latency_s) << ',';
    if (!std::isnan(r.accuracy)) out << FormatDouble(r.accuracy);
    out << ',';
    for (std::size_t j = 0; j < r.scheduled_ids.size(); ++j) {
      if (j > 0) out << ';';
      out << r.scheduled_ids[j];
    }
    out << '\n';
  }
}

std::vector<MetricsRecord> ReadRoundsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      Trim(line) != "trial,round,wallclock_s,latency_s,accuracy,scheduled_ids") {
    throw std::runtime_error("rounds CSV is missing its header");
  }
  std::vector<MetricsRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = Trim(line);
    if (view.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      fields.push_back(view.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) {
      throw std::runtime_error("rounds CSV line " + std::to_string(line_no) +
                               ": expected 6 fields");
    }
    try {
      MetricsRecord r;
      r.trial = ParseNumber<int>("trial", fields[0]);
      r.round = ParseNumber<int>("round", fields[1]);
      r.wallclock_s = ParseNumber<double>("wallclock_s", fields[2]);
      r.latency_s = ParseNumber<double>("latency_s", fields[3]);
      r.accuracy = fields[4].empty()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : ParseNumber<double>("accuracy", fields[4]);
      std::string_view ids = fields[5];
      while (!ids.empty()) {
        const auto semi = ids.find(';');
        r.scheduled_ids.push_back(
            ParseNumber<ClientId>("scheduled_ids", ids.substr(0, semi)));
        if (semi == std::string_view::npos) break;
        ids.remove_prefix(semi + 1);
      }
      records.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("rounds CSV line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return records;
}

void WriteSummaryJsonl(std::ostream& out, const Summary& summary) {
  for (const TrialSummary& t : summary.trials) {
    nlohmann::ordered_json j;
    j["kind"] = "trial";
    j["policy"] = summary.policy;
    j["trial"] = t.trial;
    j["rounds"] = t.rounds;
    j["mean_latency_s"] = t.mean_latency_s;
    j["final_wallclock_s"] = t.final_wallclock_s;
    j["final_accuracy"] = t.final_accuracy;
    j["max_participation"] = t.max_participation;
    j["min_participation"] = t.min_participation;
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json j;
  j["kind"] = "summary";
  j["policy"] = summary.policy;
  j["trials"] = summary.trials.size();
  j["latency_mean_s"] = summary.latency.mean;
  j["latency_std_s"] = summary.latency.std;
  j["accuracy_mean"] = summary.final_accuracy.mean;
  j["accuracy_std"] = summary.final_accuracy.std;
  out << j.dump() << '\n';
}

void WritePlotData(std::ostream& out, std::span<const MetricsRecord> records,
                   std::string_view policy) {
  out << "policy,trial,wallclock_s,accuracy\n";
  for (const MetricsRecord& r : records) {
    if (std::isnan(r.accuracy)) continue;
    out << policy << ',' << r.trial << ',' << FormatDouble(r.wallclock_s)
        << ',' << FormatDouble(r.accuracy) << '\n';
  }
}

namespace {

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void CloseChecked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void EmitOutputs(const ExperimentResult& result,
                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " +
                             out_dir.string() + ": " + ec.message());
  }
  const std::vector<MetricsRecord> all = result.AllRecords();
  const std::string_view policy = PolicyName(result.config.policy);

  const auto rounds_path = out_dir / "rounds.csv";
  auto rounds = OpenForWrite(rounds_path);
  WriteRoundsCsv(rounds, all);
  CloseChecked(rounds, rounds_path);

  const auto summary_path = out_dir / "summary.jsonl";
  auto summary = OpenForWrite(summary_path);
  WriteSummaryJsonl(summary, result.summary);
  CloseChecked(summary, summary_path);

  const auto plot_path = out_dir / "plot.csv";
  auto plot = OpenForWrite(plot_path);
  WritePlotData(plot, all, policy);
  CloseChecked(plot, plot_path);

  if (result.config.trace) {
    const auto trace_path = out_dir / "trace.jsonl";
    auto trace = OpenForWrite(trace_path);
    for (const TrialResult& t : result.trials) trace << t.trace_jsonl;
    CloseChecked(trace, trace_path);
  }
}

}  // namespace feel
