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

// Command-line front end: simulate, train, summarize.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "feelsim/experiment.h"

namespace {

struct RunFlags {
  std::string config_path;
  std::string policy;
  std::uint64_t seed = 0;
  int rounds = 0;
  int trials = 0;
  std::string out_dir = "out";
  bool trace = false;
  std::vector<std::string> overrides;
};

void AddRunFlags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--policy", flags.policy,
                  "mrtp | a_mrtp | of_mrtp | random | round_robin");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--rounds", flags.rounds, "rounds per trial");
  cmd->add_option("--trials", flags.trials, "independent trials");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_flag("--trace", flags.trace, "write per-event trace.jsonl");
  cmd->add_option("--set", flags.overrides, "extra key=value overrides");
}

feel::ExperimentConfig BuildConfig(const RunFlags& flags, const CLI::App& cmd,
                                   bool train) {
  feel::ExperimentConfig config = flags.config_path.empty()
                                      ? feel::ExperimentConfig{}
                                      : feel::LoadConfigFile(flags.config_path);
  for (const std::string& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    feel::ApplyConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (cmd.count("--policy")) config.policy = feel::ParsePolicyKind(flags.policy);
  if (cmd.count("--seed")) config.seed = flags.seed;
  if (cmd.count("--rounds")) config.rounds = flags.rounds;
  if (cmd.count("--trials")) config.trials = flags.trials;
  if (flags.trace) config.trace = true;
  config.train = train;
  config.Validate();
  return config;
}

void PrintSummary(const feel::Summary& s) {
  std::printf("policy %s, %zu trial(s)\n", s.policy.c_str(), s.trials.size());
  std::printf("  per-round latency: %.6g +- %.6g s\n", s.latency.mean,
              s.latency.std);
  if (s.final_accuracy.count > 0) {
    std::printf("  final accuracy:    %.4f +- %.4f\n", s.final_accuracy.mean,
                s.final_accuracy.std);
  }
  for (const feel::TrialSummary& t : s.trials) {
    std::printf("  trial %d: %d rounds, mean latency %.6g s, wall-clock %.6g s",
                t.trial, t.rounds, t.mean_latency_s, t.final_wallclock_s);
    if (!std::isnan(t.final_accuracy)) {
      std::printf(", accuracy %.4f", t.final_accuracy);
    }
    std::printf(", participation %d..%d\n", t.min_participation,
                t.max_participation);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated edge learning client-scheduling simulator"};
  app.require_subcommand(1);

  RunFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "scheduling only");
  AddRunFlags(simulate, sim_flags);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "scheduling plus toy FL training");
  AddRunFlags(train, train_flags);

  std::string csv_path;
  std::string summary_out;
  std::string summary_policy = "unknown";
  int summary_clients = 100;
  auto* summarize =
      app.add_subcommand("summarize", "recompute statistics from rounds.csv");
  summarize->add_option("--csv", csv_path, "rounds.csv to read")
      ->required()
      ->check(CLI::ExistingFile);
  summarize->add_option("--policy", summary_policy, "label for the summary");
  summarize->add_option("--clients", summary_clients,
                        "number of clients K");
  summarize->add_option("--out", summary_out,
                        "write summary.jsonl into this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*summarize) {
      std::ifstream in(csv_path);
      const auto records = feel::ReadRoundsCsv(in);
      const feel::Summary s =
          feel::SummarizeRecords(records, summary_policy, summary_clients);
      PrintSummary(s);
      if (!summary_out.empty()) {
        std::filesystem::create_directories(summary_out);
        std::ofstream out(std::filesystem::path(summary_out) / "summary.jsonl");
        if (!out) throw std::runtime_error("cannot write summary.jsonl");
        feel::WriteSummaryJsonl(out, s);
      }
      return 0;
    }
    const bool is_train = static_cast<bool>(*train);
    const RunFlags& flags = is_train ? train_flags : sim_flags;
    const feel::ExperimentConfig config =
        BuildConfig(flags, is_train ? *train : *simulate, is_train);
    const feel::ExperimentResult result = feel::RunExperiment(config);
    feel::EmitOutputs(result, flags.out_dir);
    PrintSummary(result.summary);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
