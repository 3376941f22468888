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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "feelsim/channel_model.h"
#include "feelsim/compute_model.h"
#include "feelsim/experiment.h"
#include "feelsim/fl_toy.h"
#include "feelsim/round_engine.h"
#include "feelsim/scheduling.h"
#include "generators.h"
#include "oracles.h"

namespace feel {
namespace {

// Tolerances and budgets.
constexpr int kOracleSnapshots = 10'000;
constexpr double kOracleBudgetS = 10.0;
constexpr int kInvariantRounds = 1'000;
constexpr double kInvariantBudgetS = 60.0;
constexpr int kOrderingRounds = 500;
constexpr int kOrderingSeeds = 5;
constexpr double kOrderingSigmas = 2.0;
constexpr double kFairnessFactor = 2.0;
constexpr int kRoundRobinRounds = 500;
constexpr int kAccuracyRounds = 1'000;
constexpr int kAccuracySeeds = 5;
constexpr double kAccuracySlack = 0.01;
constexpr double kAccuracyGap = 0.02;
constexpr double kAccuracyBudgetS = 600.0;
constexpr double kRateRelTol = 0.005;
constexpr double kKsLimit = 0.01;
constexpr double kGradientTol = 1e-5;
constexpr std::uint64_t kMasterSeed = 20260101;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       since)
      .count();
}

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

Verdict SchedulingOracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(kMasterSeed);
  int mismatches = 0;
  for (int i = 0; i < kOracleSnapshots; ++i) {
    const auto c = gen::IdleSet(rng, 10);
    const PolicyParams p = gen::Params(rng);
    const int n = std::uniform_int_distribution<int>(1, 20)(rng);
    const int done = std::uniform_int_distribution<int>(0, n - 1)(rng);
    mismatches += MrtpPick(c) != oracle::Mrtp(c);
    mismatches += AmrtpPick(c, done, p, n) != oracle::Amrtp(c, done, p, n);
    mismatches += OfMrtpPick(c, done, p, n) != oracle::OfMrtp(c, done, p, n);
  }
  const double t = Seconds(start);
  return {mismatches == 0 && t < kOracleBudgetS,
          Format("%d snapshots x 3 rules, %d mismatches, %.2f s",
                 kOracleSnapshots, mismatches, t)};
}

int CountViolations(const RoundSnapshot& snap, const RoundOutcome& out,
                    int n) {
  int bad = 0;
  const std::size_t k = snap.num_clients();
  bad += !ConservationCheck(out, snap);
  bad += out.scheduled.size() != static_cast<std::size_t>(n);
  std::vector<UploadInterval> all;
  for (std::size_t c = 0; c < k; ++c) {
    for (const UploadInterval& iv : out.intervals[c]) {
      bad += iv.start_s < snap.clients[c].arrival_time_s;
      all.push_back(iv);
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.start_s < b.start_s;
  });
  for (std::size_t i = 1; i < all.size(); ++i) {
    bad += all[i - 1].end_s > all[i].start_s * (1 + 1e-12);
  }
  std::vector<double> last(k, snap.model_bits);
  for (const TraceEvent& e : out.trace) {
    if (e.client < 0) continue;
    bad += e.remaining_bits > last[e.client] * (1 + 1e-12);
    last[e.client] = e.remaining_bits;
  }
  return bad;
}

Verdict EngineInvariants() {
  constexpr int kClients = 20;
  constexpr int kUploads = 5;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(kMasterSeed + 1);
  const RadioParams radio;
  std::vector<double> distances;
  for (int k = 0; k < kClients; ++k) {
    distances.push_back(SampleDistanceKm(radio, rng));
  }
  const auto clients = MakeClients(distances, radio, ComputeProfile{}, 1e6);
  SnapshotParams sp;
  sp.model_bits = 32.0 * SoftmaxModelDim(100, 10);
  int violations = 0;
  int rounds = 0;
  for (PolicyKind kind : {PolicyKind::kMrtp, PolicyKind::kAMrtp,
                          PolicyKind::kOfMrtp, PolicyKind::kRandom,
                          PolicyKind::kRoundRobin}) {
    auto policy = MakePolicy(kind, PolicyParams{}, kMasterSeed);
    FairnessState fairness(kClients);
    for (int r = 0; r < kInvariantRounds; ++r) {
      const RoundSnapshot snap = BuildRoundSnapshot(clients, sp, rng);
      const RoundOutcome out = RunRound(snap, *policy, fairness, kUploads,
                                        RunOptions{.trace = true});
      violations += CountViolations(snap, out, kUploads);
      fairness.Advance(out.ScheduledIds());
      ++rounds;
    }
  }
  const double t = Seconds(start);
  return {violations == 0 && t < kInvariantBudgetS,
          Format("%d rounds over 5 policies, %d violations, %.2f s", rounds,
                 violations, t)};
}

Verdict HandExample() {
  const std::vector<double> arrivals{0.0, 1.0, 2.0};
  const std::vector<double> rates{10.0, 5.0, 10.0};
  const RoundSnapshot snap = MakeSnapshot(10.0, arrivals, rates);
  auto policy = MakePolicy(PolicyKind::kMrtp, PolicyParams{});
  const RoundOutcome out = RunRound(snap, *policy, FairnessState(3), 2);
  const bool ok = out.completion_time_s == 3.0 &&
                  out.ScheduledIds() == std::vector<ClientId>{0, 1} &&
                  out.FinishTime(0) == 1.0 && out.FinishTime(1) == 3.0;
  std::string ids;
  for (ClientId id : out.ScheduledIds()) ids += std::to_string(id) + " ";
  return {ok, Format("T = %.17g s, order [ %s]", out.completion_time_s,
                     ids.c_str())};
}

ExperimentConfig OrderingConfig(PolicyKind kind) {
  ExperimentConfig cfg;
  cfg.rounds = kOrderingRounds;
  cfg.trials = kOrderingSeeds;
  cfg.seed = kMasterSeed;
  cfg.threads = kOrderingSeeds;
  cfg.policy = kind;
  if (kind == PolicyKind::kAMrtp) cfg.policy_params.alpha = 0.7;
  return cfg;
}

struct OrderingRuns {
  ExperimentResult mrtp, of, amrtp, random;
};

const OrderingRuns& Ordering() {
  static const OrderingRuns runs{
      RunExperiment(OrderingConfig(PolicyKind::kMrtp)),
      RunExperiment(OrderingConfig(PolicyKind::kOfMrtp)),
      RunExperiment(OrderingConfig(PolicyKind::kAMrtp)),
      RunExperiment(OrderingConfig(PolicyKind::kRandom))};
  return runs;
}

std::vector<double> TrialLatencies(const ExperimentResult& r) {
  std::vector<double> out;
  for (const TrialSummary& t : r.summary.trials) {
    out.push_back(t.mean_latency_s);
  }
  return out;
}

// Paired comparison lower < higher: returns the margin in standard errors.
double PairedSigmas(const ExperimentResult& lower,
                    const ExperimentResult& higher) {
  const auto a = TrialLatencies(lower);
  const auto b = TrialLatencies(higher);
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = b[i] - a[i];
  const MeanStd m = ComputeMeanStd(diff);
  const double se = m.std / std::sqrt(static_cast<double>(m.count));
  if (se == 0.0) {
    return m.mean > 0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  }
  return m.mean / se;
}

Verdict LatencyOrdering() {
  const OrderingRuns& r = Ordering();
  const double s1 = PairedSigmas(r.mrtp, r.of);
  const double s2 = PairedSigmas(r.of, r.amrtp);
  const double s3 = PairedSigmas(r.amrtp, r.random);
  const bool ok =
      s1 > kOrderingSigmas && s2 > kOrderingSigmas && s3 > kOrderingSigmas;
  return {ok,
          Format("mean latency mrtp %.4g s, of_mrtp %.4g s, a_mrtp %.4g s, "
                 "random %.4g s; paired margins %.1f / %.1f / %.1f SE "
                 "(need > %.0f each)",
                 r.mrtp.summary.latency.mean, r.of.summary.latency.mean,
                 r.amrtp.summary.latency.mean, r.random.summary.latency.mean,
                 s1, s2, s3, kOrderingSigmas)};
}

// Mean over trials of max/min participation; infinite if anyone never
// participated.
double ParticipationRatio(const ExperimentResult& r) {
  double sum = 0.0;
  for (const TrialResult& t : r.trials) {
    const auto [lo, hi] = std::minmax_element(t.participation_counts.begin(),
                                              t.participation_counts.end());
    if (*lo == 0) return std::numeric_limits<double>::infinity();
    sum += static_cast<double>(*hi) / *lo;
  }
  return sum / r.trials.size();
}

Verdict Fairness() {
  const OrderingRuns& r = Ordering();
  double max_freq = 0.0;
  for (const TrialResult& t : r.of.trials) {
    max_freq = std::max(max_freq, t.max_decision_frequency);
  }
  const double f_max = r.of.config.policy_params.f_max;
  const double of_ratio = ParticipationRatio(r.of);
  const double mrtp_ratio = ParticipationRatio(r.mrtp);
  const bool ok = max_freq < f_max && std::isfinite(of_ratio) &&
                  mrtp_ratio >= kFairnessFactor * of_ratio;
  return {ok, Format("of_mrtp max decision frequency %.4f (< %.2f); "
                     "max/min participation of_mrtp %.3g, mrtp %.3g",
                     max_freq, f_max, of_ratio, mrtp_ratio)};
}

Verdict RoundRobinAges() {
  constexpr int kClients = 100;
  constexpr int kUploads = 20;
  Rng rng(kMasterSeed + 6);
  std::uniform_real_distribution<double> rate(1e3, 1e6);
  auto policy = MakePolicy(PolicyKind::kRoundRobin, PolicyParams{});
  FairnessState fairness(kClients);
  const std::vector<double> arrivals(kClients, 0.0);
  int ceiling = 0;
  bool steady = true;
  for (int r = 1; r <= kRoundRobinRounds; ++r) {
    std::vector<double> rates(kClients);
    for (double& x : rates) x = rate(rng);
    const RoundSnapshot snap = MakeSnapshot(32320.0, arrivals, rates);
    const RoundOutcome out = RunRound(snap, *policy, fairness, kUploads);
    const int max_age = *std::max_element(fairness.ages().begin(),
                                          fairness.ages().end());
    ceiling = std::max(ceiling, max_age);
    if (r >= kClients / kUploads && max_age != kClients / kUploads) {
      steady = false;
    }
    fairness.Advance(out.ScheduledIds());
  }
  return {steady && ceiling == 5,
          Format("max age %d over %d rounds, steady at 5 from round 5: %s",
                 ceiling, kRoundRobinRounds, steady ? "yes" : "no")};
}

Verdict AccuracyGap() {
  const auto start = std::chrono::steady_clock::now();
  auto run = [](PolicyKind kind) {
    ExperimentConfig cfg;
    cfg.train = true;
    cfg.rounds = kAccuracyRounds;
    cfg.trials = kAccuracySeeds;
    cfg.seed = kMasterSeed;
    cfg.threads = kAccuracySeeds;
    cfg.policy = kind;
    return RunExperiment(cfg).summary.final_accuracy.mean;
  };
  const double of = run(PolicyKind::kOfMrtp);
  const double random = run(PolicyKind::kRandom);
  const double mrtp = run(PolicyKind::kMrtp);
  const double t = Seconds(start);
  const bool ok = of >= random - kAccuracySlack && of > mrtp + kAccuracyGap &&
                  t < kAccuracyBudgetS;
  return {ok, Format("final accuracy of_mrtp %.4f, random %.4f, mrtp %.4f, "
                     "%.1f s",
                     of, random, mrtp, t)};
}

Verdict Numerics() {
  Rng rng(kMasterSeed + 8);
  // Ergodic rate against Monte Carlo with an independent fading sampler.
  constexpr int kDraws = 2'000'000;
  double worst_rate = 0.0;
  const RadioParams radio;
  for (double d : {0.02, 0.1, 0.25, 0.5}) {
    const RadioGeometry g = RadioGeometry::FromDistance(d, radio);
    const double snr = g.MeanSnr(Direction::kUplink);
    std::exponential_distribution<double> fade(1.0);
    double sum = 0.0;
    for (int i = 0; i < kDraws; ++i) sum += std::log2(1.0 + snr * fade(rng));
    const double mc = 1e6 * sum / kDraws;
    const double analytic = LongTermAverageRate(g, Direction::kUplink, 1e6);
    worst_rate = std::max(worst_rate, std::abs(analytic - mc) / mc);
  }
  // Compute latency against its closed-form CDF.
  const ComputeProfile profile;
  std::vector<double> samples(100'000);
  for (double& s : samples) s = SampleComputeLatency(profile, rng);
  const double ks = oracle::KsDistance(samples, [&](double t) {
    const double shift = t / profile.tau - profile.t_min_s;
    return shift <= 0 ? 0.0 : 1.0 - std::exp(-shift / profile.mu_s());
  });
  // Softmax gradient against central differences.
  double worst_grad = 0.0;
  std::normal_distribution<double> normal(0.0, 0.3);
  for (int pair = 0; pair < 10; ++pair) {
    const Dataset d =
        GaussianMixture::Random(6, 4, 1.0, rng).SampleBalanced(5, rng);
    ModelVector m = ZeroModel(6, 4);
    for (double& p : m.params) p = normal(rng);
    const auto g = CrossEntropyGradient(m, d);
    constexpr double kStep = 1e-4;
    for (std::size_t i = 0; i < m.dim(); ++i) {
      ModelVector up = m, down = m;
      up.params[i] += kStep;
      down.params[i] -= kStep;
      const double fd = (oracle::SoftmaxLoss(up, d) -
                         oracle::SoftmaxLoss(down, d)) / (2 * kStep);
      worst_grad = std::max(worst_grad, std::abs(g[i] - fd));
    }
  }
  const bool ok =
      worst_rate < kRateRelTol && ks < kKsLimit && worst_grad < kGradientTol;
  return {ok, Format("rate rel. error %.2e (< %.1e), KS %.4f (< %.2f), "
                     "gradient error %.2e (< %.0e)",
                     worst_rate, kRateRelTol, ks, kKsLimit, worst_grad,
                     kGradientTol)};
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict Determinism() {
  ExperimentConfig cfg;
  cfg.num_clients = 30;
  cfg.num_participants = 6;
  cfg.rounds = 100;
  cfg.trials = 3;
  cfg.seed = kMasterSeed;
  cfg.train = true;
  cfg.eval_every = 10;
  cfg.trace = true;
  cfg.task.samples_per_client = 40;
  const auto base = std::filesystem::temp_directory_path() /
                    "feelsim_acceptance_determinism";
  std::filesystem::remove_all(base);
  EmitOutputs(RunExperiment(cfg), base / "a");
  cfg.threads = 3;
  EmitOutputs(RunExperiment(cfg), base / "b");
  bool same = true;
  std::size_t bytes = 0;
  for (const char* f : {"rounds.csv", "summary.jsonl", "plot.csv",
                        "trace.jsonl"}) {
    const std::string a = ReadFile(base / "a" / f);
    same = same && !a.empty() && a == ReadFile(base / "b" / f);
    bytes += a.size();
  }
  std::filesystem::remove_all(base);
  return {same, Format("two runs, %zu bytes of output compared, %s", bytes,
                       same ? "identical" : "different")};
}

}  // namespace
}  // namespace feel

int main() {
  using feel::Verdict;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"C1 scheduling rules match brute-force oracles", feel::SchedulingOracle},
      {"C2 round-engine invariants", feel::EngineInvariants},
      {"C3 hand-simulated MRTP round", feel::HandExample},
      {"C4 latency ordering mrtp < of_mrtp < a_mrtp < random",
       feel::LatencyOrdering},
      {"C5 fairness under of_mrtp", feel::Fairness},
      {"C6 round-robin age ceiling", feel::RoundRobinAges},
      {"C7 accuracy gap on the toy task", feel::AccuracyGap},
      {"C8 numerical checks", feel::Numerics},
      {"C9 byte-identical reruns", feel::Determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s  %s: %s\n", v.pass ? "PASS" : "FAIL", name,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
