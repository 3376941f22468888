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

#include "feelsim/fl_toy.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace feel {

bool ModelVector::AllFinite() const {
  return std::all_of(params.begin(), params.end(),
                     [](double v) { return std::isfinite(v); });
}

std::size_t SoftmaxModelDim(int num_features, int num_classes) {
  return static_cast<std::size_t>(num_features + 1) * num_classes;
}

ModelVector ZeroModel(int num_features, int num_classes) {
  return {std::vector<double>(SoftmaxModelDim(num_features, num_classes), 0.0)};
}

std::vector<int> Dataset::ClassHistogram() const {
  std::vector<int> hist(num_classes, 0);
  for (int y : labels) ++hist.at(y);
  return hist;
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_features = num_features;
  out.num_classes = num_classes;
  out.features.reserve(indices.size() * num_features);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels.at(i));
  }
  return out;
}

GaussianMixture GaussianMixture::Random(int num_features, int num_classes,
                                        double separation, Rng& rng) {
  if (num_features < 1 || num_classes < 2) {
    throw std::invalid_argument("mixture needs >= 1 feature and >= 2 classes");
  }
  GaussianMixture g;
  g.num_features = num_features;
  g.num_classes = num_classes;
  std::normal_distribution<double> normal(0.0, separation);
  g.means.resize(static_cast<std::size_t>(num_features) * num_classes);
  for (double& m : g.means) m = normal(rng);
  return g;
}

Dataset GaussianMixture::SampleBalanced(int per_class, Rng& rng) const {
  Dataset d;
  d.num_features = num_features;
  d.num_classes = num_classes;
  const std::size_t n = static_cast<std::size_t>(per_class) * num_classes;
  d.features.reserve(n * num_features);
  d.labels.reserve(n);
  std::normal_distribution<double> noise(0.0, noise_std);
  for (int c = 0; c < num_classes; ++c) {
    const double* center = means.data() + static_cast<std::size_t>(c) *
                                               num_features;
    for (int i = 0; i < per_class; ++i) {
      for (int f = 0; f < num_features; ++f) {
        d.features.push_back(center[f] + noise(rng));
      }
      d.labels.push_back(c);
    }
  }
  return d;
}

std::vector<std::vector<std::size_t>> PartitionNonIid(
    const Dataset& full, int num_clients, int classes_per_client,
    int samples_per_client, Rng& rng) {
  if (num_clients < 1 || classes_per_client < 1 || samples_per_client < 1) {
    throw std::invalid_argument(
        "partition needs positive clients, classes and samples per client");
  }
  if (static_cast<std::size_t>(num_clients) * samples_per_client >
      full.size()) {
    throw std::invalid_argument("not enough samples for the partition");
  }
  std::vector<std::vector<std::size_t>> pool(full.num_classes);
  for (std::size_t i = 0; i < full.size(); ++i) {
    pool[full.labels[i]].push_back(i);
  }
  for (auto& p : pool) std::shuffle(p.begin(), p.end(), rng);

  const int max_classes = std::min(classes_per_client, full.num_classes);
  std::vector<std::vector<std::size_t>> shards(num_clients);
  for (int k = 0; k < num_clients; ++k) {
    std::vector<int> chosen;
    // Use as many classes as possible; fewer classes need larger shares.
    for (int m = max_classes; m >= 1 && chosen.empty(); --m) {
      const std::size_t need = (samples_per_client + m - 1) / m;
      std::vector<int> eligible;
      for (int c = 0; c < full.num_classes; ++c) {
        if (pool[c].size() >= need) eligible.push_back(c);
      }
      if (static_cast<int>(eligible.size()) < m) continue;
      for (int j = 0; j < m; ++j) {
        std::vector<double> weights;
        for (int c : eligible) weights.push_back(pool[c].size());
        std::discrete_distribution<std::size_t> pick(weights.begin(),
                                                     weights.end());
        const std::size_t at = pick(rng);
        chosen.push_back(eligible[at]);
        eligible.erase(eligible.begin() + at);
      }
    }
    if (chosen.empty()) {
      throw std::invalid_argument("infeasible partition at client " +
                                  std::to_string(k));
    }
    std::sort(chosen.begin(), chosen.end());
    const int m = static_cast<int>(chosen.size());
    for (int j = 0; j < m; ++j) {
      const int share = samples_per_client / m + (j < samples_per_client % m);
      auto& p = pool[chosen[j]];
      shards[k].insert(shards[k].end(), p.end() - share, p.end());
      p.resize(p.size() - share);
    }
  }
  return shards;
}

namespace {

void CheckShapes(const ModelVector& model, const Dataset& data) {
  if (model.dim() != SoftmaxModelDim(data.num_features, data.num_classes)) {
    throw std::invalid_argument("model dimension " +
                                std::to_string(model.dim()) +
                                " does not match the dataset");
  }
}

// Writes class logits of row x into logits.
void Logits(const ModelVector& model, int num_classes,
            std::span<const double> x, std::span<double> logits) {
  const std::size_t nf = x.size();
  const double* bias = model.params.data() + nf * num_classes;
  for (int c = 0; c < num_classes; ++c) {
    const double* w = model.params.data() + c * nf;
    double z = bias[c];
    for (std::size_t f = 0; f < nf; ++f) z += w[f] * x[f];
    logits[c] = z;
  }
}

// Softmax in place; returns log-sum-exp.
double SoftmaxInPlace(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& z : v) {
    z = std::exp(z - mx);
    sum += z;
  }
  for (double& z : v) z /= sum;
  return mx + std::log(sum);
}

template <typename Fn>
void ForEachRow(const Dataset& data, std::span<const std::size_t> indices,
                Fn fn) {
  if (indices.empty()) {
    for (std::size_t i = 0; i < data.size(); ++i) fn(i);
  } else {
    for (std::size_t i : indices) fn(i);
  }
}

}  // namespace

double CrossEntropyLoss(const ModelVector& model, const Dataset& data,
                        std::span<const std::size_t> indices) {
  CheckShapes(model, data);
  std::vector<double> z(data.num_classes);
  double total = 0.0;
  std::size_t n = 0;
  ForEachRow(data, indices, [&](std::size_t i) {
    Logits(model, data.num_classes, data.row(i), z);
    const double target = z[data.labels[i]];
    const double lse = SoftmaxInPlace(z);
    total += lse - target;
    ++n;
  });
  return n == 0 ? 0.0 : total / n;
}

std::vector<double> CrossEntropyGradient(
    const ModelVector& model, const Dataset& data,
    std::span<const std::size_t> indices) {
  CheckShapes(model, data);
  const std::size_t nf = data.num_features;
  const int nc = data.num_classes;
  std::vector<double> grad(model.dim(), 0.0);
  std::vector<double> p(nc);
  std::size_t n = 0;
  ForEachRow(data, indices, [&](std::size_t i) {
    const auto x = data.row(i);
    Logits(model, nc, x, p);
    SoftmaxInPlace(p);
    p[data.labels[i]] -= 1.0;
    for (int c = 0; c < nc; ++c) {
      double* g = grad.data() + c * nf;
      for (std::size_t f = 0; f < nf; ++f) g[f] += p[c] * x[f];
      grad[nf * nc + c] += p[c];
    }
    ++n;
  });
  if (n > 0) {
    for (double& g : grad) g /= static_cast<double>(n);
  }
  return grad;
}

ModelVector LocalSgd(const ModelVector& model, const Dataset& data,
                     const SgdConfig& cfg, Rng& rng) {
  CheckShapes(model, data);
  if (cfg.tau < 1) throw std::invalid_argument("tau must be >= 1");
  if (data.size() == 0) throw std::invalid_argument("empty local dataset");
  if (cfg.batch_size < 1 ||
      static_cast<std::size_t>(cfg.batch_size) > data.size()) {
    throw std::invalid_argument("batch size " + std::to_string(cfg.batch_size) +
                                " must lie in [1, " +
                                std::to_string(data.size()) + "]");
  }
  ModelVector local = model;
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> batch(cfg.batch_size);
  for (int step = 0; step < cfg.tau; ++step) {
    if (static_cast<std::size_t>(cfg.batch_size) == data.size()) {
      batch = all;
    } else {
      std::sample(all.begin(), all.end(), batch.begin(), cfg.batch_size, rng);
    }
    const std::vector<double> grad = CrossEntropyGradient(local, data, batch);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      local.params[j] -= cfg.learning_rate * grad[j];
    }
    if (!local.AllFinite()) {
      std::ostringstream msg;
      msg << "local SGD diverged at step " << step << " (learning rate "
          << cfg.learning_rate << ", batch loss "
          << CrossEntropyLoss(model, data, batch) << " before the update)";
      throw std::runtime_error(msg.str());
    }
  }
  return local;
}

ModelVector Aggregate(std::span<const ModelVector> models) {
  if (models.empty()) throw std::invalid_argument("nothing to aggregate");
  const std::size_t d = models.front().dim();
  ModelVector mean{std::vector<double>(d, 0.0)};
  for (const ModelVector& m : models) {
    if (m.dim() != d) {
      throw std::invalid_argument("cannot aggregate models of dimension " +
                                  std::to_string(d) + " and " +
                                  std::to_string(m.dim()));
    }
    for (std::size_t j = 0; j < d; ++j) mean.params[j] += m.params[j];
  }
  const double inv = 1.0 / static_cast<double>(models.size());
  for (double& v : mean.params) v *= inv;
  return mean;
}

double Evaluate(const ModelVector& model, const Dataset& test) {
  CheckShapes(model, test);
  if (test.size() == 0) throw std::invalid_argument("empty test set");
  std::vector<double> z(test.num_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    Logits(model, test.num_classes, test.row(i), z);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    if (best == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / test.size();
}

void SaveModel(std::ostream& out, const ModelVector& model) {
  out << "feelsim-model " << model.dim() << '\n';
  out.precision(std::numeric_limits<double>::max_digits10);
  for (double v : model.params) out << v << '\n';
}

ModelVector LoadModel(std::istream& in) {
  std::string magic;
  std::size_t dim = 0;
  if (!(in >> magic >> dim) || magic != "feelsim-model") {
    throw std::runtime_error("not a feelsim model checkpoint");
  }
  ModelVector m{std::vector<double>(dim)};
  for (std::size_t j = 0; j < dim; ++j) {
    if (!(in >> m.params[j])) {
      throw std::runtime_error("checkpoint truncated at entry " +
                               std::to_string(j) + " of " +
                               std::to_string(dim));
    }
  }
  return m;
}

}  // namespace feel
