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

#ifndef FEELSIM_FL_TOY_H_
#define FEELSIM_FL_TOY_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "feelsim/channel_model.h"

namespace feel {

// Flat parameters of a multinomial logistic model: a num_classes x
// num_features weight matrix (row-major) followed by num_classes biases.
struct ModelVector {
  std::vector<double> params;

  std::size_t dim() const { return params.size(); }
  bool AllFinite() const;
};

std::size_t SoftmaxModelDim(int num_features, int num_classes);
ModelVector ZeroModel(int num_features, int num_classes);

struct Dataset {
  int num_features = 0;
  int num_classes = 0;
  std::vector<double> features;  // size() x num_features, row-major
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * num_features,
            static_cast<std::size_t>(num_features)};
  }
  std::vector<int> ClassHistogram() const;
  Dataset Subset(std::span<const std::size_t> indices) const;
};

// Isotropic Gaussian classes around random centers.
struct GaussianMixture {
  int num_features = 0;
  int num_classes = 0;
  double noise_std = 1.0;
  std::vector<double> means;  // num_classes x num_features

  // Centers are drawn N(0, separation^2 I).
  static GaussianMixture Random(int num_features, int num_classes,
                                double separation, Rng& rng);
  // per_class samples of every class, grouped by class.
  Dataset SampleBalanced(int per_class, Rng& rng) const;
};

// Splits full into num_clients disjoint shards of samples_per_client
// samples, each drawn from at most classes_per_client classes. Classes are
// picked with probability proportional to how many samples they have left,
// and each shard is split evenly among its classes. Returns sample indices
// into full. Throws std::invalid_argument when the split is infeasible.
std::vector<std::vector<std::size_t>> PartitionNonIid(
    const Dataset& full, int num_clients, int classes_per_client,
    int samples_per_client, Rng& rng);

struct SgdConfig {
  int tau = 4;
  int batch_size = 32;
  double learning_rate = 0.05;
};

// Mean cross-entropy over the given rows (all rows when indices is empty).
double CrossEntropyLoss(const ModelVector& model, const Dataset& data,
                        std::span<const std::size_t> indices = {});

// Gradient of CrossEntropyLoss with respect to the parameters.
std::vector<double> CrossEntropyGradient(
    const ModelVector& model, const Dataset& data,
    std::span<const std::size_t> indices = {});

// tau steps of mini-batch SGD with batches drawn uniformly without
// replacement. Throws std::invalid_argument on a bad config and
// std::runtime_error if the loss or gradient stops being finite.
ModelVector LocalSgd(const ModelVector& model, const Dataset& data,
                     const SgdConfig& cfg, Rng& rng);

// Element-wise mean. Throws std::invalid_argument on an empty list or
// mismatched dimensions.
ModelVector Aggregate(std::span<const ModelVector> models);

// Fraction of rows whose argmax class (ties to the lowest index) is right.
double Evaluate(const ModelVector& model, const Dataset& test);

// Text checkpoint: a "feelsim-model <dim>" header then one value per line.
void SaveModel(std::ostream& out, const ModelVector& model);
ModelVector LoadModel(std::istream& in);

}  // namespace feel

#endif  // FEELSIM_FL_TOY_H_
