// Copyright 2026 The SELI Geometry Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "seli/metrics.hpp"
#include "seli/spectral.hpp"
#include "seli/ufm_state.hpp"

namespace seli {

struct RidgeDecay {
  double factor = 10.0;
  int every_epochs = 2000;
  double floor = 1e-8;  // raw units
};

/// Regularizer strengths are raw (the objective is multiplied by
/// objective_scale afterwards). With objective_scale = 1/n and raw strengths
/// n * lambda_n this is the per-sample convention.
struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 1000;
  int batch_size = 0;  // 0 = full batch
  double ridge_lambda = 0.0;
  double logit_lambda = 0.0;
  std::optional<RidgeDecay> ridge_decay;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  double objective_scale = 1.0;

  void validate(int n) const;
};

struct TraceRecord {
  int epoch = 0;
  double objective = 0.0;
  double lambda = 0.0;  // ridge strength in force, raw units
  MetricSnapshot metrics;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
};

/// Raised when the objective becomes non-finite; carries the trace up to the
/// last finite epoch.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(int epoch, TrainTrace partial);
  int epoch;
  TrainTrace trace;
};

struct TrainResult {
  UfmState state;
  TrainTrace trace;
};

/// Independent N(0, init_scale^2) entries from a seeded mt19937_64.
/// Throws InvalidSpec if d < k - 1.
UfmState init_ufm(const ImbalanceSpec& spec, int d, std::uint64_t seed, double init_scale);
UfmState init_ufm(const LabeledDataset& ds, int d, std::uint64_t seed, double init_scale);

/// objective_scale * (CE(W^T H) + (ridge/2)(|W|^2 + |H|^2) + (logit/2)|W^T H|^2).
double objective(const UfmState& s, const LabeledDataset& ds, const TrainConfig& cfg);

struct UfmGradients {
  MatrixXd dW;
  MatrixXd dH;
};

UfmGradients gradients(const UfmState& s, const LabeledDataset& ds, const TrainConfig& cfg);

/// Frobenius norm of the stacked gradient.
double stationarity_residual(const UfmState& s, const LabeledDataset& ds,
                             const TrainConfig& cfg);

/// Epochs at which a trace record is taken: every epoch up to 100, then
/// growing by 1.2x, always including 0 and `epochs`.
std::vector<int> log_schedule(int epochs);

/// Trains in place from `init`. Full-batch GD when batch_size is 0 or n,
/// otherwise shuffled mini-batches without replacement.
TrainResult train(UfmState init, const LabeledDataset& ds, const TrainConfig& cfg);

/// W = scale R^T sqrt(Lambda) V^T, H = scale R^T sqrt(Lambda) U^T with R^T the
/// first k-1 canonical directions of R^d.
UfmState factorized_seli_state(const SvdFactors& f, int d, double scale = 1.0);

struct MarginReport {
  MatrixXd average;  // average(y, c) = (w_y - w_c)^T mu_y, zero diagonal
  double min_margin = 0.0;
};

MarginReport margins(const UfmState& s, const LabeledDataset& ds);

}  // namespace seli
