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

#include "seli/ufm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace seli {
namespace {

MetricSnapshot safe_snapshot(const UfmState& s, const LabeledDataset& ds,
                             const MetricTargets& seli, const MetricTargets& etf) {
  try {
    return snapshot(s, ds, seli, etf);
  } catch (const DegenerateInput&) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    MetricSnapshot m;
    m.dist_seli_w = m.dist_seli_h = m.dist_seli_z = nan;
    m.dist_etf_w = m.dist_etf_h = m.dist_etf_z = nan;
    m.nc_error = m.norm_ratio_w = m.norm_ratio_h = nan;
    m.min_margin = min_margin(s.logits(), ds);
    return m;
  }
}

double ridge_at(const TrainConfig& cfg, int epoch) {
  if (!cfg.ridge_decay || cfg.ridge_lambda == 0.0) return cfg.ridge_lambda;
  const RidgeDecay& d = *cfg.ridge_decay;
  const int steps = (epoch - 1) / d.every_epochs;
  return std::max(cfg.ridge_lambda / std::pow(d.factor, steps), d.floor);
}

void check_dims(const UfmState& s, const LabeledDataset& ds) {
  if (s.W.cols() != ds.k() || s.H.cols() != ds.n() || s.W.rows() != s.H.rows()) {
    throw std::invalid_argument("UFM state dimensions do not match the dataset");
  }
}

}  // namespace

TrainingAborted::TrainingAborted(int epoch, TrainTrace partial)
    : std::runtime_error("training aborted: non-finite objective at epoch " +
                         std::to_string(epoch)),
      epoch(epoch),
      trace(std::move(partial)) {}

void TrainConfig::validate(int n) const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (batch_size < 0 || batch_size > n) {
    throw std::invalid_argument("batch_size must lie in [0, n]");
  }
  if (ridge_lambda < 0.0 || logit_lambda < 0.0) {
    throw std::invalid_argument("regularization strengths must be nonnegative");
  }
  if (ridge_decay && (!(ridge_decay->factor > 1.0) || ridge_decay->every_epochs < 1)) {
    throw std::invalid_argument("ridge decay needs factor > 1 and every_epochs >= 1");
  }
  if (!(init_scale >= 0.0)) throw std::invalid_argument("init_scale must be nonnegative");
  if (!(objective_scale > 0.0)) throw std::invalid_argument("objective_scale must be positive");
}

UfmState init_ufm(const LabeledDataset& ds, int d, std::uint64_t seed, double init_scale) {
  if (d < ds.k() - 1) {
    throw InvalidSpec("embedding dimension d must be at least k - 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  UfmState s{MatrixXd(d, ds.k()), MatrixXd(d, ds.n())};
  for (Eigen::Index i = 0; i < s.W.size(); ++i) s.W.data()[i] = init_scale * normal(rng);
  for (Eigen::Index i = 0; i < s.H.size(); ++i) s.H.data()[i] = init_scale * normal(rng);
  return s;
}

UfmState init_ufm(const ImbalanceSpec& spec, int d, std::uint64_t seed, double init_scale) {
  return init_ufm(build_dataset(spec), d, seed, init_scale);
}

double objective(const UfmState& s, const LabeledDataset& ds, const TrainConfig& cfg) {
  check_dims(s, ds);
  const MatrixXd Z = s.logits();
  double v = ce_loss(Z, ds);
  if (cfg.ridge_lambda != 0.0) {
    v += 0.5 * cfg.ridge_lambda * (s.W.squaredNorm() + s.H.squaredNorm());
  }
  if (cfg.logit_lambda != 0.0) v += 0.5 * cfg.logit_lambda * Z.squaredNorm();
  return cfg.objective_scale * v;
}

UfmGradients gradients(const UfmState& s, const LabeledDataset& ds, const TrainConfig& cfg) {
  check_dims(s, ds);
  const MatrixXd Z = s.logits();
  MatrixXd G = ce_gradient(Z, ds);
  if (cfg.logit_lambda != 0.0) G += cfg.logit_lambda * Z;
  UfmGradients g{s.H * G.transpose(), s.W * G};
  if (cfg.ridge_lambda != 0.0) {
    g.dW += cfg.ridge_lambda * s.W;
    g.dH += cfg.ridge_lambda * s.H;
  }
  g.dW *= cfg.objective_scale;
  g.dH *= cfg.objective_scale;
  return g;
}

double stationarity_residual(const UfmState& s, const LabeledDataset& ds,
                             const TrainConfig& cfg) {
  const UfmGradients g = gradients(s, ds, cfg);
  return std::sqrt(g.dW.squaredNorm() + g.dH.squaredNorm());
}

std::vector<int> log_schedule(int epochs) {
  std::vector<int> out;
  for (int e = 0; e <= std::min(epochs, 100); ++e) out.push_back(e);
  double next = 100.0 * 1.2;
  while (next < epochs) {
    const int e = static_cast<int>(std::floor(next));
    if (e > out.back()) out.push_back(e);
    next *= 1.2;
  }
  if (out.back() != epochs) out.push_back(epochs);
  return out;
}

TrainResult train(UfmState init, const LabeledDataset& ds, const TrainConfig& cfg) {
  check_dims(init, ds);
  cfg.validate(ds.n());
  const int n = ds.n();
  const bool full = cfg.batch_size == 0 || cfg.batch_size == n;

  const MetricTargets seli =
      representative_targets(seli_gram_targets(numerical_svd(build_sel_matrix(ds))), ds);
  const MetricTargets etf = etf_targets(ds.k());
  const std::vector<int> schedule = log_schedule(cfg.epochs);
  std::size_t next_record = 0;

  TrainResult out{std::move(init), {}};
  UfmState& s = out.state;
  TrainConfig cur = cfg;

  auto record = [&](int epoch) {
    const double obj = objective(s, ds, cur);
    if (!std::isfinite(obj)) throw TrainingAborted(epoch, out.trace);
    if (next_record < schedule.size() && schedule[next_record] == epoch) {
      out.trace.records.push_back(
          {epoch, obj, cur.ridge_lambda, safe_snapshot(s, ds, seli, etf)});
      ++next_record;
    }
  };

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  cur.ridge_lambda = ridge_at(cfg, 1);
  record(0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    cur.ridge_lambda = ridge_at(cfg, epoch);
    if (full) {
      const UfmGradients g = gradients(s, ds, cur);
      s.W -= cfg.learning_rate * g.dW;
      s.H -= cfg.learning_rate * g.dH;
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      const double weight = static_cast<double>(n) / cfg.batch_size;
      for (int start = 0; start < n; start += cfg.batch_size) {
        const int len = std::min(cfg.batch_size, n - start);
        const MatrixXd Z = s.logits();
        MatrixXd G = MatrixXd::Zero(ds.k(), n);
        for (int j = start; j < start + len; ++j) {
          const int i = order[j];
          const int y = ds.labels[i];
          const double m = Z.col(i).maxCoeff();
          VectorXd p = (Z.col(i).array() - m).exp().matrix();
          p /= p.sum();
          p(y) -= 1.0;
          G.col(i) = weight * p;
        }
        if (cur.logit_lambda != 0.0) G += cur.logit_lambda * Z;
        MatrixXd dW = s.H * G.transpose();
        MatrixXd dH = s.W * G;
        if (cur.ridge_lambda != 0.0) {
          dW += cur.ridge_lambda * s.W;
          dH += cur.ridge_lambda * s.H;
        }
        s.W -= cfg.learning_rate * cfg.objective_scale * dW;
        s.H -= cfg.learning_rate * cfg.objective_scale * dH;
      }
    }
    record(epoch);
  }
  return out;
}

UfmState factorized_seli_state(const SvdFactors& f, int d, double scale) {
  const int r = static_cast<int>(f.lambda.size());
  if (d < r) throw InvalidSpec("embedding dimension d must be at least k - 1");
  UfmState s{MatrixXd::Zero(d, f.V.rows()), MatrixXd::Zero(d, f.U.rows())};
  const VectorXd root = f.lambda.cwiseSqrt();
  s.W.topRows(r) = scale * root.asDiagonal() * f.V.transpose();
  s.H.topRows(r) = scale * root.asDiagonal() * f.U.transpose();
  return s;
}

MarginReport margins(const UfmState& s, const LabeledDataset& ds) {
  check_dims(s, ds);
  const MatrixXd Z = s.logits();
  const int k = ds.k();
  MarginReport r;
  r.average = MatrixXd::Zero(k, k);
  for (int i = 0; i < ds.n(); ++i) {
    const int y = ds.labels[i];
    for (int c = 0; c < k; ++c) {
      if (c != y) r.average(y, c) += (Z(y, i) - Z(c, i)) / ds.counts[y];
    }
  }
  r.min_margin = min_margin(Z, ds);
  return r;
}

}  // namespace seli
