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

#include "seli/metrics.hpp"

#include <algorithm>
#include <limits>

#include "seli/geometry.hpp"

namespace seli {

ClassMeans class_means(const MatrixXd& H, const LabeledDataset& ds) {
  if (H.cols() != ds.n()) {
    throw std::invalid_argument("H must have one column per example");
  }
  const int k = ds.k();
  ClassMeans out;
  out.M = MatrixXd::Zero(H.rows(), k);
  for (int i = 0; i < ds.n(); ++i) out.M.col(ds.labels[i]) += H.col(i);
  for (int c = 0; c < k; ++c) out.M.col(c) /= ds.counts[c];
  const VectorXd mu_g = out.M.rowwise().mean();
  out.centered = out.M.colwise() - mu_g;
  return out;
}

double gram_distance(const MatrixXd& A, const MatrixXd& target) {
  if (A.rows() != target.rows() || A.cols() != target.cols()) {
    throw std::invalid_argument("gram_distance: shape mismatch");
  }
  const double na = A.norm(), nt = target.norm();
  if (na == 0.0 || nt == 0.0) {
    throw DegenerateInput("gram_distance: zero matrix has no direction");
  }
  return (A / na - target / nt).norm();
}

double nc_error(const MatrixXd& H, const LabeledDataset& ds) {
  const ClassMeans cm = class_means(H, ds);
  const VectorXd mu_bar = cm.M.rowwise().mean();
  double within = 0.0, total = 0.0;
  for (int i = 0; i < ds.n(); ++i) {
    within += (H.col(i) - cm.M.col(ds.labels[i])).squaredNorm();
    total += (H.col(i) - mu_bar).squaredNorm();
  }
  if (total == 0.0) throw DegenerateInput("nc_error: all embeddings identical");
  return within / total;
}

MetricTargets representative_targets(const GramTargets& t, const LabeledDataset& ds) {
  const int k = ds.k();
  MetricTargets out{t.Gw, MatrixXd(k, k), MatrixXd(k, k)};
  for (int a = 0; a < k; ++a) {
    const int i = ds.first_of(a);
    out.Z.col(a) = t.Z.col(i);
    for (int b = 0; b < k; ++b) out.Gm(a, b) = t.Gh(i, ds.first_of(b));
  }
  return out;
}

MetricTargets etf_targets(int k) {
  const MatrixXd G = etf_reference(k);
  return {G, G, G};
}

double norm_ratio(const MatrixXd& columns, const LabeledDataset& ds) {
  int cmax = 0;
  for (int c = 1; c < ds.k(); ++c) {
    if (ds.counts[c] > ds.counts[cmax]) cmax = c;
  }
  double maj = 0.0, min = 0.0;
  int nmaj = 0, nmin = 0;
  for (int c = 0; c < ds.k(); ++c) {
    const double v = columns.col(c).norm();
    if (ds.counts[c] == ds.counts[cmax]) {
      maj += v;
      ++nmaj;
    } else {
      min += v;
      ++nmin;
    }
  }
  if (nmin == 0) return 1.0;
  return (maj / nmaj) / (min / nmin);
}

double min_margin(const MatrixXd& Z, const LabeledDataset& ds) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ds.n(); ++i) {
    const int y = ds.labels[i];
    for (int c = 0; c < ds.k(); ++c) {
      if (c != y) best = std::min(best, Z(y, i) - Z(c, i));
    }
  }
  return best;
}

MetricSnapshot snapshot(const UfmState& state, const LabeledDataset& ds,
                        const MetricTargets& seli, const MetricTargets& etf) {
  const ClassMeans cm = class_means(state.H, ds);
  const MatrixXd Gw = state.W.transpose() * state.W;
  const MatrixXd Gm = cm.centered.transpose() * cm.centered;
  const MatrixXd Zm = state.W.transpose() * cm.M;

  MetricSnapshot s;
  s.dist_seli_w = gram_distance(Gw, seli.Gw);
  s.dist_seli_h = gram_distance(Gm, seli.Gm);
  s.dist_seli_z = gram_distance(Zm, seli.Z);
  s.dist_etf_w = gram_distance(Gw, etf.Gw);
  s.dist_etf_h = gram_distance(Gm, etf.Gm);
  s.dist_etf_z = gram_distance(Zm, etf.Z);
  s.nc_error = nc_error(state.H, ds);
  s.norm_ratio_w = norm_ratio(state.W, ds);
  s.norm_ratio_h = norm_ratio(cm.centered, ds);
  s.min_margin = min_margin(state.logits(), ds);
  return s;
}

}  // namespace seli
