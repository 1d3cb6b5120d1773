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

#include <stdexcept>

#include "seli/spectral.hpp"
#include "seli/ufm_state.hpp"

namespace seli {

/// Thrown for zero-norm inputs where a normalized comparison is undefined.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reference geometry restricted to one representative (the first example)
/// per class. All three are k x k.
struct MetricTargets {
  MatrixXd Gw;
  MatrixXd Gm;
  MatrixXd Z;
};

struct MetricSnapshot {
  double dist_seli_w = 0.0;
  double dist_seli_h = 0.0;
  double dist_seli_z = 0.0;
  double dist_etf_w = 0.0;
  double dist_etf_h = 0.0;
  double dist_etf_z = 0.0;
  double nc_error = 0.0;
  double norm_ratio_w = 1.0;
  double norm_ratio_h = 1.0;
  double min_margin = 0.0;
};

struct ClassMeans {
  MatrixXd M;         // d x k, column c is the mean of class c
  MatrixXd centered;  // M minus the balanced global mean (1/k) sum_c mu_c
};

ClassMeans class_means(const MatrixXd& H, const LabeledDataset& ds);

/// || A/||A||_F - T/||T||_F ||_F. Throws DegenerateInput if either is zero.
double gram_distance(const MatrixXd& A, const MatrixXd& target);

/// sum_i ||h_i - mu_{y_i}||^2 / sum_i ||h_i - mu_bar||^2 with mu_bar the
/// balanced global mean. Throws DegenerateInput if the denominator is zero.
double nc_error(const MatrixXd& H, const LabeledDataset& ds);

/// SELI targets (V Lambda V^T, U Lambda U^T, V Lambda U^T) restricted to
/// class representatives.
MetricTargets representative_targets(const GramTargets& t, const LabeledDataset& ds);

/// ETF targets: I - (1/k) 1 1^T for all three.
MetricTargets etf_targets(int k);

/// Mean norm over the majority classes (largest count) divided by the mean
/// norm over the rest; 1 when all counts are equal.
double norm_ratio(const MatrixXd& columns, const LabeledDataset& ds);

/// Smallest Z[y_i,i] - Z[c,i] over all i and c != y_i.
double min_margin(const MatrixXd& Z, const LabeledDataset& ds);

/// Classifier metric on W^T W, embedding metric on centered class means,
/// logit metric on the uncentered W^T M.
MetricSnapshot snapshot(const UfmState& state, const LabeledDataset& ds,
                        const MetricTargets& seli, const MetricTargets& etf);

}  // namespace seli
