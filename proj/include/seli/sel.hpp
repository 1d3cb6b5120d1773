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
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace seli {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised for imbalance parameters whose class or sample counts are not
/// positive integers.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// (R, rho)-STEP imbalance: (1-rho)k majority classes with R*n_min examples
/// each, followed by rho*k minority classes with n_min examples each.
struct ImbalanceSpec {
  int k = 2;
  double R = 1.0;
  double rho = 0.5;
  int n_min = 1;

  /// Throws InvalidSpec unless every derived count is a positive integer.
  void validate() const;

  int majority_classes() const;  // (1-rho)k
  int minority_classes() const;  // rho*k
  int majority_count() const;    // R*n_min
  int n() const;
  bool balanced() const { return R == 1.0; }
};

/// Class labels are 0-based and sorted: all examples of class 0 first, then
/// class 1, and so on.
struct LabeledDataset {
  std::vector<int> labels;
  std::vector<int> counts;

  int k() const { return static_cast<int>(counts.size()); }
  int n() const { return static_cast<int>(labels.size()); }
  /// Index of the first example of class c.
  int first_of(int c) const;
  /// One-hot k x n label matrix Y.
  MatrixXd one_hot() const;
};

struct SelMatrix {
  MatrixXd entries;  // k x n
  LabeledDataset dataset;
};

LabeledDataset build_dataset(const ImbalanceSpec& spec);

/// Builds a dataset from arbitrary per-class counts (all >= 1).
LabeledDataset dataset_from_counts(std::vector<int> counts);

/// Z[c,i] = 1 - 1/k if c == y_i, else -1/k.
SelMatrix build_sel_matrix(const LabeledDataset& ds);

/// sum_i log(1 + sum_{c != y_i} exp(Z[c,i] - Z[y_i,i])), log-sum-exp stabilized.
double ce_loss(const MatrixXd& Z, const LabeledDataset& ds);

/// Gradient of ce_loss with respect to Z: softmax(Z) - Y, columnwise.
MatrixXd ce_gradient(const MatrixXd& Z, const LabeledDataset& ds);

/// Loss and gradient in one pass.
double ce_loss_and_gradient(const MatrixXd& Z, const LabeledDataset& ds,
                            MatrixXd& grad);

}  // namespace seli
