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

#include "seli/sel.hpp"

#include <cmath>
#include <span>

#include "seli/kernels.hpp"

namespace seli {
namespace {

// Counts in this module come from ratios of small integers; anything further
// than this from an integer is a parameter error, not roundoff.
constexpr double kIntegralTol = 1e-9;

int as_positive_int(double x, const char* what) {
  const double r = std::round(x);
  if (!std::isfinite(x) || std::abs(x - r) > kIntegralTol || r < 1) {
    throw InvalidSpec(std::string(what) + " must be a positive integer, got " +
                      std::to_string(x));
  }
  return static_cast<int>(r);
}

void check_shape(const MatrixXd& Z, const LabeledDataset& ds) {
  if (Z.rows() != ds.k() || Z.cols() != ds.n()) {
    throw std::invalid_argument("logit matrix is " + std::to_string(Z.rows()) +
                                "x" + std::to_string(Z.cols()) +
                                ", dataset expects " + std::to_string(ds.k()) +
                                "x" + std::to_string(ds.n()));
  }
}

}  // namespace

void ImbalanceSpec::validate() const {
  if (k < 2) throw InvalidSpec("k must be at least 2");
  if (!(R >= 1.0) || !std::isfinite(R)) throw InvalidSpec("R must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidSpec("rho must lie in (0,1)");
  if (n_min < 1) throw InvalidSpec("n_min must be >= 1");
  as_positive_int(rho * k, "rho*k");
  as_positive_int((1.0 - rho) * k, "(1-rho)*k");
  as_positive_int(R * n_min, "R*n_min");
}

int ImbalanceSpec::majority_classes() const {
  return as_positive_int((1.0 - rho) * k, "(1-rho)*k");
}
int ImbalanceSpec::minority_classes() const {
  return as_positive_int(rho * k, "rho*k");
}
int ImbalanceSpec::majority_count() const {
  return as_positive_int(R * n_min, "R*n_min");
}
int ImbalanceSpec::n() const {
  return majority_classes() * majority_count() + minority_classes() * n_min;
}

int LabeledDataset::first_of(int c) const {
  int offset = 0;
  for (int j = 0; j < c; ++j) offset += counts[j];
  return offset;
}

MatrixXd LabeledDataset::one_hot() const {
  MatrixXd Y = MatrixXd::Zero(k(), n());
  for (int i = 0; i < n(); ++i) Y(labels[i], i) = 1.0;
  return Y;
}

LabeledDataset dataset_from_counts(std::vector<int> counts) {
  if (counts.size() < 2) throw InvalidSpec("need at least two classes");
  LabeledDataset ds;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 1) throw InvalidSpec("every class needs an example");
    ds.labels.insert(ds.labels.end(), counts[c], static_cast<int>(c));
  }
  ds.counts = std::move(counts);
  return ds;
}

LabeledDataset build_dataset(const ImbalanceSpec& spec) {
  spec.validate();
  std::vector<int> counts;
  counts.reserve(spec.k);
  counts.insert(counts.end(), spec.majority_classes(), spec.majority_count());
  counts.insert(counts.end(), spec.minority_classes(), spec.n_min);
  return dataset_from_counts(std::move(counts));
}

SelMatrix build_sel_matrix(const LabeledDataset& ds) {
  const double inv_k = 1.0 / ds.k();
  MatrixXd Z = MatrixXd::Constant(ds.k(), ds.n(), -inv_k);
  for (int i = 0; i < ds.n(); ++i) Z(ds.labels[i], i) = 1.0 - inv_k;
  return {std::move(Z), ds};
}

double ce_loss(const MatrixXd& Z, const LabeledDataset& ds) {
  check_shape(Z, ds);
  return kernels::ce_loss({Z.data(), static_cast<std::size_t>(Z.size())},
                          ds.labels, ds.k());
}

double ce_loss_and_gradient(const MatrixXd& Z, const LabeledDataset& ds,
                            MatrixXd& grad) {
  check_shape(Z, ds);
  grad.resize(Z.rows(), Z.cols());
  return kernels::ce_loss_grad(
      {Z.data(), static_cast<std::size_t>(Z.size())}, ds.labels, ds.k(),
      {grad.data(), static_cast<std::size_t>(grad.size())});
}

MatrixXd ce_gradient(const MatrixXd& Z, const LabeledDataset& ds) {
  MatrixXd grad;
  ce_loss_and_gradient(Z, ds, grad);
  return grad;
}

}  // namespace seli
