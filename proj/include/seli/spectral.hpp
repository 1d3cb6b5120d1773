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

#include "seli/sel.hpp"

namespace seli {

/// Compact SVD  Z = V * diag(lambda) * U^T  with V: k x (k-1), U: n x (k-1).
struct SvdFactors {
  MatrixXd V;
  VectorXd lambda;
  MatrixXd U;

  MatrixXd reconstruct() const { return V * lambda.asDiagonal() * U.transpose(); }
};

/// Thrown when a certificate entry fails the strict sign agreement with the
/// SEL matrix. Carries the offending entry.
class CertificateError : public std::runtime_error {
 public:
  CertificateError(int example, int cls, double value);
  int example;
  int cls;
  double value;  // B[example, cls] * Z[cls, example]
};

/// B = U V^T (n x k).
struct DualCertificate {
  MatrixXd B;
};

/// Residuals of the four certificate conditions; `min_sign_product` must be
/// strictly positive.
struct CertificateReport {
  double spectral_norm = 0.0;
  double row_sum_residual = 0.0;  // max |B 1_k|
  double min_sign_product = 0.0;  // min over entries of B .* Z^T
  int worst_example = -1;
  int worst_class = -1;
  double trace_gap = 0.0;  // |tr(Z B) - ||Z||_*|
};

/// m x (m-1) orthonormal basis of the complement of 1_m, taken from the
/// Householder reflection sending 1_m/sqrt(m) to e_1. Throws for m < 2.
MatrixXd orthonormal_complement_basis(int m);

/// Closed-form SVD under STEP imbalance. Requires n_min == 1; see
/// closed_form_svd_scaled for the general case. Singular values follow the
/// block order [sqrt(R) x ((1-rho)k - 1), sqrt(1-rho + R rho), 1 x (rho k - 1)].
SvdFactors closed_form_svd(const ImbalanceSpec& spec);

/// Closed-form SVD for any n_min: singular values scale by sqrt(n_min) and
/// the per-class blocks of U by 1/sqrt(n_min).
SvdFactors closed_form_svd_scaled(const ImbalanceSpec& spec);

/// Rank-(k-1) SVD from a general-purpose dense routine (cross-check only).
SvdFactors numerical_svd(const SelMatrix& Z);

/// Nuclear norm from a general-purpose SVD.
double nuclear_norm(const MatrixXd& M);
double spectral_norm(const MatrixXd& M);

CertificateReport inspect_certificate(const MatrixXd& B, const MatrixXd& Z);

/// Builds B = U V^T and verifies it against `Z`. Throws CertificateError if
/// any entry of B .* Z^T is not strictly positive, std::runtime_error if the
/// norm, row-sum or trace conditions fail.
DualCertificate dual_certificate(const SvdFactors& f, const SelMatrix& Z);

struct GramTargets {
  MatrixXd Gw;  // V Lambda V^T  (k x k)
  MatrixXd Gh;  // U Lambda U^T  (n x n)
  MatrixXd Z;   // V Lambda U^T  (k x n)
};

GramTargets seli_gram_targets(const SvdFactors& f);

}  // namespace seli
