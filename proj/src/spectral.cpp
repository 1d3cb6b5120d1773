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

#include "seli/spectral.hpp"

#include <cmath>
#include <limits>

namespace seli {
namespace {

// P_m, with P_1 the empty m x 0 block used by degenerate STEP layouts.
MatrixXd complement_or_empty(int m) {
  if (m == 1) return MatrixXd(1, 0);
  return orthonormal_complement_basis(m);
}

}  // namespace

CertificateError::CertificateError(int example, int cls, double value)
    : std::runtime_error("dual certificate sign mismatch at example " +
                         std::to_string(example) + ", class " +
                         std::to_string(cls) + ": B.*Z^T = " +
                         std::to_string(value)),
      example(example),
      cls(cls),
      value(value) {}

MatrixXd orthonormal_complement_basis(int m) {
  if (m < 2) {
    throw std::invalid_argument("orthonormal_complement_basis needs m >= 2");
  }
  // H = I - 2 v v^T / (v^T v) with v = 1/sqrt(m) - e_1 swaps 1/sqrt(m) and e_1.
  VectorXd v = VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  v(0) -= 1.0;
  const double vv = v.squaredNorm();
  MatrixXd H = MatrixXd::Identity(m, m) - (2.0 / vv) * v * v.transpose();
  return H.rightCols(m - 1);
}

SvdFactors closed_form_svd(const ImbalanceSpec& spec) {
  spec.validate();
  if (spec.n_min != 1) {
    throw InvalidSpec(
        "closed_form_svd assumes n_min == 1; use closed_form_svd_scaled");
  }
  return closed_form_svd_scaled(spec);
}

SvdFactors closed_form_svd_scaled(const ImbalanceSpec& spec) {
  spec.validate();
  const int k = spec.k;
  const int kmaj = spec.majority_classes();
  const int kmin = spec.minority_classes();
  const int a = spec.majority_count();  // examples per majority class
  const int b = spec.n_min;             // examples per minority class
  const int n = spec.n();
  const double rho = static_cast<double>(kmin) / k;
  const double rho_bar = static_cast<double>(kmaj) / k;
  const double ratio = static_cast<double>(a) / b;  // R
  const double mid = rho_bar + ratio * rho;

  const MatrixXd Pmaj = complement_or_empty(kmaj);
  const MatrixXd Pmin = complement_or_empty(kmin);
  const int jmid = kmaj - 1;

  SvdFactors f;
  f.V = MatrixXd::Zero(k, k - 1);
  f.U = MatrixXd::Zero(n, k - 1);
  f.lambda.resize(k - 1);

  f.lambda.head(kmaj - 1).setConstant(std::sqrt(static_cast<double>(a)));
  f.lambda(jmid) = std::sqrt(b * mid);
  f.lambda.tail(kmin - 1).setConstant(std::sqrt(static_cast<double>(b)));

  const double v_maj = -std::sqrt(rho / rho_bar / k);
  const double v_min = std::sqrt(rho_bar / rho / k);
  f.V.block(0, 0, kmaj, kmaj - 1) = Pmaj;
  f.V.block(0, jmid, kmaj, 1).setConstant(v_maj);
  f.V.block(kmaj, jmid, kmin, 1).setConstant(v_min);
  f.V.block(kmaj, jmid + 1, kmin, kmin - 1) = Pmin;

  const double u_scale = 1.0 / std::sqrt(mid * k * b);
  const double u_maj = -std::sqrt(rho / rho_bar) * u_scale;
  const double u_min = std::sqrt(rho_bar / rho) * u_scale;
  int row = 0;
  for (int c = 0; c < kmaj; ++c) {
    for (int r = 0; r < a; ++r, ++row) {
      f.U.block(row, 0, 1, kmaj - 1) = Pmaj.row(c) / std::sqrt(static_cast<double>(a));
      f.U(row, jmid) = u_maj;
    }
  }
  for (int c = 0; c < kmin; ++c) {
    for (int r = 0; r < b; ++r, ++row) {
      f.U(row, jmid) = u_min;
      f.U.block(row, jmid + 1, 1, kmin - 1) = Pmin.row(c) / std::sqrt(static_cast<double>(b));
    }
  }
  return f;
}

SvdFactors numerical_svd(const SelMatrix& Z) {
  const int k = static_cast<int>(Z.entries.rows());
  Eigen::JacobiSVD<MatrixXd> svd(Z.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f;
  f.V = svd.matrixU().leftCols(k - 1);
  f.lambda = svd.singularValues().head(k - 1);
  f.U = svd.matrixV().leftCols(k - 1);
  return f;
}

double nuclear_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(M).singularValues().sum();
}

double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(M).singularValues()(0);
}

CertificateReport inspect_certificate(const MatrixXd& B, const MatrixXd& Z) {
  if (B.rows() != Z.cols() || B.cols() != Z.rows()) {
    throw std::invalid_argument("certificate must be n x k for a k x n SEL matrix");
  }
  CertificateReport r;
  r.spectral_norm = spectral_norm(B);
  r.row_sum_residual = B.rowwise().sum().cwiseAbs().maxCoeff();
  r.min_sign_product = std::numeric_limits<double>::infinity();
  for (int i = 0; i < B.rows(); ++i) {
    for (int c = 0; c < B.cols(); ++c) {
      const double p = B(i, c) * Z(c, i);
      if (p < r.min_sign_product) {
        r.min_sign_product = p;
        r.worst_example = i;
        r.worst_class = c;
      }
    }
  }
  r.trace_gap = std::abs((Z * B).trace() - nuclear_norm(Z));
  return r;
}

DualCertificate dual_certificate(const SvdFactors& f, const SelMatrix& Z) {
  DualCertificate cert{f.U * f.V.transpose()};
  const CertificateReport r = inspect_certificate(cert.B, Z.entries);
  if (!(r.min_sign_product > 0.0)) {
    throw CertificateError(r.worst_example, r.worst_class, r.min_sign_product);
  }
  if (r.spectral_norm > 1.0 + 1e-10) {
    throw std::runtime_error("dual certificate has spectral norm " +
                             std::to_string(r.spectral_norm));
  }
  if (r.row_sum_residual > 1e-12) {
    throw std::runtime_error("dual certificate rows do not sum to zero");
  }
  if (r.trace_gap > 1e-8) {
    throw std::runtime_error("tr(Z B) differs from the nuclear norm of Z");
  }
  return cert;
}

GramTargets seli_gram_targets(const SvdFactors& f) {
  const auto L = f.lambda.asDiagonal();
  return {f.V * L * f.V.transpose(), f.U * L * f.U.transpose(),
          f.V * L * f.U.transpose()};
}

}  // namespace seli
