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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "seli/spectral.hpp"
#include "seli/verify.hpp"

using namespace seli;

TEST_CASE("orthonormal complement basis") {
  for (int m : {2, 3, 5, 16}) {
    const MatrixXd P = orthonormal_complement_basis(m);
    CHECK(P.rows() == m);
    CHECK(P.cols() == m - 1);
    CHECK((P.transpose() * P - MatrixXd::Identity(m - 1, m - 1)).norm() < 1e-14);
    CHECK((P.transpose() * VectorXd::Ones(m)).norm() < 1e-14);
  }
  CHECK_THROWS_AS(orthonormal_complement_basis(1), std::invalid_argument);
}

TEST_CASE("closed-form svd reproduces the sel matrix on the grid") {
  for (const GridPoint& g : svd_grid()) {
    const ImbalanceSpec spec{g.k, g.R, g.rho, 1};
    const SelMatrix Z = build_sel_matrix(build_dataset(spec));
    const SvdFactors f = closed_form_svd(spec);
    const int r = g.k - 1;
    CAPTURE(g.k);
    CAPTURE(g.R);
    CAPTURE(g.rho);
    CHECK((f.reconstruct() - Z.entries).norm() < 1e-12);
    CHECK((f.V.transpose() * f.V - MatrixXd::Identity(r, r)).norm() < 1e-13);
    CHECK((f.U.transpose() * f.U - MatrixXd::Identity(r, r)).norm() < 1e-13);
    CHECK((f.V.transpose() * VectorXd::Ones(g.k)).norm() < 1e-13);
  }
}

TEST_CASE("singular values match the independent svd oracle") {
  // Frozen from numpy.linalg.svd of the (k=4, R=10, rho=1/2) SEL matrix.
  const SvdFactors f = closed_form_svd({4, 10.0, 0.5, 1});
  VectorXd s = f.lambda;
  std::sort(s.data(), s.data() + 3, std::greater<>());
  CHECK(s(0) == doctest::Approx(3.1622776601683795).epsilon(1e-14));
  CHECK(s(1) == doctest::Approx(2.345207879911715).epsilon(1e-14));
  CHECK(s(2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.sum() == doctest::Approx(6.507485540080094).epsilon(1e-14));
}

TEST_CASE("scaled variant covers n_min > 1 and fractional R") {
  CHECK_THROWS_AS(closed_form_svd({4, 2.0, 0.5, 2}), InvalidSpec);
  for (const ImbalanceSpec spec :
       {ImbalanceSpec{4, 2.0, 0.5, 3}, ImbalanceSpec{4, 1.5, 0.25, 2}, ImbalanceSpec{6, 5.0, 0.5, 2}}) {
    const SelMatrix Z = build_sel_matrix(build_dataset(spec));
    const SvdFactors f = closed_form_svd_scaled(spec);
    CHECK((f.reconstruct() - Z.entries).norm() < 1e-12);
    VectorXd a = f.lambda, b = numerical_svd(Z).lambda;
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    const int r = spec.k - 1;
    CHECK((f.U.transpose() * f.U - MatrixXd::Identity(r, r)).norm() < 1e-13);
  }
}

TEST_CASE("numerical svd and norms") {
  const SelMatrix Z = build_sel_matrix(build_dataset({6, 3.0, 0.5, 1}));
  const SvdFactors f = numerical_svd(Z);
  CHECK((f.reconstruct() - Z.entries).norm() < 1e-12);
  CHECK(nuclear_norm(Z.entries) == doctest::Approx(f.lambda.sum()).epsilon(1e-14));
  CHECK(spectral_norm(Z.entries) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(nuclear_norm(MatrixXd(0, 0)) == 0.0);
}

TEST_CASE("dual certificate conditions") {
  for (const GridPoint& g : svd_grid()) {
    const ImbalanceSpec spec{g.k, g.R, g.rho, 1};
    const SelMatrix Z = build_sel_matrix(build_dataset(spec));
    const DualCertificate cert = dual_certificate(closed_form_svd(spec), Z);
    const CertificateReport r = inspect_certificate(cert.B, Z.entries);
    CHECK(r.spectral_norm <= 1.0 + 1e-10);
    CHECK(r.row_sum_residual <= 1e-12);
    CHECK(r.min_sign_product > 0.0);
    CHECK(r.trace_gap <= 1e-8);
  }
}

TEST_CASE("a flipped entry breaks the certificate at that entry") {
  const ImbalanceSpec spec{4, 10.0, 0.5, 1};
  SelMatrix Z = build_sel_matrix(build_dataset(spec));
  Z.entries(2, 7) = -Z.entries(2, 7);
  try {
    dual_certificate(closed_form_svd(spec), Z);
    FAIL("expected CertificateError");
  } catch (const CertificateError& e) {
    CHECK(e.example == 7);
    CHECK(e.cls == 2);
    CHECK(e.value < 0.0);
  }
  CHECK_THROWS_AS(inspect_certificate(MatrixXd::Zero(3, 3), Z.entries), std::invalid_argument);
}

TEST_CASE("gram targets") {
  const ImbalanceSpec spec{4, 10.0, 0.5, 1};
  const SelMatrix Z = build_sel_matrix(build_dataset(spec));
  const GramTargets t = seli_gram_targets(closed_form_svd(spec));
  CHECK((t.Z - Z.entries).norm() < 1e-12);
  CHECK(t.Gw.trace() == doctest::Approx(6.507485540080094).epsilon(1e-13));
  CHECK(t.Gh.trace() == doctest::Approx(6.507485540080094).epsilon(1e-13));
  // Classifier centering: 1^T Gw 1 = 0.
  CHECK(std::abs(VectorXd::Ones(4).dot(t.Gw * VectorXd::Ones(4))) < 1e-12);
  // Weighted embedding centering: Z w = 0 with w_i = 1/n_{y_i}.
  const LabeledDataset ds = build_dataset(spec);
  VectorXd w(ds.n());
  for (int i = 0; i < ds.n(); ++i) w(i) = 1.0 / ds.counts[ds.labels[i]];
  CHECK((Z.entries * w).norm() < 1e-12);
  // Diagonal oracle values (numpy).
  CHECK(t.Gw(0, 0) == doctest::Approx(2.167440800062118).epsilon(1e-13));
  CHECK(t.Gw(3, 3) == doctest::Approx(1.086301969977929).epsilon(1e-13));
}
