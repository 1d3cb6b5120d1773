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

#include <cmath>
#include <random>

#include "seli/geometry.hpp"
#include "seli/metrics.hpp"
#include "seli/ufm.hpp"

using namespace seli;

namespace {

MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = normal(rng);
  return M;
}

struct Fixture {
  ImbalanceSpec spec;
  LabeledDataset ds;
  SvdFactors f;
  MetricTargets seli;
  MetricTargets etf;
  explicit Fixture(ImbalanceSpec s)
      : spec(s),
        ds(build_dataset(s)),
        f(closed_form_svd_scaled(s)),
        seli(representative_targets(seli_gram_targets(f), ds)),
        etf(etf_targets(s.k)) {}
};

}  // namespace

TEST_CASE("class means and centering") {
  const LabeledDataset ds = dataset_from_counts({3, 1, 2});
  MatrixXd H = random_matrix(4, 6, 1);
  const ClassMeans cm = class_means(H, ds);
  CHECK((cm.M.col(0) - H.leftCols(3).rowwise().mean()).norm() < 1e-15);
  CHECK((cm.M.col(1) - H.col(3)).norm() < 1e-15);
  CHECK(cm.centered.rowwise().sum().norm() < 1e-14);
  CHECK_THROWS_AS(class_means(MatrixXd::Zero(4, 5), ds), std::invalid_argument);
}

TEST_CASE("factorized sel state has centered class means") {
  const Fixture fx({4, 10.0, 0.5, 1});
  const UfmState s = factorized_seli_state(fx.f, 5);
  CHECK(class_means(s.H, fx.ds).M.rowwise().sum().norm() < 1e-12);
}

TEST_CASE("gram distance") {
  const MatrixXd A = random_matrix(5, 5, 2);
  const MatrixXd B = random_matrix(5, 5, 3);
  CHECK(gram_distance(3.7 * A, A) < 1e-14);
  CHECK(gram_distance(-A, A) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(gram_distance(2.0 * A, 0.1 * B) - gram_distance(A, B)) < 1e-12);
  CHECK_THROWS_AS(gram_distance(MatrixXd::Zero(5, 5), A), DegenerateInput);
  CHECK_THROWS_AS(gram_distance(A, MatrixXd::Zero(4, 4)), std::invalid_argument);
  const Fixture fx({4, 10.0, 0.5, 1});
  CHECK(gram_distance(etf_reference(4), fx.seli.Gw) > 0.05);
}

TEST_CASE("nc error") {
  const Fixture fx({4, 3.0, 0.5, 1});
  const UfmState s = factorized_seli_state(fx.f, 3);
  CHECK(nc_error(s.H, fx.ds) < 1e-20);
  CHECK(nc_error(random_matrix(3, fx.ds.n(), 4), fx.ds) > 0.1);
  CHECK_THROWS_AS(nc_error(MatrixXd::Ones(3, fx.ds.n()), fx.ds), DegenerateInput);

  // One within-class perturbation of size eps gives an error of order eps^2.
  const VectorXd dir = random_matrix(3, 1, 5).col(0);
  auto err = [&](double eps) {
    MatrixXd H = s.H;
    H.col(0) += eps * dir;
    return nc_error(H, fx.ds);
  };
  CHECK(err(2e-3) / err(1e-3) == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("norm ratio and min margin") {
  const LabeledDataset bal = dataset_from_counts({2, 2, 2});
  CHECK(norm_ratio(random_matrix(3, 3, 6), bal) == 1.0);
  const LabeledDataset ds = dataset_from_counts({4, 4, 1});
  MatrixXd W = MatrixXd::Zero(2, 3);
  W(0, 0) = 3.0;
  W(1, 1) = 1.0;
  W(0, 2) = 0.5;
  CHECK(norm_ratio(W, ds) == doctest::Approx(4.0));
  MatrixXd Z = MatrixXd::Zero(3, 9);
  Z(0, 0) = 2.0;
  Z(1, 0) = 1.5;
  CHECK(min_margin(Z, ds) == doctest::Approx(0.0));
  Z(2, 8) = 0.25;
  Z(0, 8) = 0.5;
  CHECK(min_margin(Z, ds) == doctest::Approx(-0.25));
}

TEST_CASE("snapshot of the factorized sel state") {
  for (int k : {2, 4, 10}) {
    for (double R : {1.0, 3.0, 10.0}) {
      const Fixture fx({k, R, 0.5, 1});
      const UfmState s = factorized_seli_state(fx.f, k + 2, 1.7);
      const MetricSnapshot m = snapshot(s, fx.ds, fx.seli, fx.etf);
      CHECK(m.dist_seli_w <= 1e-9);
      CHECK(m.dist_seli_h <= 1e-9);
      CHECK(m.dist_seli_z <= 1e-9);
      CHECK(m.nc_error <= 1e-12);
      CHECK(m.min_margin == doctest::Approx(1.7 * 1.7).epsilon(1e-12));
      if (R == 1.0) {
        CHECK(m.dist_etf_w <= 1e-9);
        CHECK(m.dist_etf_h <= 1e-9);
        CHECK(m.dist_etf_z <= 1e-9);
      }
    }
  }
}

TEST_CASE("norm ratio at the factorized sel state") {
  const Fixture fx({4, 10.0, 0.5, 1});
  const MetricSnapshot m =
      snapshot(factorized_seli_state(fx.f, 3), fx.ds, fx.seli, fx.etf);
  CHECK(m.norm_ratio_w == doctest::Approx(std::sqrt(1.995247049129585)).epsilon(1e-12));
  const GeometryReport g = seli_closed_form(4, 10.0);
  CHECK(m.norm_ratio_h == doctest::Approx(std::sqrt(g.norm_h_maj2 / g.norm_h_min2)).epsilon(1e-12));
}

TEST_CASE("representative gram equals the mean gram under exact collapse") {
  const Fixture fx({6, 5.0, 0.5, 2});
  const UfmState s = factorized_seli_state(fx.f, 5);
  const ClassMeans cm = class_means(s.H, fx.ds);
  CHECK((cm.centered.transpose() * cm.centered - fx.seli.Gm).norm() < 1e-12);
  CHECK((s.W.transpose() * cm.M - fx.seli.Z).norm() < 1e-12);
}

TEST_CASE("logit targets restricted to representatives coincide with the etf gram") {
  // Z restricted to one example per class is I - 11^T/k for every STEP
  // dataset, so logit distances to SELI and ETF always agree.
  for (double R : {1.0, 10.0, 100.0}) {
    const Fixture fx({4, R, 0.5, 1});
    CHECK((fx.seli.Z - etf_reference(4)).norm() < 1e-12);
  }
}
