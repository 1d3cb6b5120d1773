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
#include <limits>

#include "seli/ufm.hpp"

using namespace seli;

namespace {

double fd_check(const UfmState& s, const LabeledDataset& ds, const TrainConfig& cfg) {
  const UfmGradients g = gradients(s, ds, cfg);
  const double h = 1e-6;
  double num = 0.0, den = 0.0;
  auto probe = [&](MatrixXd UfmState::*field, const MatrixXd& analytic) {
    for (Eigen::Index i = 0; i < (s.*field).size(); ++i) {
      UfmState p = s, m = s;
      (p.*field).data()[i] += h;
      (m.*field).data()[i] -= h;
      const double fd = (objective(p, ds, cfg) - objective(m, ds, cfg)) / (2 * h);
      num += std::pow(fd - analytic.data()[i], 2);
      den += std::pow(analytic.data()[i], 2);
    }
  };
  probe(&UfmState::W, g.dW);
  probe(&UfmState::H, g.dH);
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("init is deterministic and scaled") {
  const ImbalanceSpec spec{4, 2.0, 0.5, 1};
  const UfmState a = init_ufm(spec, 5, 11, 0.1);
  const UfmState b = init_ufm(spec, 5, 11, 0.1);
  const UfmState c = init_ufm(spec, 5, 12, 0.1);
  CHECK(a.W == b.W);
  CHECK(a.H == b.H);
  CHECK(a.W != c.W);
  const UfmState z = init_ufm(spec, 5, 11, 0.0);
  CHECK(z.W.norm() == 0.0);
  CHECK(z.H.norm() == 0.0);
  CHECK(a.H.cols() == 6);
  CHECK_THROWS_AS(init_ufm(spec, 2, 0, 0.1), InvalidSpec);
}

TEST_CASE("objective special values") {
  const LabeledDataset ds = build_dataset({4, 10.0, 0.5, 1});
  const UfmState zero = init_ufm(ds, 6, 0, 0.0);
  TrainConfig cfg;
  CHECK(objective(zero, ds, cfg) == doctest::Approx(22 * std::log(4.0)));
  cfg.ridge_lambda = 3.0;
  CHECK(objective(zero, ds, cfg) == doctest::Approx(22 * std::log(4.0)));
  cfg.ridge_lambda = 0.0;
  const UfmState sel = factorized_seli_state(closed_form_svd(ImbalanceSpec{4, 10.0, 0.5, 1}), 6);
  CHECK(objective(sel, ds, cfg) == doctest::Approx(22 * std::log1p(3 * std::exp(-1.0))).epsilon(1e-13));
  cfg.objective_scale = 1.0 / 22;
  CHECK(objective(sel, ds, cfg) == doctest::Approx(std::log1p(3 * std::exp(-1.0))).epsilon(1e-13));
}

TEST_CASE("gradients match finite differences") {
  const LabeledDataset ds = dataset_from_counts({3, 2, 1});
  const UfmState s = init_ufm(ds, 4, 3, 0.7);
  TrainConfig cfg;
  CHECK(fd_check(s, ds, cfg) <= 1e-6);
  cfg.ridge_lambda = 0.3;
  CHECK(fd_check(s, ds, cfg) <= 1e-6);
  cfg.ridge_lambda = 0.0;
  cfg.logit_lambda = 0.2;
  CHECK(fd_check(s, ds, cfg) <= 1e-6);
  cfg.ridge_lambda = 0.1;
  cfg.objective_scale = 0.25;
  CHECK(fd_check(s, ds, cfg) <= 1e-6);
}

TEST_CASE("gradient special cases") {
  const LabeledDataset ds = build_dataset({4, 3.0, 0.5, 1});
  UfmState s = init_ufm(ds, 5, 9, 1.0);
  s.H.setZero();
  TrainConfig cfg;
  CHECK(gradients(s, ds, cfg).dW.norm() == 0.0);

  // The CE gradient at the factorized SELI state is -c Zhat.
  const SvdFactors f = closed_form_svd(ImbalanceSpec{4, 3.0, 0.5, 1});
  const UfmState sel = factorized_seli_state(f, 5);
  const MatrixXd Z = build_sel_matrix(ds).entries;
  const double c = 4.0 / (std::exp(1.0) + 3.0);
  const UfmGradients g = gradients(sel, ds, cfg);
  CHECK((g.dW + c * sel.H * Z.transpose()).norm() < 1e-12);
  CHECK(g.dW.norm() > 0.1);
}

TEST_CASE("factorized sel state") {
  for (const ImbalanceSpec spec : {ImbalanceSpec{4, 10.0, 0.5, 1}, ImbalanceSpec{6, 3.0, 0.5, 1},
                                   ImbalanceSpec{4, 2.0, 0.25, 1}}) {
    const LabeledDataset ds = build_dataset(spec);
    const SvdFactors f = closed_form_svd(spec);
    const UfmState s = factorized_seli_state(f, spec.k + 1);
    const MatrixXd Z = build_sel_matrix(ds).entries;
    CHECK((s.logits() - Z).norm() < 1e-10);
    CHECK(s.W.squaredNorm() == doctest::Approx(f.lambda.sum()).epsilon(1e-12));
    CHECK(s.H.squaredNorm() == doctest::Approx(f.lambda.sum()).epsilon(1e-12));
    const MarginReport m = margins(s, ds);
    CHECK(m.min_margin == doctest::Approx(1.0).epsilon(1e-12));
    for (int y = 0; y < spec.k; ++y)
      for (int c = 0; c < spec.k; ++c)
        CHECK(m.average(y, c) == doctest::Approx(y == c ? 0.0 : 1.0).epsilon(1e-12));
    const UfmState s2 = factorized_seli_state(f, spec.k - 1, 2.0);
    CHECK((s2.logits() - 4.0 * Z).norm() < 1e-10);
  }
  CHECK_THROWS_AS(factorized_seli_state(closed_form_svd({4, 2.0, 0.5, 1}), 2), InvalidSpec);
}

TEST_CASE("zero state has zero margins") {
  const LabeledDataset ds = build_dataset({4, 2.0, 0.5, 1});
  const MarginReport m = margins(init_ufm(ds, 4, 0, 0.0), ds);
  CHECK(m.average.norm() == 0.0);
  CHECK(m.min_margin == 0.0);
}

TEST_CASE("log schedule") {
  const std::vector<int> s = log_schedule(1000);
  CHECK(s.front() == 0);
  CHECK(s[100] == 100);
  CHECK(s.back() == 1000);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
  CHECK(s.size() < 120);
  CHECK(log_schedule(7) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("full-batch gd decreases the objective") {
  const LabeledDataset ds = build_dataset({4, 5.0, 0.5, 1});
  for (double ridge : {0.05, 0.5}) {
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 100;
    cfg.ridge_lambda = ridge;
    cfg.logit_lambda = 0.01;
    const TrainResult r = train(init_ufm(ds, 6, 1, 0.3), ds, cfg);
    CHECK(r.trace.records.size() == 101);
    for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
      CHECK(r.trace.records[i].objective <= r.trace.records[i - 1].objective);
    }
  }
}

TEST_CASE("training is reproducible and sgd runs") {
  const LabeledDataset ds = build_dataset({4, 3.0, 0.5, 2});
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 50;
  cfg.batch_size = 4;
  cfg.seed = 3;
  const TrainResult a = train(init_ufm(ds, 5, 3, 0.1), ds, cfg);
  const TrainResult b = train(init_ufm(ds, 5, 3, 0.1), ds, cfg);
  CHECK(a.state.W == b.state.W);
  CHECK(a.trace.records.back().objective == b.trace.records.back().objective);
  CHECK(a.trace.records.back().objective < a.trace.records.front().objective);
  cfg.seed = 4;
  const TrainResult c = train(init_ufm(ds, 5, 3, 0.1), ds, cfg);
  CHECK(c.state.W != a.state.W);
}

TEST_CASE("ridge decay schedule") {
  const LabeledDataset ds = build_dataset({4, 2.0, 0.5, 1});
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 30;
  cfg.ridge_lambda = 1.0;
  cfg.ridge_decay = RidgeDecay{10.0, 10, 0.005};
  const TrainResult r = train(init_ufm(ds, 4, 0, 0.1), ds, cfg);
  CHECK(r.trace.records[10].lambda == 1.0);
  CHECK(r.trace.records[11].lambda == doctest::Approx(0.1));
  CHECK(r.trace.records[21].lambda == doctest::Approx(0.01));
  cfg.epochs = 40;
  CHECK(train(init_ufm(ds, 4, 0, 0.1), ds, cfg).trace.records.back().lambda == 0.005);
}

TEST_CASE("invalid configs") {
  const LabeledDataset ds = build_dataset({4, 2.0, 0.5, 1});
  const UfmState s = init_ufm(ds, 4, 0, 0.1);
  TrainConfig cfg;
  cfg.batch_size = 100;
  CHECK_THROWS_AS(train(s, ds, cfg), std::invalid_argument);
  cfg = {};
  cfg.ridge_decay = RidgeDecay{0.5, 10, 0.0};
  CHECK_THROWS_AS(train(s, ds, cfg), std::invalid_argument);
  cfg = {};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(s, ds, cfg), std::invalid_argument);
}

TEST_CASE("divergence aborts with the partial trace") {
  const LabeledDataset ds = build_dataset({4, 2.0, 0.5, 1});
  TrainConfig cfg;
  cfg.learning_rate = 1e6;
  cfg.epochs = 1000;
  cfg.logit_lambda = 1.0;
  try {
    train(init_ufm(ds, 4, 0, 1.0), ds, cfg);
    FAIL("expected TrainingAborted");
  } catch (const TrainingAborted& e) {
    CHECK(e.epoch > 0);
    CHECK_FALSE(e.trace.records.empty());
    CHECK(e.trace.records.back().epoch < e.epoch);
    CHECK(std::isfinite(e.trace.records.back().objective));
  }
}

TEST_CASE("classifiers centre at a stationary point") {
  const LabeledDataset ds = build_dataset({4, 3.0, 0.5, 1});
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 20000;
  cfg.ridge_lambda = 0.2;
  const TrainResult r = train(init_ufm(ds, 5, 2, 0.3), ds, cfg);
  REQUIRE(stationarity_residual(r.state, ds, cfg) <= 1e-6);
  CHECK((r.state.W * VectorXd::Ones(4)).norm() / r.state.W.norm() <= 1e-4);
}
