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

#include "seli/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seli/metrics.hpp"
#include "seli/ufm.hpp"

namespace seli {
namespace {

struct Compact {
  MatrixXd V;  // k x r
  VectorXd sigma;
  MatrixXd U;  // n x r
};

Compact compact_svd(const MatrixXd& Z) {
  Eigen::JacobiSVD<MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return {svd.matrixU().leftCols(r), s.head(r), svd.matrixV().leftCols(r)};
}

double composite(const MatrixXd& Z, const LabeledDataset& ds, double lambda) {
  return ce_loss(Z, ds) + lambda * nuclear_norm(Z);
}

}  // namespace

MatrixXd svt(const MatrixXd& M, double tau) {
  if (tau < 0.0) throw std::invalid_argument("svt threshold must be nonnegative");
  if (tau == 0.0 || M.size() == 0) return M;
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd s = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

KktResidual kkt_residual(const MatrixXd& Z, const LabeledDataset& ds, double lambda) {
  const MatrixXd G = ce_gradient(Z, ds);
  const Compact c = compact_svd(Z);
  KktResidual r;
  r.rank = static_cast<int>(c.sigma.size());
  r.grad_spectral_norm = spectral_norm(G);
  if (r.rank > 0) {
    r.factor_residuals = std::max((G * c.U + lambda * c.V).norm(),
                                  (G.transpose() * c.V + lambda * c.U).norm());
  }
  r.value = std::max(r.factor_residuals, std::max(0.0, r.grad_spectral_norm - lambda));
  return r;
}

SolverResult solve_nuc_reg(const LabeledDataset& ds, double lambda, const SolverOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const int k = ds.k(), n = ds.n();
  MatrixXd X = opts.warm_start ? *opts.warm_start : MatrixXd::Zero(k, n);
  if (X.rows() != k || X.cols() != n) {
    throw std::invalid_argument("warm start has the wrong shape");
  }
  double fx = composite(X, ds, lambda);
  MatrixXd Y = X;
  double t = 1.0;
  double step = opts.initial_step;

  SolverResult res;
  res.kkt = kkt_residual(X, ds, lambda);
  if (res.kkt.value <= opts.tol) {
    res.Z = X;
    res.objective = fx;
    res.converged = true;
    return res;
  }

  MatrixXd G(k, n), Xn;
  bool restarted = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double fy = ce_loss_and_gradient(Y, ds, G);
    while (true) {
      Xn = svt(Y - step * G, lambda * step);
      const MatrixXd D = Xn - Y;
      const double bound = fy + (G.array() * D.array()).sum() + D.squaredNorm() / (2.0 * step);
      if (ce_loss(Xn, ds) <= bound + 1e-12 * std::abs(bound)) break;
      step *= 0.5;
      if (step < 1e-20) throw std::runtime_error("backtracking step underflow");
    }
    const double fn = composite(Xn, ds, lambda);
    if (fn > fx && !restarted) {
      // Restart momentum from the last accepted iterate. The plain proximal
      // step that follows is accepted even if roundoff makes it look uphill.
      t = 1.0;
      Y = X;
      restarted = true;
      res.iterations = it;
      continue;
    }
    restarted = false;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Y = Xn + ((t - 1.0) / tn) * (Xn - X);
    X = Xn;
    fx = fn;
    t = tn;
    res.iterations = it;

    res.kkt = kkt_residual(X, ds, lambda);
    if (res.kkt.value <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.Z = X;
  res.objective = fx;
  if (!res.converged) res.kkt = kkt_residual(X, ds, lambda);
  return res;
}

std::vector<PathPoint> regularization_path(const LabeledDataset& ds,
                                           const std::vector<double>& lambdas,
                                           const SolverOptions& opts) {
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i - 1])) {
      throw std::invalid_argument("lambda grid must be strictly decreasing");
    }
  }
  const SelMatrix sel = build_sel_matrix(ds);
  const MatrixXd direction = sel.entries / nuclear_norm(sel.entries);
  const MetricTargets etf = etf_targets(ds.k());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<PathPoint> out;
  SolverOptions o = opts;
  for (const double lambda : lambdas) {
    const SolverResult r = solve_nuc_reg(ds, lambda, o);
    o.warm_start = r.Z;
    PathPoint p;
    p.lambda = lambda;
    p.converged = r.converged;
    p.kkt = r.kkt.value;
    p.iterations = r.iterations;
    p.zero_solution = r.kkt.rank == 0;
    p.min_margin = min_margin(r.Z, ds);
    if (p.zero_solution) {
      p.direction_distance = p.dist_etf_w = p.dist_etf_h = p.dist_etf_z = nan;
    } else {
      p.direction_distance = (r.Z / nuclear_norm(r.Z) - direction).norm();
      const MetricTargets t = representative_targets(lambda_seli_targets(r), ds);
      p.dist_etf_w = gram_distance(t.Gw, etf.Gw);
      p.dist_etf_h = gram_distance(t.Gm, etf.Gm);
      p.dist_etf_z = gram_distance(t.Z, etf.Z);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<PathPoint> regularization_path_per_n(const LabeledDataset& ds,
                                                 const std::vector<double>& lambdas_per_n,
                                                 const SolverOptions& opts) {
  std::vector<double> raw(lambdas_per_n);
  for (double& l : raw) l *= ds.n();
  return regularization_path(ds, raw, opts);
}

GramTargets lambda_seli_targets(const SolverResult& result) {
  const Compact c = compact_svd(result.Z);
  return seli_gram_targets(SvdFactors{c.V, c.sigma, c.U});
}

double scaled_seli_ridge_residual(const LabeledDataset& ds, double alpha, double lambda) {
  const SvdFactors f = numerical_svd(build_sel_matrix(ds));
  const UfmState s = factorized_seli_state(f, ds.k() - 1, alpha);
  TrainConfig cfg;
  cfg.ridge_lambda = lambda;
  return stationarity_residual(s, ds, cfg);
}

}  // namespace seli
