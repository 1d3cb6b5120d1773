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

#include <optional>
#include <vector>

#include "seli/spectral.hpp"

namespace seli {

/// Soft-thresholds the singular values of M by tau.
MatrixXd svt(const MatrixXd& M, double tau);

struct KktResidual {
  double grad_spectral_norm = 0.0;  // ||grad L(Z)||_2
  double factor_residuals = 0.0;    // max(||G U + lambda V||_F, ||G^T V + lambda U||_F)
  double value = 0.0;               // max(factor_residuals, max(0, ||G||_2 - lambda))
  int rank = 0;
};

/// Optimality residual of L(Z) + lambda ||Z||_*. Singular values below
/// 1e-10 * max(1, sigma_max) are treated as zero.
KktResidual kkt_residual(const MatrixXd& Z, const LabeledDataset& ds, double lambda);

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 500000;
  double initial_step = 1.0;
  std::optional<MatrixXd> warm_start;
};

struct SolverResult {
  MatrixXd Z;
  double objective = 0.0;
  KktResidual kkt;
  int iterations = 0;
  bool converged = false;
};

/// Accelerated proximal gradient for min L(Z) + lambda ||Z||_* with
/// backtracking and restart on objective increase.
SolverResult solve_nuc_reg(const LabeledDataset& ds, double lambda,
                           const SolverOptions& opts = {});

struct PathPoint {
  double lambda = 0.0;
  bool zero_solution = false;
  bool converged = false;
  double direction_distance = 0.0;  // NaN at zero solutions
  double min_margin = 0.0;
  double dist_etf_w = 0.0;
  double dist_etf_h = 0.0;
  double dist_etf_z = 0.0;
  double kkt = 0.0;
  int iterations = 0;
};

/// Solves along a decreasing lambda grid, warm-starting each point from the
/// previous solution. Direction distance is
/// || Z_l/||Z_l||_* - Zhat/||Zhat||_* ||_F.
std::vector<PathPoint> regularization_path(const LabeledDataset& ds,
                                           const std::vector<double>& lambdas,
                                           const SolverOptions& opts = {});

/// Same path with the grid given per sample: point i solves at
/// lambdas_per_n[i] * n. Lets datasets of different size share an axis.
std::vector<PathPoint> regularization_path_per_n(const LabeledDataset& ds,
                                                 const std::vector<double>& lambdas_per_n,
                                                 const SolverOptions& opts = {});

/// Compact SVD of a solver output (rank-thresholded) as Gram targets.
GramTargets lambda_seli_targets(const SolverResult& result);

/// Stationarity residual of the ridge-regularized UFM at the factorized SELI
/// state scaled by alpha (so that W^T H = alpha^2 Zhat).
double scaled_seli_ridge_residual(const LabeledDataset& ds, double alpha, double lambda);

}  // namespace seli
