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

#include <functional>

#include "seli/spectral.hpp"

namespace seli {

/// Norms, angles and alignments of the SELI geometry for a ρ = 1/2 STEP
/// dataset with n_min = 1. Norms are squared. Same-kind cosines are NaN when
/// only one class of that kind exists (k = 2).
struct GeometryReport {
  double norm_w_maj2 = 0.0;
  double norm_w_min2 = 0.0;
  double norm_h_maj2 = 0.0;
  double norm_h_min2 = 0.0;
  double cos_w_majmaj = 0.0;
  double cos_w_minmin = 0.0;
  double cos_w_majmin = 0.0;
  double cos_h_majmaj = 0.0;
  double cos_h_minmin = 0.0;
  double cos_h_majmin = 0.0;
  double align_maj = 0.0;
  double align_min = 0.0;
};

/// Closed-form SELI geometry for ρ = 1/2. Throws InvalidSpec for odd k,
/// k < 2 or R < 1.
GeometryReport seli_closed_form(int k, double R);

/// Reads the same quantities off Gram targets: norms from diagonals, cosines
/// from off-diagonals, alignment from Z[c, first example of c]. Majority
/// classes are those with the largest count.
GeometryReport geometry_from_targets(const GramTargets& t, const LabeledDataset& ds);

/// G = I - (1/k) 1 1^T.
MatrixXd etf_reference(int k);

/// R -> infinity limits of the closed forms, numbered as (i)..(x).
struct AsymptoticLimits {
  double norm_ratio_w2;  // (i)    ||w_maj||^2 / ||w_min||^2
  double norm_ratio_h2;  // (ii)   ||h_maj||^2 / ||h_min||^2
  double cos_w_majmaj;   // (iii)
  double cos_w_minmin;   // (iv)
  double cos_w_majmin;   // (v)
  double cos_h_majmaj;   // (vi)
  double cos_h_minmin;   // (vii)
  double cos_h_majmin;   // (viii)
  double align_maj;      // (ix)
  double align_min;      // (x)
};

/// Throws InvalidSpec unless k > 2 is even.
AsymptoticLimits asymptotic_limits(int k);

/// f(λ, ρ) = (1/(2kλ) - ρ) / (1 - ρ); minority collapse needs R > f.
double minority_collapse_threshold(int k, double rho, double lambda);

/// 2λ_n < 1/n with λ_n the per-sample ridge strength.
bool no_collapse_condition(double lambda_per_n, int n);

/// Root of g on (0, inf) for g decreasing with g(0+) > 0. The upper end of
/// the bracket is doubled until g changes sign. Stops once the bracket is
/// below tol * max(1, hi); tol = 0 runs to floating-point resolution.
double bisect_decreasing(const std::function<double(double)>& g, double tol = 0.0);

/// Positive root of λα = k / (e^α + k - 1).
double linear_model_scale(int k, double lambda);

struct LogitRegFixedPoint {
  double rho;       // ρ*
  double alpha;     // α(ρ*) = log(1 + (k-1)e^{-βρ*}) + (λ_L/2)ρ*²
  double beta;      // sqrt(k / (n(k-1)))
  double residual;  // |ρ* - rhs(ρ*)|
};

/// Solves ρ = (β/λ_L)(k-1)e^{-βρ} / (1 + (k-1)e^{-βρ}).
LogitRegFixedPoint logit_reg_fixed_point(int k, int n, double lambda_L);

}  // namespace seli
