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

#include "seli/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

GeometryReport seli_closed_form(int k, double R) {
  if (k < 2 || k % 2 != 0) {
    throw InvalidSpec("closed-form geometry needs an even k >= 2, got " +
                      std::to_string(k));
  }
  if (!(R >= 1.0) || !std::isfinite(R)) {
    throw InvalidSpec("closed-form geometry needs a finite R >= 1");
  }
  const double kd = k;
  const double sR = std::sqrt(R);
  const double s = std::sqrt((R + 1.0) / 2.0);
  const double a = 1.0 - 2.0 / kd;

  GeometryReport g;
  g.norm_w_maj2 = sR * a + s / kd;
  g.norm_w_min2 = a + s / kd;
  g.norm_h_maj2 = a / sR + 1.0 / (kd * s);
  g.norm_h_min2 = a + 1.0 / (kd * s);

  const double nwM = std::sqrt(g.norm_w_maj2), nwm = std::sqrt(g.norm_w_min2);
  const double nhM = std::sqrt(g.norm_h_maj2), nhm = std::sqrt(g.norm_h_min2);

  if (k > 2) {
    g.cos_w_majmaj = (-2.0 * sR + s) / ((kd - 2.0) * sR + s);
    g.cos_w_minmin = (R - 7.0) / (R - 7.0 + 2.0 * kd * (2.0 + s));
    g.cos_h_majmaj = -(R + 2.0) / (-(R + 2.0) + kd * (R + 1.0 + sR * s));
    const double t = 1.0 - std::sqrt(2.0) * std::sqrt(R + 1.0);
    g.cos_h_minmin = t / (t + kd * s);
  } else {
    g.cos_w_majmaj = g.cos_w_minmin = g.cos_h_majmaj = g.cos_h_minmin = kNaN;
  }
  g.cos_w_majmin = -s / (kd * nwM * nwm);
  g.cos_h_majmin = -1.0 / (nhM * nhm * kd * s);
  g.align_maj = (1.0 - 1.0 / kd) / (nwM * nhM);
  g.align_min = (1.0 - 1.0 / kd) / (nwm * nhm);
  return g;
}

GeometryReport geometry_from_targets(const GramTargets& t, const LabeledDataset& ds) {
  const int k = ds.k();
  int cmax = 0;
  for (int c = 1; c < k; ++c) {
    if (ds.counts[c] > ds.counts[cmax]) cmax = c;
  }
  std::vector<int> maj, min;
  for (int c = 0; c < k; ++c) {
    (ds.counts[c] == ds.counts[cmax] ? maj : min).push_back(c);
  }
  // Balanced data: split the classes in halves so both kinds exist.
  if (min.empty()) {
    min.assign(maj.begin() + k / 2, maj.end());
    maj.resize(k / 2);
  }
  const auto cos_w = [&](int a, int b) {
    return t.Gw(a, b) / std::sqrt(t.Gw(a, a) * t.Gw(b, b));
  };
  const auto cos_h = [&](int a, int b) {
    const int i = ds.first_of(a), j = ds.first_of(b);
    return t.Gh(i, j) / std::sqrt(t.Gh(i, i) * t.Gh(j, j));
  };
  const auto align = [&](int c) {
    const int i = ds.first_of(c);
    return t.Z(c, i) / std::sqrt(t.Gw(c, c) * t.Gh(i, i));
  };

  const int M = maj.front(), m = min.front();
  GeometryReport g;
  g.norm_w_maj2 = t.Gw(M, M);
  g.norm_w_min2 = t.Gw(m, m);
  g.norm_h_maj2 = t.Gh(ds.first_of(M), ds.first_of(M));
  g.norm_h_min2 = t.Gh(ds.first_of(m), ds.first_of(m));
  g.cos_w_majmaj = maj.size() > 1 ? cos_w(maj[0], maj[1]) : kNaN;
  g.cos_w_minmin = min.size() > 1 ? cos_w(min[0], min[1]) : kNaN;
  g.cos_w_majmin = cos_w(M, m);
  g.cos_h_majmaj = maj.size() > 1 ? cos_h(maj[0], maj[1]) : kNaN;
  g.cos_h_minmin = min.size() > 1 ? cos_h(min[0], min[1]) : kNaN;
  g.cos_h_majmin = cos_h(M, m);
  g.align_maj = align(M);
  g.align_min = align(m);
  return g;
}

MatrixXd etf_reference(int k) {
  if (k < 2) throw InvalidSpec("ETF reference needs k >= 2");
  return MatrixXd::Identity(k, k) - MatrixXd::Constant(k, k, 1.0 / k);
}

AsymptoticLimits asymptotic_limits(int k) {
  if (k <= 2 || k % 2 != 0) {
    throw InvalidSpec("asymptotic limits need an even k > 2");
  }
  const double kd = k;
  const double r2 = std::sqrt(2.0);
  AsymptoticLimits l;
  l.norm_ratio_w2 = 1.0 + (kd - 2.0) * r2;
  l.norm_ratio_h2 = 0.0;
  l.cos_w_majmaj = (-4.0 + r2) / (r2 + 2.0 * (kd - 2.0));
  l.cos_w_minmin = 1.0;
  l.cos_w_majmin = -1.0 / std::sqrt(1.0 + r2 * (kd - 2.0));
  l.cos_h_majmaj = (r2 - 2.0) / (kd - 2.0 + r2);
  l.cos_h_minmin = -2.0 / (kd - 2.0);
  l.cos_h_majmin = 0.0;
  l.align_maj = (kd - 1.0) / (std::sqrt(kd + r2 - 2.0) * std::sqrt(kd + r2 / 2.0 - 2.0));
  l.align_min = 0.0;
  return l;
}

double minority_collapse_threshold(int k, double rho, double lambda) {
  return (1.0 / (2.0 * k * lambda) - rho) / (1.0 - rho);
}

bool no_collapse_condition(double lambda_per_n, int n) {
  return 2.0 * lambda_per_n < 1.0 / n;
}

double bisect_decreasing(const std::function<double(double)>& g, double tol) {
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("bisection bracket diverged");
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double linear_model_scale(int k, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  return bisect_decreasing(
      [&](double a) { return k / (std::exp(a) + k - 1.0) - lambda * a; });
}

LogitRegFixedPoint logit_reg_fixed_point(int k, int n, double lambda_L) {
  if (!(lambda_L > 0.0)) throw std::invalid_argument("lambda_L must be positive");
  const double beta = std::sqrt(static_cast<double>(k) / (n * (k - 1.0)));
  const auto rhs = [&](double r) {
    const double e = (k - 1.0) * std::exp(-beta * r);
    return beta / lambda_L * e / (1.0 + e);
  };
  LogitRegFixedPoint p;
  p.beta = beta;
  p.rho = bisect_decreasing([&](double r) { return rhs(r) - r; });
  p.residual = std::abs(p.rho - rhs(p.rho));
  p.alpha = std::log1p((k - 1.0) * std::exp(-beta * p.rho)) + 0.5 * lambda_L * p.rho * p.rho;
  return p;
}

}  // namespace seli
