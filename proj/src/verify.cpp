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

#include "seli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "seli/convex.hpp"
#include "seli/geometry.hpp"
#include "seli/metrics.hpp"
#include "seli/spectral.hpp"
#include "seli/ufm.hpp"

namespace seli {
namespace {

using json = nlohmann::json;

/// Tracks the largest residual seen and where it occurred.
struct Worst {
  double value = 0.0;
  json where = json::object();
  void see(double v, json w) {
    if (std::isnan(v) || v > value) {
      value = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
      where = std::move(w);
    }
  }
};

json coords(const GridPoint& g) { return {{"k", g.k}, {"R", g.R}, {"rho", g.rho}}; }

ImbalanceSpec spec_of(const GridPoint& g) { return {g.k, g.R, g.rho, 1}; }

CheckResult upper(std::string name, const Worst& w, double threshold) {
  CheckResult c;
  c.name = std::move(name);
  c.worst = w.value;
  c.threshold = threshold;
  c.where = w.where;
  c.pass = w.value <= threshold;
  return c;
}

void run(VerifyReport& rep, const std::function<std::vector<CheckResult>()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CheckResult> out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    CheckResult c;
    c.name = "exception";
    c.detail = e.what();
    out.push_back(c);
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& c : out) {
    c.seconds = dt / out.size();
    rep.checks.push_back(std::move(c));
  }
}

std::vector<CheckResult> check_svd() {
  Worst recon, ortho, sv;
  for (const GridPoint& g : svd_grid()) {
    const ImbalanceSpec spec = spec_of(g);
    const SelMatrix Z = build_sel_matrix(build_dataset(spec));
    const SvdFactors f = closed_form_svd(spec);
    recon.see((f.reconstruct() - Z.entries).norm(), coords(g));
    const int r = g.k - 1;
    const double ov = (f.V.transpose() * f.V - MatrixXd::Identity(r, r)).norm();
    const double ou = (f.U.transpose() * f.U - MatrixXd::Identity(r, r)).norm();
    ortho.see(std::max(ov, ou), coords(g));
    VectorXd a = f.lambda, b = numerical_svd(Z).lambda;
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    sv.see((a - b).cwiseAbs().maxCoeff(), coords(g));
  }
  return {upper("svd_reconstruction", recon, 1e-10),
          upper("svd_orthonormality", ortho, 1e-10),
          upper("svd_singular_values", sv, 1e-9)};
}

std::vector<CheckResult> check_certificate(bool inject) {
  Worst norm, rows, trace;
  double min_sign = std::numeric_limits<double>::infinity();
  json sign_where = json::object();
  for (const GridPoint& g : svd_grid()) {
    const ImbalanceSpec spec = spec_of(g);
    SelMatrix Z = build_sel_matrix(build_dataset(spec));
    const SvdFactors f = closed_form_svd(spec);
    if (inject) Z.entries(0, 0) = -Z.entries(0, 0);
    const CertificateReport r = inspect_certificate(f.U * f.V.transpose(), Z.entries);
    norm.see(r.spectral_norm - 1.0, coords(g));
    rows.see(r.row_sum_residual, coords(g));
    trace.see(r.trace_gap, coords(g));
    if (r.min_sign_product < min_sign) {
      min_sign = r.min_sign_product;
      sign_where = coords(g);
      sign_where["example"] = r.worst_example;
      sign_where["class"] = r.worst_class;
    }
  }
  CheckResult sign;
  sign.name = "certificate_sign";
  sign.worst = min_sign;
  sign.threshold = 0.0;
  sign.where = sign_where;
  sign.pass = min_sign > 0.0;
  sign.detail = "min entry of B.*Z^T, must be > 0";
  return {upper("certificate_spectral_norm", norm, 1e-10),
          upper("certificate_row_sums", rows, 1e-12), sign,
          upper("certificate_trace", trace, 1e-8)};
}

double report_gap(const GeometryReport& a, const GeometryReport& b) {
  const double va[] = {a.norm_w_maj2, a.norm_w_min2, a.norm_h_maj2, a.norm_h_min2,
                       a.cos_w_majmaj, a.cos_w_minmin, a.cos_w_majmin, a.cos_h_majmaj,
                       a.cos_h_minmin, a.cos_h_majmin, a.align_maj, a.align_min};
  const double vb[] = {b.norm_w_maj2, b.norm_w_min2, b.norm_h_maj2, b.norm_h_min2,
                       b.cos_w_majmaj, b.cos_w_minmin, b.cos_w_majmin, b.cos_h_majmaj,
                       b.cos_h_minmin, b.cos_h_majmin, b.align_maj, b.align_min};
  double gap = 0.0;
  for (int i = 0; i < 12; ++i) {
    if (std::isnan(va[i]) && std::isnan(vb[i])) continue;
    gap = std::max(gap, std::isnan(va[i] - vb[i]) ? INFINITY : std::abs(va[i] - vb[i]));
  }
  return gap;
}

std::vector<CheckResult> check_geometry() {
  Worst agree, etf, r7;
  for (int k : {2, 4, 10, 20}) {
    for (double R : {1.0, 2.0, 3.0, 7.0, 10.0, 100.0}) {
      const GridPoint g{k, R, 0.5};
      const ImbalanceSpec spec = spec_of(g);
      const LabeledDataset ds = build_dataset(spec);
      const GeometryReport cf = seli_closed_form(k, R);
      const GeometryReport sp =
          geometry_from_targets(seli_gram_targets(closed_form_svd(spec)), ds);
      agree.see(report_gap(cf, sp), coords(g));
      if (R == 1.0 || k == 2) {
        const double c = -1.0 / (k - 1);
        double e = 0.0;
        for (double v : {cf.cos_w_majmaj, cf.cos_w_minmin, cf.cos_w_majmin,
                         cf.cos_h_majmaj, cf.cos_h_minmin, cf.cos_h_majmin}) {
          if (!std::isnan(v)) e = std::max(e, std::abs(v - c));
        }
        e = std::max({e, std::abs(cf.align_maj - 1.0), std::abs(cf.align_min - 1.0)});
        if (R == 1.0) {
          e = std::max({e, std::abs(cf.norm_w_maj2 - cf.norm_w_min2),
                        std::abs(cf.norm_h_maj2 - cf.norm_h_min2)});
        }
        etf.see(e, coords(g));
      }
      if (R == 7.0 && k > 2) r7.see(std::abs(cf.cos_w_minmin), coords(g));
    }
  }
  return {upper("geometry_closed_form_vs_spectral", agree, 1e-10),
          upper("geometry_etf_reduction", etf, 1e-10),
          upper("geometry_r7_minority_orthogonal", r7, 1e-14)};
}

std::vector<CheckResult> check_asymptotics() {
  Worst w;
  const int k = 4;
  const double R = 1e6;
  const GeometryReport g = seli_closed_form(k, R);
  const AsymptoticLimits l = asymptotic_limits(k);
  const std::pair<const char*, std::pair<double, double>> rows[] = {
      {"i", {g.norm_w_maj2 / g.norm_w_min2, l.norm_ratio_w2}},
      {"ii", {g.norm_h_maj2 / g.norm_h_min2, l.norm_ratio_h2}},
      {"iii", {g.cos_w_majmaj, l.cos_w_majmaj}},
      {"iv", {g.cos_w_minmin, l.cos_w_minmin}},
      {"v", {g.cos_w_majmin, l.cos_w_majmin}},
      {"vi", {g.cos_h_majmaj, l.cos_h_majmaj}},
      {"vii", {g.cos_h_minmin, l.cos_h_minmin}},
      {"viii", {g.cos_h_majmin, l.cos_h_majmin}},
      {"ix", {g.align_maj, l.align_maj}},
      {"x", {g.align_min, l.align_min}},
  };
  for (const auto& [name, v] : rows) {
    w.see(std::abs(v.first - v.second), {{"k", k}, {"R", R}, {"limit", name}});
  }
  return {upper("asymptotic_limits", w, 1e-2)};
}

std::vector<CheckResult> check_gradient() {
  Worst ident, fd;
  for (const GridPoint& g : svd_grid()) {
    const LabeledDataset ds = build_dataset(spec_of(g));
    const MatrixXd Z = build_sel_matrix(ds).entries;
    for (double a : {0.0, 1.0, 5.0}) {
      const double c = g.k / (std::exp(a) + g.k - 1.0);
      json at = coords(g);
      at["alpha"] = a;
      ident.see((ce_gradient(a * Z, ds) + c * Z).norm(), at);
    }
  }
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledDataset ds = dataset_from_counts({3, 1, 2, 1, 2});
    MatrixXd Z(ds.k(), ds.n());
    for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = 2.0 * normal(rng);
    const MatrixXd G = ce_gradient(Z, ds);
    MatrixXd Gfd(Z.rows(), Z.cols());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < Z.size(); ++i) {
      MatrixXd P = Z, M = Z;
      P.data()[i] += h;
      M.data()[i] -= h;
      Gfd.data()[i] = (ce_loss(P, ds) - ce_loss(M, ds)) / (2 * h);
    }
    fd.see((G - Gfd).norm() / G.norm(), {{"trial", trial}});
  }
  return {upper("ce_gradient_identity", ident, 1e-9),
          upper("ce_gradient_finite_difference", fd, 1e-6)};
}

std::vector<CheckResult> check_convex_thresholds() {
  const ImbalanceSpec spec{4, 10.0, 0.5, 1};
  const LabeledDataset ds = build_dataset(spec);
  const double sR = std::sqrt(10.0);
  std::vector<CheckResult> out;

  const SolverResult big = solve_nuc_reg(ds, sR);
  Worst z;
  z.see(big.Z.norm(), {{"lambda", sR}});
  out.push_back(upper("convex_large_lambda_zero", z, 1e-8));

  const SolverResult below = solve_nuc_reg(ds, 0.9 * sR);
  CheckResult nz;
  nz.name = "convex_below_threshold_nonzero";
  nz.worst = below.Z.norm();
  nz.threshold = 1e-3;
  nz.where = {{"lambda", 0.9 * sR}};
  nz.pass = nz.worst > 1e-3;
  out.push_back(nz);

  const SolverResult small = solve_nuc_reg(ds, 0.4);
  CheckResult m;
  m.name = "convex_small_lambda_margins";
  m.worst = min_margin(small.Z, ds);
  m.threshold = 1e-9;
  m.where = {{"lambda", 0.4}};
  m.pass = m.worst > 1e-9 && small.converged;
  out.push_back(m);
  return out;
}

std::vector<double> path_grid() { return {1, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001}; }

std::vector<CheckResult> check_regpath() {
  const LabeledDataset ds = build_dataset({4, 10.0, 0.5, 1});
  const std::vector<PathPoint> path = regularization_path(ds, path_grid());
  double increase = 0.0;
  json where = json::object();
  double first = NAN, last = NAN, prev = NAN;
  bool all_converged = true;
  for (const PathPoint& p : path) {
    all_converged = all_converged && p.converged;
    if (p.zero_solution) continue;
    if (std::isnan(first)) first = p.direction_distance;
    if (!std::isnan(prev) && p.direction_distance - prev > increase) {
      increase = p.direction_distance - prev;
      where = {{"lambda", p.lambda}};
    }
    prev = last = p.direction_distance;
  }
  CheckResult mono;
  mono.name = "regpath_monotone";
  mono.worst = increase;
  mono.threshold = 0.0;
  mono.where = where;
  mono.pass = increase <= 0.0 && all_converged;
  CheckResult shrink;
  shrink.name = "regpath_final_below_half_first";
  shrink.worst = last / first;
  shrink.threshold = 0.5;
  shrink.pass = last < 0.5 * first;

  const LabeledDataset bal = build_dataset({4, 1.0, 0.5, 1});
  std::vector<double> lams;
  for (double l : path_grid()) {
    if (l < 1.0) lams.push_back(l);
  }
  SolverOptions tight;
  tight.tol = 1e-10;
  Worst b;
  for (const PathPoint& p : regularization_path(bal, lams, tight)) {
    b.see(p.zero_solution ? INFINITY : p.direction_distance, {{"lambda", p.lambda}});
  }

  // Larger imbalance sits farther from the SEL direction at matched lambda/n.
  const std::vector<double> per_n{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  const std::vector<PathPoint> p10 = regularization_path_per_n(ds, per_n);
  const std::vector<PathPoint> p100 =
      regularization_path_per_n(build_dataset({4, 100.0, 0.5, 1}), per_n);
  CheckResult gap;
  gap.name = "regpath_imbalance_slower";
  gap.worst = INFINITY;
  gap.threshold = 0.0;
  gap.detail = "min over lambda/n of distance(R=100) - distance(R=10), must be > threshold";
  for (std::size_t i = 0; i < per_n.size(); ++i) {
    const double d = p100[i].direction_distance - p10[i].direction_distance;
    if (!(d >= gap.worst)) {
      gap.worst = d;
      gap.where = {{"lambda_per_n", per_n[i]}};
    }
  }
  gap.pass = gap.worst > 0.0;
  return {mono, shrink, upper("regpath_balanced_direction", b, 1e-6), gap};
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) {
    g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  }
  return g;
}

std::vector<CheckResult> check_imbalance_reg() {
  const std::vector<double> alphas = log_grid(0.1, 10.0, 20);
  const std::vector<double> lambdas = log_grid(1e-3, 1.0, 10);

  const LabeledDataset imb = build_dataset({4, 10.0, 0.5, 1});
  double best = INFINITY;
  json best_at = json::object();
  for (double a : alphas) {
    for (double l : lambdas) {
      const double r = scaled_seli_ridge_residual(imb, a, l);
      if (r < best) {
        best = r;
        best_at = {{"alpha", a}, {"lambda", l}};
      }
    }
  }
  CheckResult c;
  c.name = "imbalance_reg_bounded_away";
  c.worst = best;
  c.threshold = 1e-3;
  c.where = best_at;
  c.pass = best >= 1e-3;
  c.detail = "minimum residual over the grid, must be >= threshold";

  const LabeledDataset bal = build_dataset({4, 1.0, 0.5, 1});
  Worst root;
  for (double l : lambdas) {
    // Balanced scaled SELI is stationary when k/(e^{a^2}+k-1) = lambda.
    std::vector<double> grid = alphas;
    const double a2 = l >= 1.0 ? 0.0 : std::log(4.0 / l - 3.0);
    grid.push_back(std::sqrt(a2));
    double r = INFINITY, at = 0.0;
    for (double a : grid) {
      const double v = scaled_seli_ridge_residual(bal, a, l);
      if (v < r) {
        r = v;
        at = a;
      }
    }
    root.see(r, {{"lambda", l}, {"alpha", at}});
  }
  return {c, upper("imbalance_reg_balanced_root", root, 1e-8)};
}

std::vector<CheckResult> check_linear_model() {
  Worst w;
  for (int k : {2, 4, 10}) {
    const LabeledDataset ds = build_dataset({k, 1.0, 0.5, 1});
    const MatrixXd Z = build_sel_matrix(ds).entries;
    for (double l : {0.01, 0.1, 1.0}) {
      const double a = linear_model_scale(k, l);
      w.see((ce_gradient(a * Z, ds) + l * a * Z).norm(),
            {{"k", k}, {"lambda", l}, {"alpha", a}});
    }
  }
  return {upper("linear_model_stationarity", w, 1e-8)};
}

std::vector<CheckResult> check_minority_collapse() {
  std::vector<CheckResult> out;
  Worst f24;
  f24.see(std::abs(minority_collapse_threshold(4, 0.5, 0.01) - 24.0), {{"k", 4}});
  out.push_back(upper("minority_collapse_f_value", f24, 1e-12));

  // Strictly increasing in rho needs 1/(2k lambda) > 1, so the lambda grid
  // stays below 1/(2k).
  double gap = -INFINITY;
  json gap_at = json::object();
  const std::vector<double> rhos = log_grid(0.05, 0.95, 10);
  const std::vector<double> lams = log_grid(1e-3, 1e-1, 10);
  auto see = [&](double v, json w) {
    if (v > gap) {
      gap = v;
      gap_at = std::move(w);
    }
  };
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    for (std::size_t j = 0; j < lams.size(); ++j) {
      const double f = minority_collapse_threshold(4, rhos[i], lams[j]);
      if (i + 1 < rhos.size()) {
        see(f - minority_collapse_threshold(4, rhos[i + 1], lams[j]),
            {{"rho", rhos[i]}, {"lambda", lams[j]}, {"axis", "rho"}});
      }
      if (j + 1 < lams.size()) {
        see(minority_collapse_threshold(4, rhos[i], lams[j + 1]) - f,
            {{"rho", rhos[i]}, {"lambda", lams[j]}, {"axis", "lambda"}});
      }
    }
  }
  CheckResult m;
  m.name = "minority_collapse_monotone";
  m.worst = gap;
  m.threshold = 0.0;
  m.where = gap_at;
  m.pass = gap < 0.0;
  m.detail = "largest step against the expected direction, must be < 0";
  out.push_back(m);

  const LabeledDataset ds = build_dataset({4, 10.0, 0.5, 1});
  const int n = ds.n();
  double worst = INFINITY;
  json at = json::object();
  for (double frac : {0.9, 0.5, 0.1}) {
    const double lambda_n = frac / (2.0 * n);
    if (!no_collapse_condition(lambda_n, n)) continue;
    const SolverResult r = solve_nuc_reg(ds, n * lambda_n);
    const double mm = min_margin(r.Z, ds);
    if (mm < worst) {
      worst = mm;
      at = {{"lambda_per_n", lambda_n}, {"lambda", n * lambda_n}};
    }
  }
  CheckResult nc;
  nc.name = "minority_collapse_no_collapse_margin";
  nc.worst = worst;
  nc.threshold = 0.0;
  nc.where = at;
  nc.pass = worst > 0.0;
  out.push_back(nc);
  return out;
}

std::vector<CheckResult> check_training() {
  const ImbalanceSpec spec{4, 10.0, 0.5, 1};
  const LabeledDataset ds = build_dataset(spec);
  const int n = ds.n();
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 20000;
  cfg.objective_scale = 1.0 / n;
  cfg.logit_lambda = 1e-3 * n;
  cfg.ridge_lambda = 1e-2 * n;
  cfg.ridge_decay = RidgeDecay{};
  cfg.seed = 0;
  const TrainResult r = train(init_ufm(ds, 8, cfg.seed, cfg.init_scale), ds, cfg);
  const MetricSnapshot& first = r.trace.records.front().metrics;
  const MetricSnapshot& last = r.trace.records.back().metrics;

  CheckResult conv;
  conv.name = "ufm_logit_dist_seli_z";
  conv.worst = last.dist_seli_z;
  conv.threshold = 0.1;
  conv.where = {{"initial", first.dist_seli_z}, {"epochs", cfg.epochs}};
  conv.pass = last.dist_seli_z <= 0.1 && last.dist_seli_z <= 0.1 * first.dist_seli_z;

  const MarginReport m = margins(r.state, ds);
  double mean = 0.0;
  int cnt = 0;
  for (int y = 0; y < 4; ++y)
    for (int c = 0; c < 4; ++c)
      if (y != c) mean += m.average(y, c), ++cnt;
  mean /= cnt;
  double spread = 0.0;
  for (int y = 0; y < 4; ++y)
    for (int c = 0; c < 4; ++c)
      if (y != c) spread = std::max(spread, std::abs(m.average(y, c) - mean) / mean);
  CheckResult mar;
  mar.name = "ufm_margins_equal";
  mar.worst = spread;
  mar.threshold = 0.05;
  mar.where = {{"mean_margin", mean}};
  mar.pass = spread <= 0.05;

  CheckResult etf;
  etf.name = "ufm_etf_farther_than_seli";
  etf.worst = last.dist_etf_z - last.dist_seli_z;
  etf.threshold = 1e-12;
  etf.where = {{"dist_etf_z", last.dist_etf_z}, {"dist_seli_z", last.dist_seli_z}};
  etf.pass = etf.worst > 1e-12;
  etf.detail = "dist_etf_z - dist_seli_z at the final epoch";
  return {conv, mar, etf};
}

}  // namespace

std::vector<GridPoint> svd_grid() {
  std::vector<GridPoint> g;
  for (int k : {2, 4, 6, 10}) {
    for (double R : {1.0, 2.0, 3.0, 10.0, 100.0}) {
      for (double rho : {0.5, 0.25}) {
        const double m = rho * k;
        if (m != std::round(m) || m < 1) continue;
        g.push_back({k, R, rho});
      }
    }
  }
  return g;
}

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

nlohmann::json VerifyReport::to_json() const {
  json arr = json::array();
  for (const CheckResult& c : checks) {
    json j = {{"name", c.name},         {"pass", c.pass},
              {"worst", c.worst},       {"threshold", c.threshold},
              {"where", c.where},       {"seconds", c.seconds}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    arr.push_back(j);
  }
  return {{"schema_version", 1}, {"pass", all_pass()}, {"checks", arr}};
}

VerifyReport run_verify(const VerifyOptions& opts) {
  VerifyReport rep;
  run(rep, check_svd);
  run(rep, [&] { return check_certificate(opts.inject_sign_flip); });
  run(rep, check_geometry);
  run(rep, check_asymptotics);
  run(rep, check_gradient);
  run(rep, check_convex_thresholds);
  run(rep, check_regpath);
  run(rep, check_imbalance_reg);
  run(rep, check_linear_model);
  run(rep, check_minority_collapse);
  run(rep, check_training);
  return rep;
}

}  // namespace seli
