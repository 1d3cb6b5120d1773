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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "json_config.hpp"
#include "seli/convex.hpp"
#include "seli/geometry.hpp"
#include "seli/metrics.hpp"
#include "seli/spectral.hpp"
#include "seli/ufm.hpp"
#include "seli/verify.hpp"
#include "worker_pool.hpp"

namespace seli::cli {
namespace {

using json = nlohmann::json;

/// Writes to a file, or to stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool is_file() const { return file_ != nullptr; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

void write_json(const std::string& path, const json& j) {
  Output out(path);
  out.stream() << j.dump(2) << "\n";
}

json with_schema(const std::string& command, json body) {
  body["schema_version"] = kSchemaVersion;
  body["command"] = command;
  return body;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < M.cols(); ++j) r.push_back(num(M(i, j)));
    rows.push_back(r);
  }
  return rows;
}

void write_matrix_csv(const std::string& path, const MatrixXd& M) {
  Output out(path);
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) out.stream() << (j ? "," : "") << fmt(M(i, j));
    out.stream() << "\n";
  }
}

json snapshot_json(const MetricSnapshot& m) {
  return {{"dist_seli_w", num(m.dist_seli_w)}, {"dist_seli_h", num(m.dist_seli_h)},
          {"dist_seli_z", num(m.dist_seli_z)}, {"dist_etf_w", num(m.dist_etf_w)},
          {"dist_etf_h", num(m.dist_etf_h)},   {"dist_etf_z", num(m.dist_etf_z)},
          {"nc_error", num(m.nc_error)},       {"norm_ratio_w", num(m.norm_ratio_w)},
          {"norm_ratio_h", num(m.norm_ratio_h)}, {"min_margin", num(m.min_margin)}};
}

struct SpecArgs {
  int k = 4;
  double R = 10.0;
  double rho = 0.5;
  int n_min = 1;

  void add(CLI::App* app) {
    app->add_option("--k", k, "Number of classes")->capture_default_str();
    app->add_option("--R", R, "Imbalance ratio")->capture_default_str();
    app->add_option("--rho", rho, "Minority fraction of classes")->capture_default_str();
    app->add_option("--n-min", n_min, "Examples per minority class")->capture_default_str();
  }
  ImbalanceSpec spec() const {
    ImbalanceSpec s{k, R, rho, n_min};
    s.validate();
    return s;
  }
  json to_json() const { return {{"k", k}, {"R", R}, {"rho", rho}, {"n_min", n_min}}; }
};

// ---------------------------------------------------------------- geometry

struct GeometryArgs {
  std::vector<int> ks{2, 4, 10, 20};
  std::vector<double> Rs;
  double R_min = 1.0;
  double R_max = 100.0;
  int num_R = 50;
  std::string out = "-";
  int jobs = 1;
};

std::vector<double> r_grid(const GeometryArgs& a) {
  if (!a.Rs.empty()) return a.Rs;
  if (a.num_R < 1 || !(a.R_min >= 1.0) || !(a.R_max >= a.R_min)) {
    throw std::invalid_argument("invalid R grid: need 1 <= R-min <= R-max and num-R >= 1");
  }
  std::vector<double> g(a.num_R);
  for (int i = 0; i < a.num_R; ++i) {
    g[i] = a.num_R == 1 ? a.R_min
                        : std::exp(std::log(a.R_min) +
                                   (std::log(a.R_max) - std::log(a.R_min)) * i / (a.num_R - 1));
  }
  return g;
}

int cmd_geometry(const GeometryArgs& a) {
  for (int k : a.ks) {
    if (k < 2 || k % 2) throw std::invalid_argument("geometry grid needs even k >= 2");
  }
  const std::vector<double> Rs = r_grid(a);
  struct Point {
    int k;
    double R;
  };
  std::vector<Point> pts;
  for (int k : a.ks)
    for (double R : Rs) pts.push_back({k, R});

  auto rows = parallel_map(pts.size(), a.jobs, [&](std::size_t i) {
    return seli_closed_form(pts[i].k, pts[i].R);
  });
  Output out(a.out);
  std::ostream& os = out.stream();
  os << kGeometryHeader << "\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (rows[i].error) std::rethrow_exception(rows[i].error);
    const GeometryReport& g = *rows[i].value;
    os << pts[i].k << "," << fmt(pts[i].R);
    for (double v : {g.norm_w_maj2, g.norm_w_min2, g.norm_h_maj2, g.norm_h_min2,
                     g.cos_w_majmaj, g.cos_w_minmin, g.cos_w_majmin, g.cos_h_majmaj,
                     g.cos_h_minmin, g.cos_h_majmin, g.align_maj, g.align_min}) {
      os << "," << fmt(v);
    }
    os << "\n";
  }
  if (out.is_file()) {
    write_json(a.out + ".json",
               with_schema("geometry", {{"header", kGeometryHeader},
                                        {"k", a.ks},
                                        {"R", Rs},
                                        {"rows", pts.size()}}));
  }
  return 0;
}

// --------------------------------------------------------------------- svd

struct SvdArgs {
  SpecArgs spec;
  std::string out = "-";
  std::string factors_dir;
};

int cmd_svd(const SvdArgs& a) {
  const ImbalanceSpec spec = a.spec.spec();
  const SelMatrix Z = build_sel_matrix(build_dataset(spec));
  const SvdFactors f = closed_form_svd_scaled(spec);
  const int r = spec.k - 1;
  const CertificateReport c = inspect_certificate(f.U * f.V.transpose(), Z.entries);
  const VectorXd num_sv = numerical_svd(Z).lambda;

  json j = with_schema("svd", {{"spec", a.spec.to_json()}});
  j["singular_values"] = std::vector<double>(f.lambda.data(), f.lambda.data() + r);
  j["numerical_singular_values"] = std::vector<double>(num_sv.data(), num_sv.data() + r);
  j["reconstruction_residual"] = (f.reconstruct() - Z.entries).norm();
  j["orthonormality_residual"] =
      std::max((f.V.transpose() * f.V - MatrixXd::Identity(r, r)).norm(),
               (f.U.transpose() * f.U - MatrixXd::Identity(r, r)).norm());
  j["nuclear_norm"] = f.lambda.sum();
  j["certificate"] = {{"spectral_norm", c.spectral_norm},
                      {"row_sum_residual", c.row_sum_residual},
                      {"min_sign_product", c.min_sign_product},
                      {"worst_example", c.worst_example},
                      {"worst_class", c.worst_class},
                      {"trace_gap", c.trace_gap}};
  if (!a.factors_dir.empty()) {
    write_matrix_csv(a.factors_dir + "/V.csv", f.V);
    write_matrix_csv(a.factors_dir + "/U.csv", f.U);
    write_matrix_csv(a.factors_dir + "/lambda.csv", f.lambda);
  }
  write_json(a.out, j);
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  SpecArgs spec;
  int d = 8;
  double lr = 1.0;
  int epochs = 20000;
  int batch_size = 0;
  double ridge_lambda = 0.0;
  double logit_lambda = 0.0;
  bool lambda_per_n = false;
  double decay_factor = 10.0;
  int decay_every = 0;
  double decay_floor = 1e-8;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  std::string out = "-";
  std::string summary;
};

void write_trace(std::ostream& os, const TrainTrace& t, double lambda_unit) {
  os << kTrainHeader << "\n";
  for (const TraceRecord& r : t.records) {
    const MetricSnapshot& m = r.metrics;
    os << r.epoch;
    for (double v : {r.objective, r.lambda / lambda_unit, m.dist_seli_w, m.dist_seli_h,
                     m.dist_seli_z, m.dist_etf_w, m.dist_etf_h, m.dist_etf_z, m.nc_error,
                     m.norm_ratio_w, m.norm_ratio_h, m.min_margin}) {
      os << "," << fmt(v);
    }
    os << "\n";
  }
}

int cmd_train(const TrainArgs& a) {
  const ImbalanceSpec spec = a.spec.spec();
  const LabeledDataset ds = build_dataset(spec);
  const int n = ds.n();
  const double unit = a.lambda_per_n ? n : 1.0;

  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.ridge_lambda = a.ridge_lambda * unit;
  cfg.logit_lambda = a.logit_lambda * unit;
  cfg.objective_scale = 1.0 / unit;
  if (a.decay_every > 0) cfg.ridge_decay = RidgeDecay{a.decay_factor, a.decay_every, a.decay_floor};
  cfg.seed = a.seed;
  cfg.init_scale = a.init_scale;
  cfg.validate(n);

  json config = {{"spec", a.spec.to_json()},
                 {"d", a.d},
                 {"learning_rate", a.lr},
                 {"epochs", a.epochs},
                 {"batch_size", a.batch_size},
                 {"ridge_lambda", a.ridge_lambda},
                 {"logit_lambda", a.logit_lambda},
                 {"lambda_per_n", a.lambda_per_n},
                 {"ridge_decay",
                  a.decay_every > 0 ? json{{"factor", a.decay_factor},
                                           {"every_epochs", a.decay_every},
                                           {"floor", a.decay_floor}}
                                    : json(nullptr)},
                 {"seed", a.seed},
                 {"init_scale", a.init_scale}};
  const std::string summary_path =
      !a.summary.empty() ? a.summary : (a.out != "-" ? a.out + ".json" : std::string());

  const auto t0 = std::chrono::steady_clock::now();
  const UfmState init = init_ufm(ds, a.d, a.seed, a.init_scale);
  Output out(a.out);
  try {
    const TrainResult r = train(init, ds, cfg);
    write_trace(out.stream(), r.trace, unit);
    if (!summary_path.empty()) {
      const MarginReport m = margins(r.state, ds);
      const TraceRecord& last = r.trace.records.back();
      write_json(summary_path,
                 with_schema("train", {{"config", config},
                                       {"status", "completed"},
                                       {"header", kTrainHeader},
                                       {"final_epoch", last.epoch},
                                       {"final_objective", num(last.objective)},
                                       {"final", snapshot_json(last.metrics)},
                                       {"initial", snapshot_json(r.trace.records.front().metrics)},
                                       {"average_margins", matrix_json(m.average)},
                                       {"min_margin", num(m.min_margin)},
                                       {"runtime_seconds", elapsed(t0)}}));
    }
    return 0;
  } catch (const TrainingAborted& e) {
    write_trace(out.stream(), e.trace, unit);
    if (!summary_path.empty()) {
      write_json(summary_path, with_schema("train", {{"config", config},
                                                     {"status", "aborted"},
                                                     {"header", kTrainHeader},
                                                     {"aborted_epoch", e.epoch},
                                                     {"message", e.what()},
                                                     {"runtime_seconds", elapsed(t0)}}));
    }
    std::cerr << "seli: " << e.what() << "\n";
    return 2;
  }
}

// ------------------------------------------------------------------- solve

struct SolveArgs {
  SpecArgs spec;
  double lambda = 1.0;
  bool lambda_per_n = false;
  double tol = 1e-7;
  int max_iterations = 500000;
  std::string out = "-";
  std::string z_out;
};

int cmd_solve(const SolveArgs& a) {
  const LabeledDataset ds = build_dataset(a.spec.spec());
  const double lambda = a.lambda_per_n ? a.lambda * ds.n() : a.lambda;
  SolverOptions opts;
  opts.tol = a.tol;
  opts.max_iterations = a.max_iterations;
  const auto t0 = std::chrono::steady_clock::now();
  const SolverResult r = solve_nuc_reg(ds, lambda, opts);
  const MatrixXd zhat = build_sel_matrix(ds).entries;

  json j = with_schema("solve", {{"spec", a.spec.to_json()},
                                 {"lambda", lambda},
                                 {"lambda_per_n", lambda / ds.n()},
                                 {"objective", r.objective},
                                 {"iterations", r.iterations},
                                 {"converged", r.converged},
                                 {"kkt",
                                  {{"value", r.kkt.value},
                                   {"grad_spectral_norm", r.kkt.grad_spectral_norm},
                                   {"factor_residuals", r.kkt.factor_residuals},
                                   {"rank", r.kkt.rank}}},
                                 {"frobenius_norm", r.Z.norm()},
                                 {"min_margin", min_margin(r.Z, ds)},
                                 {"column_sum_residual", r.Z.colwise().sum().cwiseAbs().maxCoeff()},
                                 {"runtime_seconds", elapsed(t0)}});
  if (r.kkt.rank > 0) {
    j["direction_distance"] =
        (r.Z / nuclear_norm(r.Z) - zhat / nuclear_norm(zhat)).norm();
    const VectorXd s = Eigen::JacobiSVD<MatrixXd>(r.Z).singularValues().head(r.kkt.rank);
    j["singular_values"] = std::vector<double>(s.data(), s.data() + s.size());
  } else {
    j["zero_solution"] = true;
  }
  if (!a.z_out.empty()) write_matrix_csv(a.z_out, r.Z);
  write_json(a.out, j);
  return r.converged ? 0 : 3;
}

// ----------------------------------------------------------------- regpath

struct RegpathArgs {
  SpecArgs spec;
  std::vector<double> Rs;
  std::vector<double> lambdas{1, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001};
  bool lambda_per_n = false;
  double tol = 1e-7;
  int max_iterations = 500000;
  std::string out = "-";
  int jobs = 1;
};

int cmd_regpath(const RegpathArgs& a) {
  for (std::size_t i = 1; i < a.lambdas.size(); ++i) {
    if (!(a.lambdas[i] < a.lambdas[i - 1])) {
      throw std::invalid_argument("--lambdas must be strictly decreasing");
    }
  }
  std::vector<double> Rs = a.Rs.empty() ? std::vector<double>{a.spec.R} : a.Rs;
  std::vector<LabeledDataset> sets;
  for (double R : Rs) {
    SpecArgs s = a.spec;
    s.R = R;
    sets.push_back(build_dataset(s.spec()));
  }
  SolverOptions opts;
  opts.tol = a.tol;
  opts.max_iterations = a.max_iterations;

  auto paths = parallel_map(sets.size(), a.jobs, [&](std::size_t i) {
    const double unit = a.lambda_per_n ? sets[i].n() : 1.0;
    std::vector<double> raw;
    for (double l : a.lambdas) raw.push_back(l * unit);
    return regularization_path(sets[i], raw, opts);
  });

  Output out(a.out);
  std::ostream& os = out.stream();
  os << kRegpathHeader << "\n";
  json failures = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (paths[i].error) {
      try {
        std::rethrow_exception(paths[i].error);
      } catch (const std::exception& e) {
        failures.push_back({{"R", Rs[i]}, {"message", e.what()}});
        std::cerr << "seli: regpath R=" << Rs[i] << ": " << e.what() << "\n";
      }
      continue;
    }
    for (const PathPoint& p : *paths[i].value) {
      if (!p.converged) failures.push_back({{"R", Rs[i]}, {"lambda", p.lambda}, {"kkt", p.kkt}});
      os << a.spec.k << "," << fmt(Rs[i]) << "," << fmt(p.lambda) << ","
         << fmt(p.lambda / sets[i].n()) << "," << (p.zero_solution ? 1 : 0) << ","
         << (p.converged ? 1 : 0);
      for (double v : {p.direction_distance, p.min_margin, p.dist_etf_w, p.dist_etf_h,
                       p.dist_etf_z, p.kkt}) {
        os << "," << fmt(v);
      }
      os << "\n";
    }
  }
  if (out.is_file()) {
    write_json(a.out + ".json", with_schema("regpath", {{"header", kRegpathHeader},
                                                        {"spec", a.spec.to_json()},
                                                        {"R", Rs},
                                                        {"lambdas", a.lambdas},
                                                        {"lambda_per_n", a.lambda_per_n},
                                                        {"tol", a.tol},
                                                        {"failures", failures}}));
  }
  return 0;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string out = "-";
  bool inject_sign_flip = false;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyOptions o;
  o.inject_sign_flip = a.inject_sign_flip;
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport rep = run_verify(o);
  json j = rep.to_json();
  j["command"] = "verify";
  j["runtime_seconds"] = elapsed(t0);
  write_json(a.out, j);
  for (const CheckResult& c : rep.checks) {
    if (!c.pass) std::cerr << "seli: check failed: " << c.name << " worst=" << fmt(c.worst) << "\n";
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"SELI geometry: closed forms, certificates, UFM training and convex solves"};
  app.require_subcommand(1);
  std::string config_path;
  auto with_config = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON file with option values (flags override it)")
        ->check(CLI::ExistingFile)
        ->configurable(false);
  };

  GeometryArgs ga;
  CLI::App* geo = app.add_subcommand("geometry", "Closed-form SELI geometry over a (k, R) grid");
  with_config(geo);
  geo->add_option("--k", ga.ks, "Even class counts")->capture_default_str();
  geo->add_option("--R", ga.Rs, "Explicit R values (overrides the log grid)");
  geo->add_option("--R-min", ga.R_min)->capture_default_str();
  geo->add_option("--R-max", ga.R_max)->capture_default_str();
  geo->add_option("--num-R", ga.num_R, "Log-spaced R points")->capture_default_str();
  geo->add_option("--out", ga.out, "CSV path, '-' for stdout")->capture_default_str();
  geo->add_option("--jobs", ga.jobs, "Worker threads")->capture_default_str();

  SvdArgs sa;
  CLI::App* svd = app.add_subcommand("svd", "Closed-form SVD and dual certificate residuals");
  with_config(svd);
  sa.spec.add(svd);
  svd->add_option("--out", sa.out, "JSON path, '-' for stdout")->capture_default_str();
  svd->add_option("--factors-dir", sa.factors_dir, "Directory for V.csv, U.csv, lambda.csv");

  TrainArgs ta;
  CLI::App* tr = app.add_subcommand("train", "Train the unconstrained-features model");
  with_config(tr);
  ta.spec.add(tr);
  tr->add_option("--d", ta.d, "Embedding dimension")->capture_default_str();
  tr->add_option("--lr", ta.lr, "Learning rate")->capture_default_str();
  tr->add_option("--epochs", ta.epochs)->capture_default_str();
  tr->add_option("--batch-size", ta.batch_size, "0 for full batch")->capture_default_str();
  tr->add_option("--ridge-lambda", ta.ridge_lambda)->capture_default_str();
  tr->add_option("--logit-lambda", ta.logit_lambda)->capture_default_str();
  tr->add_flag("--lambda-per-n", ta.lambda_per_n,
               "Read lambdas per sample and normalize the loss by 1/n");
  tr->add_option("--ridge-decay-factor", ta.decay_factor)->capture_default_str();
  tr->add_option("--ridge-decay-every", ta.decay_every, "Epochs between decays, 0 disables")
      ->capture_default_str();
  tr->add_option("--ridge-decay-floor", ta.decay_floor, "Raw units")->capture_default_str();
  tr->add_option("--seed", ta.seed)->capture_default_str();
  tr->add_option("--init-scale", ta.init_scale)->capture_default_str();
  tr->add_option("--out", ta.out, "Trace CSV path, '-' for stdout")->capture_default_str();
  tr->add_option("--summary", ta.summary, "Summary JSON path (default <out>.json)");

  SolveArgs so;
  CLI::App* sol = app.add_subcommand("solve", "Nuclear-norm regularized CE solve");
  with_config(sol);
  so.spec.add(sol);
  sol->add_option("--lambda", so.lambda)->capture_default_str();
  sol->add_flag("--lambda-per-n", so.lambda_per_n, "Interpret --lambda per sample");
  sol->add_option("--tol", so.tol)->capture_default_str();
  sol->add_option("--max-iterations", so.max_iterations)->capture_default_str();
  sol->add_option("--out", so.out, "JSON path, '-' for stdout")->capture_default_str();
  sol->add_option("--z-out", so.z_out, "CSV path for the solution matrix");

  RegpathArgs ra;
  CLI::App* rp = app.add_subcommand("regpath", "Warm-started regularization path");
  with_config(rp);
  ra.spec.add(rp);
  rp->add_option("--R-list", ra.Rs, "Several imbalance ratios (overrides --R)");
  rp->add_option("--lambdas", ra.lambdas, "Strictly decreasing grid")->capture_default_str();
  rp->add_flag("--lambda-per-n", ra.lambda_per_n, "Interpret --lambdas per sample");
  rp->add_option("--tol", ra.tol)->capture_default_str();
  rp->add_option("--max-iterations", ra.max_iterations)->capture_default_str();
  rp->add_option("--out", ra.out, "CSV path, '-' for stdout")->capture_default_str();
  rp->add_option("--jobs", ra.jobs, "Worker threads")->capture_default_str();

  VerifyArgs va;
  CLI::App* ver = app.add_subcommand("verify", "Run the invariant battery");
  with_config(ver);
  ver->add_option("--out", va.out, "JSON report path, '-' for stdout")->capture_default_str();
  ver->add_flag("--inject-sign-flip", va.inject_sign_flip,
                "Flip one SEL entry before the certificate check");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) apply_json_config(app.get_subcommands().front(), config_path);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*geo) return cmd_geometry(ga);
    if (*svd) return cmd_svd(sa);
    if (*tr) return cmd_train(ta);
    if (*sol) return cmd_solve(so);
    if (*rp) return cmd_regpath(ra);
    if (*ver) return cmd_verify(va);
  } catch (const std::exception& e) {
    std::cerr << "seli: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"seli"};
  for (const std::string& s : args) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace seli::cli
