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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using seli::cli::run_cli;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("seli_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(SELI_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("fmt keeps 17 significant digits") {
  CHECK(seli::cli::fmt(0.1) == "0.10000000000000001");
  CHECK(seli::cli::fmt(-2.0) == "-2");
  CHECK(seli::cli::fmt(NAN) == "nan");
  CHECK(std::stod(seli::cli::fmt(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("geometry csv") {
  const fs::path out = scratch() / "geometry.csv";
  REQUIRE(run_cli({"geometry", "--k", "2", "4", "10", "20", "--R", "1", "7", "10", "--out",
                   out.string(), "--jobs", "3"}) == 0);
  const auto rows = csv(out);
  REQUIRE(rows.size() == 1 + 4 * 3);
  CHECK(slurp(out).substr(0, slurp(out).find('\n')) == seli::cli::kGeometryHeader);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    REQUIRE(rows[r].size() == 14);
    const int k = std::stoi(rows[r][0]);
    const double R = std::stod(rows[r][1]);
    if (R == 1.0 && k > 2) {
      for (int col : {6, 7, 9, 10}) CHECK(std::stod(rows[r][col]) == doctest::Approx(-1.0 / (k - 1)));
    }
    if (R == 7.0 && k > 2) CHECK(std::stod(rows[r][7]) == 0.0);
  }
  const auto meta = nlohmann::json::parse(slurp(out.string() + ".json"));
  CHECK(meta["schema_version"] == seli::cli::kSchemaVersion);
  CHECK(meta["rows"] == 12);
}

TEST_CASE("geometry default grid and validation") {
  const fs::path out = scratch() / "geometry_default.csv";
  REQUIRE(run_cli({"geometry", "--num-R", "25", "--out", out.string()}) == 0);
  CHECK(csv(out).size() == 1 + 4 * 25);
  CHECK(run_cli({"geometry", "--k", "3", "--out", out.string()}) != 0);
  CHECK(run_cli({"geometry", "--R-min", "0.5", "--out", out.string()}) != 0);
}

TEST_CASE("svd json") {
  const fs::path out = scratch() / "svd.json";
  const fs::path dir = scratch() / "factors";
  fs::create_directories(dir);
  REQUIRE(run_cli({"svd", "--k", "4", "--R", "10", "--out", out.string(), "--factors-dir",
                   dir.string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["reconstruction_residual"].get<double>() < 1e-12);
  CHECK(j["certificate"]["min_sign_product"].get<double>() > 0.0);
  CHECK(j["nuclear_norm"].get<double>() == doctest::Approx(6.507485540080094));
  CHECK(csv(dir / "U.csv").size() == 22);
}

TEST_CASE("train csv is reproducible byte for byte") {
  const fs::path a = scratch() / "train_a.csv";
  const fs::path b = scratch() / "train_b.csv";
  const std::vector<std::string> common{"train", "--k", "4", "--R", "3", "--d", "4",
                                        "--epochs", "150", "--lr", "0.4", "--batch-size", "4",
                                        "--seed", "9"};
  auto with_out = [&](const fs::path& p) {
    std::vector<std::string> v = common;
    v.insert(v.end(), {"--out", p.string()});
    return v;
  };
  REQUIRE(run_cli(with_out(a)) == 0);
  REQUIRE(run_cli(with_out(b)) == 0);
  CHECK(slurp(a) == slurp(b));
  const auto rows = csv(a);
  CHECK(rows.front().size() == 13);
  CHECK(rows[1][0] == "0");
  CHECK(rows.back()[0] == "150");
  const auto summary = nlohmann::json::parse(slurp(a.string() + ".json"));
  CHECK(summary["status"] == "completed");
  CHECK(summary["config"]["seed"] == 9);
}

TEST_CASE("json config with flag override") {
  const fs::path cfg = scratch() / "train.json";
  std::ofstream(cfg) << R"({"k": 4, "R": 3, "d": 4, "epochs": 20, "lr": 0.1,
                           "ridge_lambda": 1e-3, "lambda_per_n": true, "seed": 1})";
  const fs::path out = scratch() / "train_cfg.csv";
  REQUIRE(run_cli({"train", "--config", cfg.string(), "--epochs", "5", "--out", out.string()}) == 0);
  const auto summary = nlohmann::json::parse(slurp(out.string() + ".json"));
  CHECK(summary["config"]["epochs"] == 5);
  CHECK(summary["config"]["lambda_per_n"] == true);
  CHECK(summary["config"]["ridge_lambda"].get<double>() == 1e-3);
  CHECK(csv(out).back()[0] == "5");
  CHECK(std::stod(csv(out)[1][2]) == 1e-3);
}

TEST_CASE("solve and regpath") {
  const fs::path s = scratch() / "solve.json";
  REQUIRE(run_cli({"solve", "--k", "4", "--R", "10", "--lambda", "0.4", "--out", s.string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(s));
  CHECK(j["converged"] == true);
  CHECK(j["min_margin"].get<double>() > 0.0);

  const fs::path p = scratch() / "regpath.csv";
  REQUIRE(run_cli({"regpath", "--k", "4", "--R-list", "10", "100", "--lambdas", "4", "1", "0.3",
                   "0.1", "--out", p.string(), "--jobs", "2"}) == 0);
  const auto rows = csv(p);
  REQUIRE(rows.size() == 1 + 2 * 4);
  CHECK(rows[1][1] == "10");
  CHECK(rows[5][1] == "100");
  CHECK(rows[1][4] == "1");  // lambda = 4 >= sqrt(10): zero solution
  CHECK(rows[2][4] == "0");
  for (int r : {3, 4, 7, 8}) CHECK(std::stod(rows[r][7]) > 0.0);
  CHECK(run_cli({"regpath", "--lambdas", "0.1", "0.3", "--out", p.string()}) != 0);
}

TEST_CASE("binary exit codes") {
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("") != 0);
  CHECK(run_binary("geometry --k") != 0);
  CHECK(run_binary("geometry -k 4") != 0);
  const fs::path v = scratch() / "verify_flip.json";
  CHECK(run_binary("verify --inject-sign-flip --out " + v.string()) == 1);
  const auto j = nlohmann::json::parse(slurp(v));
  bool saw = false;
  for (const auto& c : j["checks"]) {
    if (c["name"] == "certificate_sign") {
      saw = true;
      CHECK(c["pass"] == false);
      CHECK(c["where"].contains("example"));
      CHECK(c["where"].contains("k"));
    }
  }
  CHECK(saw);
}
