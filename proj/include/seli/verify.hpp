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

#include <string>
#include <vector>

#include <json.hpp>

namespace seli {

/// One verification check: `worst` is the worst residual over the check's
/// grid, `where` its grid coordinates.
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double threshold = 0.0;
  nlohmann::json where = nlohmann::json::object();
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Flips the sign of one SEL entry before the certificate check.
  bool inject_sign_flip = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

VerifyReport run_verify(const VerifyOptions& opts = {});

/// STEP grids used by the battery.
struct GridPoint {
  int k;
  double R;
  double rho;
};
std::vector<GridPoint> svd_grid();

}  // namespace seli
