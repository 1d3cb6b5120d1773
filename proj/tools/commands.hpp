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

namespace seli::cli {

inline constexpr int kSchemaVersion = 1;

inline constexpr const char* kGeometryHeader =
    "k,R,norm_w_maj2,norm_w_min2,norm_h_maj2,norm_h_min2,cos_w_majmaj,cos_w_minmin,"
    "cos_w_majmin,cos_h_majmaj,cos_h_minmin,cos_h_majmin,align_maj,align_min";
inline constexpr const char* kTrainHeader =
    "epoch,objective,lambda,dist_seli_w,dist_seli_h,dist_seli_z,dist_etf_w,dist_etf_h,"
    "dist_etf_z,nc_error,norm_ratio_w,norm_ratio_h,min_margin";
inline constexpr const char* kRegpathHeader =
    "k,R,lambda,lambda_per_n,zero_solution,converged,direction_distance,min_margin,"
    "dist_etf_w,dist_etf_h,dist_etf_z,kkt_residual";

/// 17 significant digits, '.' decimal point, "nan"/"inf" for non-finite.
std::string fmt(double v);

/// Parses and dispatches `seli <subcommand> ...`; returns the exit status.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace seli::cli
