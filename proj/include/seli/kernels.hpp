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

#include <span>
#include <string_view>

// Column-wise softmax cross-entropy kernels over a column-major k x n logit
// block. Every kernel has a portable scalar reference; wider variants are
// picked at runtime from what the CPU reports and must agree with the
// reference to a few ulps.

namespace seli::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best variant this process can run. Honors SELI_FORCE_SCALAR=1.
Isa detected_isa();

/// True if the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// Loss summed over columns. `labels[i]` indexes the true class of column i.
double ce_loss(std::span<const double> z, std::span<const int> labels, int k,
               Isa isa = detected_isa());

/// Writes softmax(z_i) - e_{y_i} into `grad` (same layout as z) and returns
/// the summed loss.
double ce_loss_grad(std::span<const double> z, std::span<const int> labels,
                    int k, std::span<double> grad, Isa isa = detected_isa());

namespace scalar {
double ce_loss(std::span<const double> z, std::span<const int> labels, int k);
double ce_loss_grad(std::span<const double> z, std::span<const int> labels,
                    int k, std::span<double> grad);
}  // namespace scalar

#if defined(SELI_HAVE_AVX2)
namespace avx2 {
double ce_loss(std::span<const double> z, std::span<const int> labels, int k);
double ce_loss_grad(std::span<const double> z, std::span<const int> labels,
                    int k, std::span<double> grad);
}  // namespace avx2
#endif

}  // namespace seli::kernels
