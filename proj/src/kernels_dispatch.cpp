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

#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "seli/kernels.hpp"

namespace seli::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(SELI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void check_sizes(std::span<const double> z, std::span<const int> labels, int k) {
  if (k < 1 || z.size() != labels.size() * static_cast<std::size_t>(k)) {
    throw std::invalid_argument("kernel: logit block does not match labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= k) throw std::invalid_argument("kernel: label out of range");
  }
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Isa detected_isa() {
  static const Isa isa = [] {
    const char* force = std::getenv("SELI_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0) return Isa::scalar;
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

double ce_loss(std::span<const double> z, std::span<const int> labels, int k,
               Isa isa) {
  check_sizes(z, labels, k);
#if defined(SELI_HAVE_AVX2)
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) {
    return avx2::ce_loss(z, labels, k);
  }
#endif
  return scalar::ce_loss(z, labels, k);
}

double ce_loss_grad(std::span<const double> z, std::span<const int> labels,
                    int k, std::span<double> grad, Isa isa) {
  check_sizes(z, labels, k);
  if (grad.size() != z.size()) {
    throw std::invalid_argument("kernel: gradient block has the wrong size");
  }
#if defined(SELI_HAVE_AVX2)
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) {
    return avx2::ce_loss_grad(z, labels, k, grad);
  }
#endif
  return scalar::ce_loss_grad(z, labels, k, grad);
}

}  // namespace seli::kernels
