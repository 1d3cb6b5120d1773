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

#include <cmath>

#include "seli/kernels.hpp"

namespace seli::kernels::scalar {
namespace {

struct ColumnStats {
  double max;
  int argmax;
  double rest;  // sum of exp(z_c - max) over c != argmax
};

inline ColumnStats column_stats(const double* z, int k) {
  ColumnStats s{z[0], 0, 0.0};
  for (int c = 1; c < k; ++c) {
    if (z[c] > s.max) {
      s.max = z[c];
      s.argmax = c;
    }
  }
  for (int c = 0; c < k; ++c) {
    if (c != s.argmax) s.rest += std::exp(z[c] - s.max);
  }
  return s;
}

}  // namespace

double ce_loss(std::span<const double> z, std::span<const int> labels, int k) {
  double total = 0.0;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double* col = z.data() + i * k;
    const ColumnStats s = column_stats(col, k);
    // log(sum_c exp(z_c - z_y)) split so that tiny losses keep their digits.
    total += (s.max - col[labels[i]]) + std::log1p(s.rest);
  }
  return total;
}

double ce_loss_grad(std::span<const double> z, std::span<const int> labels,
                    int k, std::span<double> grad) {
  double total = 0.0;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double* col = z.data() + i * k;
    double* g = grad.data() + i * k;
    const int y = labels[i];
    const ColumnStats s = column_stats(col, k);
    total += (s.max - col[y]) + std::log1p(s.rest);

    const double inv = 1.0 / (1.0 + s.rest);
    double off = 0.0;
    for (int c = 0; c < k; ++c) {
      if (c == y) continue;
      g[c] = (c == s.argmax ? 1.0 : std::exp(col[c] - s.max)) * inv;
      off += g[c];
    }
    // p_y - 1 == -(sum of the other probabilities); exact column sums.
    g[y] = -off;
  }
  return total;
}

}  // namespace seli::kernels::scalar
