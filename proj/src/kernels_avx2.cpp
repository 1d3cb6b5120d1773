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

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "seli/kernels.hpp"

// Four columns per iteration, one class row at a time. Logit columns are k
// apart in memory, so rows are gathered. exp() is a Cephes-style rational
// approximation; arguments are always <= 0 after the max shift.

namespace seli::kernels::avx2 {
namespace {

constexpr int kLanes = 4;

inline __m256d exp_nonpositive(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_max_pd(lo, x);  // NaN propagates through the second operand

  const __m256d fx = _mm256_round_pd(
      _mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125E-1), x);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212E-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878E-4), xx,
                               _mm256_set1_pd(3.02994407707441961300E-2));
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042E-6), xx,
                               _mm256_set1_pd(2.52448340349684104192E-3));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

  // 2^fx assembled in the exponent field; fx >= -1021 after the clamp.
  const __m128i n32 = _mm256_cvtpd_epi32(fx);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
  return _mm256_andnot_pd(underflow, r);
}

struct Block {
  __m256i base;   // (i + lane) * k
  __m256d max;
  __m256d argmax;  // class index, as double
  __m256d zy;
  __m256d rest;
  __m256d label;   // true class, as double
};

inline __m256d gather_row(const double* z, __m256i base, int c) {
  return _mm256_i64gather_pd(z, _mm256_add_epi64(base, _mm256_set1_epi64x(c)),
                             8);
}

inline Block scan_block(const double* z, const int* labels, std::size_t i,
                        int k) {
  Block b;
  const __m256i lane = _mm256_setr_epi64x(0, 1, 2, 3);
  b.base = _mm256_mul_epu32(_mm256_add_epi64(_mm256_set1_epi64x(i), lane),
                            _mm256_set1_epi64x(k));
  const __m128i y32 =
      _mm_loadu_si128(reinterpret_cast<const __m128i*>(labels + i));
  const __m256i y64 = _mm256_cvtepi32_epi64(y32);
  b.label = _mm256_cvtepi32_pd(y32);
  b.zy = _mm256_i64gather_pd(z, _mm256_add_epi64(b.base, y64), 8);

  b.max = gather_row(z, b.base, 0);
  b.argmax = _mm256_setzero_pd();
  for (int c = 1; c < k; ++c) {
    const __m256d v = gather_row(z, b.base, c);
    const __m256d gt = _mm256_cmp_pd(v, b.max, _CMP_GT_OQ);
    b.max = _mm256_blendv_pd(b.max, v, gt);
    b.argmax = _mm256_blendv_pd(b.argmax, _mm256_set1_pd(c), gt);
  }
  b.rest = _mm256_setzero_pd();
  for (int c = 0; c < k; ++c) {
    const __m256d e =
        exp_nonpositive(_mm256_sub_pd(gather_row(z, b.base, c), b.max));
    const __m256d is_max = _mm256_cmp_pd(b.argmax, _mm256_set1_pd(c), _CMP_EQ_OQ);
    b.rest = _mm256_add_pd(b.rest, _mm256_andnot_pd(is_max, e));
  }
  return b;
}

inline double block_loss(const Block& b) {
  alignas(32) double m[kLanes], zy[kLanes], rest[kLanes];
  _mm256_store_pd(m, b.max);
  _mm256_store_pd(zy, b.zy);
  _mm256_store_pd(rest, b.rest);
  double total = 0.0;
  for (int l = 0; l < kLanes; ++l) total += (m[l] - zy[l]) + std::log1p(rest[l]);
  return total;
}

}  // namespace

double ce_loss(std::span<const double> z, std::span<const int> labels, int k) {
  const std::size_t n = labels.size();
  const std::size_t full = n - n % kLanes;
  double total = 0.0;
  for (std::size_t i = 0; i < full; i += kLanes) {
    total += block_loss(scan_block(z.data(), labels.data(), i, k));
  }
  if (full < n) {
    total += scalar::ce_loss(z.subspan(full * k), labels.subspan(full), k);
  }
  return total;
}

double ce_loss_grad(std::span<const double> z, std::span<const int> labels,
                    int k, std::span<double> grad) {
  const std::size_t n = labels.size();
  const std::size_t full = n - n % kLanes;
  double total = 0.0;
  alignas(32) double p[kLanes], off[kLanes];
  alignas(32) std::int64_t base[kLanes];
  for (std::size_t i = 0; i < full; i += kLanes) {
    const Block b = scan_block(z.data(), labels.data(), i, k);
    total += block_loss(b);
    _mm256_store_si256(reinterpret_cast<__m256i*>(base), b.base);

    const __m256d inv =
        _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_add_pd(_mm256_set1_pd(1.0), b.rest));
    __m256d off_sum = _mm256_setzero_pd();
    for (int c = 0; c < k; ++c) {
      const __m256d cc = _mm256_set1_pd(c);
      const __m256d is_max = _mm256_cmp_pd(b.argmax, cc, _CMP_EQ_OQ);
      const __m256d is_true = _mm256_cmp_pd(b.label, cc, _CMP_EQ_OQ);
      __m256d e = exp_nonpositive(_mm256_sub_pd(gather_row(z.data(), b.base, c), b.max));
      e = _mm256_blendv_pd(e, _mm256_set1_pd(1.0), is_max);
      const __m256d prob = _mm256_mul_pd(e, inv);
      off_sum = _mm256_add_pd(off_sum, _mm256_andnot_pd(is_true, prob));
      _mm256_store_pd(p, prob);
      for (int l = 0; l < kLanes; ++l) {
        if (labels[i + l] != c) grad[base[l] + c] = p[l];
      }
    }
    _mm256_store_pd(off, off_sum);
    for (int l = 0; l < kLanes; ++l) grad[base[l] + labels[i + l]] = -off[l];
  }
  if (full < n) {
    total += scalar::ce_loss_grad(z.subspan(full * k), labels.subspan(full), k,
                                  grad.subspan(full * k));
  }
  return total;
}

}  // namespace seli::kernels::avx2
