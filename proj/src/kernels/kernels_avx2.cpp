// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 kernel variants. Bit-identical to the scalar reference: per lane the
// same IEEE operations run in the same order, multiplies and adds stay
// separate instructions (no FMA; this translation unit is also built with
// -ffp-contract=off), and tails fall back to the reference expressions.

#include "evc/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <vector>

namespace evc::kernels {

namespace {

// 4 u16 samples -> 4 doubles (exact for the u16 range).
inline __m256d load4_u16_as_pd(const std::uint16_t* p) {
  __m128i raw = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(p));
  __m128i u32 = _mm_cvtepu16_epi32(raw);
  return _mm256_cvtepi32_pd(u32);
}

void weighted_plane_avx2(const std::uint16_t* samples, std::size_t n, std::size_t bands,
                         const double* weights, float* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t b = 0; b < bands; ++b) {
      __m256d s = load4_u16_as_pd(samples + b * n + i);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(weights[b]), s));
    }
    _mm_storeu_ps(out + i, _mm256_cvtpd_ps(acc));
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
      acc += weights[b] * static_cast<double>(samples[b * n + i]);
    }
    out[i] = static_cast<float>(acc);
  }
}

void roberts_plane_avx2(const float* plane, std::size_t w, std::size_t h, float* out) {
  if (w == 0 || h == 0) return;
  const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  for (std::size_t r = 0; r + 1 < h; ++r) {
    const float* row0 = plane + r * w;
    const float* row1 = row0 + w;
    float* o = out + r * w;
    std::size_t c = 0;
    for (; c + 9 <= w; c += 8) {
      __m256 a = _mm256_sub_ps(_mm256_loadu_ps(row0 + c), _mm256_loadu_ps(row1 + c + 1));
      __m256 b = _mm256_sub_ps(_mm256_loadu_ps(row1 + c), _mm256_loadu_ps(row0 + c + 1));
      __m256 g = _mm256_add_ps(_mm256_and_ps(a, abs_mask), _mm256_and_ps(b, abs_mask));
      _mm256_storeu_ps(o + c, g);
    }
    for (; c + 1 < w; ++c) {
      o[c] = std::fabs(row0[c] - row1[c + 1]) + std::fabs(row1[c] - row0[c + 1]);
    }
    o[w - 1] = 0.0f;
  }
  float* last = out + (h - 1) * w;
  for (std::size_t c = 0; c < w; ++c) last[c] = 0.0f;
}

void minmax_u16_avx2(const std::uint16_t* v, std::size_t n,
                     std::uint16_t* mn, std::uint16_t* mx) {
  std::uint16_t lo = v[0];
  std::uint16_t hi = v[0];
  std::size_t i = 0;
  if (n >= 16) {
    __m256i lo_v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v));
    __m256i hi_v = lo_v;
    for (i = 16; i + 16 <= n; i += 16) {
      __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
      lo_v = _mm256_min_epu16(lo_v, x);
      hi_v = _mm256_max_epu16(hi_v, x);
    }
    alignas(32) std::uint16_t lanes[16];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), lo_v);
    for (std::uint16_t lane : lanes) {
      if (lane < lo) lo = lane;
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), hi_v);
    for (std::uint16_t lane : lanes) {
      if (lane > hi) hi = lane;
    }
  }
  for (; i < n; ++i) {
    if (v[i] < lo) lo = v[i];
    if (v[i] > hi) hi = v[i];
  }
  *mn = lo;
  *mx = hi;
}

void gauss_score_plane_avx2(const std::uint16_t* samples, std::size_t n, std::size_t bands,
                            const double* mean, const double* inv_cov, double log_const,
                            double* out) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d lc = _mm256_set1_pd(log_const);
  std::vector<double> diff(bands * 4);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t b = 0; b < bands; ++b) {
      __m256d s = load4_u16_as_pd(samples + b * n + i);
      _mm256_storeu_pd(diff.data() + b * 4, _mm256_sub_pd(s, _mm256_set1_pd(mean[b])));
    }
    __m256d q = _mm256_setzero_pd();
    for (std::size_t r = 0; r < bands; ++r) {
      __m256d inner = _mm256_setzero_pd();
      const double* row = inv_cov + r * bands;
      for (std::size_t c = 0; c < bands; ++c) {
        __m256d d = _mm256_loadu_pd(diff.data() + c * 4);
        inner = _mm256_add_pd(inner, _mm256_mul_pd(_mm256_set1_pd(row[c]), d));
      }
      __m256d dr = _mm256_loadu_pd(diff.data() + r * 4);
      q = _mm256_add_pd(q, _mm256_mul_pd(dr, inner));
    }
    _mm256_storeu_pd(out + i, _mm256_sub_pd(lc, _mm256_mul_pd(half, q)));
  }
  for (; i < n; ++i) {
    double q = 0.0;
    for (std::size_t r = 0; r < bands; ++r) {
      double inner = 0.0;
      const double* row = inv_cov + r * bands;
      for (std::size_t c = 0; c < bands; ++c) {
        inner += row[c] * (static_cast<double>(samples[c * n + i]) - mean[c]);
      }
      q += (static_cast<double>(samples[r * n + i]) - mean[r]) * inner;
    }
    out[i] = log_const - 0.5 * q;
  }
}

void argmax_merge_avx2(const double* scores, std::size_t n, std::int32_t id,
                       double* best, std::int32_t* best_id) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_loadu_pd(scores + i);
    __m256d b = _mm256_loadu_pd(best + i);
    __m256d gt = _mm256_cmp_pd(s, b, _CMP_GT_OQ);
    int bits = _mm256_movemask_pd(gt);
    if (bits == 0) continue;
    _mm256_storeu_pd(best + i, _mm256_blendv_pd(b, s, gt));
    if (bits & 1) best_id[i] = id;
    if (bits & 2) best_id[i + 1] = id;
    if (bits & 4) best_id[i + 2] = id;
    if (bits & 8) best_id[i + 3] = id;
  }
  for (; i < n; ++i) {
    if (scores[i] > best[i]) {
      best[i] = scores[i];
      best_id[i] = id;
    }
  }
}

}  // namespace

const KernelSet& avx2();

const KernelSet& avx2() {
  static const KernelSet set{
      "avx2",          weighted_plane_avx2, roberts_plane_avx2,
      minmax_u16_avx2, gauss_score_plane_avx2, argmax_merge_avx2,
  };
  return set;
}

}  // namespace evc::kernels
