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

// Scalar reference kernels. These define the arithmetic contract: every other
// ISA variant must reproduce them bit for bit. Keep the per-element operation
// order in sync with the vector implementations and do not introduce FMA
// (this translation unit is built with -ffp-contract=off).

#include "evc/kernels.hpp"

#include <cmath>
#include <vector>

namespace evc::kernels {

namespace {

void weighted_plane_scalar(const std::uint16_t* samples, std::size_t n, std::size_t bands,
                           const double* weights, float* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
      acc += weights[b] * static_cast<double>(samples[b * n + i]);
    }
    out[i] = static_cast<float>(acc);
  }
}

void roberts_plane_scalar(const float* plane, std::size_t w, std::size_t h, float* out) {
  if (w == 0 || h == 0) return;
  for (std::size_t r = 0; r + 1 < h; ++r) {
    const float* row0 = plane + r * w;
    const float* row1 = row0 + w;
    float* o = out + r * w;
    for (std::size_t c = 0; c + 1 < w; ++c) {
      o[c] = std::fabs(row0[c] - row1[c + 1]) + std::fabs(row1[c] - row0[c + 1]);
    }
    o[w - 1] = 0.0f;
  }
  float* last = out + (h - 1) * w;
  for (std::size_t c = 0; c < w; ++c) last[c] = 0.0f;
}

void minmax_u16_scalar(const std::uint16_t* v, std::size_t n,
                       std::uint16_t* mn, std::uint16_t* mx) {
  std::uint16_t lo = v[0];
  std::uint16_t hi = v[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] < lo) lo = v[i];
    if (v[i] > hi) hi = v[i];
  }
  *mn = lo;
  *mx = hi;
}

void gauss_score_plane_scalar(const std::uint16_t* samples, std::size_t n, std::size_t bands,
                              const double* mean, const double* inv_cov, double log_const,
                              double* out) {
  std::vector<double> diff(bands);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < bands; ++b) {
      diff[b] = static_cast<double>(samples[b * n + i]) - mean[b];
    }
    double q = 0.0;
    for (std::size_t r = 0; r < bands; ++r) {
      double inner = 0.0;
      const double* row = inv_cov + r * bands;
      for (std::size_t c = 0; c < bands; ++c) {
        inner += row[c] * diff[c];
      }
      q += diff[r] * inner;
    }
    out[i] = log_const - 0.5 * q;
  }
}

void argmax_merge_scalar(const double* scores, std::size_t n, std::int32_t id,
                         double* best, std::int32_t* best_id) {
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i] > best[i]) {
      best[i] = scores[i];
      best_id[i] = id;
    }
  }
}

}  // namespace

const KernelSet& scalar() {
  static const KernelSet set{
      "scalar",          weighted_plane_scalar, roberts_plane_scalar,
      minmax_u16_scalar, gauss_score_plane_scalar, argmax_merge_scalar,
  };
  return set;
}

}  // namespace evc::kernels
