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

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Data-parallel inner loops of the raster pipeline. Every operation has a
// scalar reference implementation and may have ISA-specific variants that are
// required to produce bit-identical results (no FMA contraction anywhere, same
// operation order per element). The active set is picked once at startup from
// CPU capabilities and can be pinned with the EVC_KERNELS environment variable
// ("scalar", "avx2").

namespace evc::kernels {

// Multiband samples are band-sequential: band b of pixel i is
// samples[b * n_pixels + i].

// out[i] = (float) sum_b weights[b] * (double)samples[b*n+i]
using WeightedPlaneFn = void (*)(const std::uint16_t* samples, std::size_t n_pixels,
                                 std::size_t bands, const double* weights, float* out);

// Roberts gradient magnitude |p(r,c)-p(r+1,c+1)| + |p(r+1,c)-p(r,c+1)| for
// every pixel with a complete forward 2x2 window; last row and column are 0.
using RobertsPlaneFn = void (*)(const float* plane, std::size_t width, std::size_t height,
                                float* out);

// Min and max over n >= 1 samples.
using MinMaxU16Fn = void (*)(const std::uint16_t* v, std::size_t n,
                             std::uint16_t* mn, std::uint16_t* mx);

// Per-pixel Gaussian discriminant: with d_b = (double)samples[b*n+i] - mean[b],
// out[i] = log_const - 0.5 * sum_i d_i * (sum_j inv_cov[i*bands+j] * d_j).
using GaussScorePlaneFn = void (*)(const std::uint16_t* samples, std::size_t n_pixels,
                                   std::size_t bands, const double* mean,
                                   const double* inv_cov, double log_const, double* out);

// Running argmax across class score planes:
// where scores[i] > best[i], set best[i] = scores[i] and best_id[i] = id.
// Strict '>' keeps the earlier (lower) id on exact ties.
using ArgmaxMergeFn = void (*)(const double* scores, std::size_t n, std::int32_t id,
                               double* best, std::int32_t* best_id);

struct KernelSet {
  const char* name;
  WeightedPlaneFn weighted_plane;
  RobertsPlaneFn roberts_plane;
  MinMaxU16Fn minmax_u16;
  GaussScorePlaneFn gauss_score_plane;
  ArgmaxMergeFn argmax_merge;
};

/// The scalar reference set. Always available.
const KernelSet& scalar();

/// All kernel sets usable on this machine (scalar first).
const std::vector<const KernelSet*>& available();

/// The set selected for this process: the widest available ISA, unless the
/// EVC_KERNELS environment variable pins one by name.
const KernelSet& active();

}  // namespace evc::kernels
