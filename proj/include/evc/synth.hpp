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

#include <cstdint>
#include <string>
#include <vector>

#include "evc/belief.hpp"
#include "evc/raster.hpp"

// Deterministic synthetic multispectral scenes: a jittered rectangular field
// grid, one class per field from a balanced seeded deck, per-class per-band
// means, optional mixed-boundary averaging, and seeded Gaussian noise.

namespace evc {

struct SceneSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t bands = 4;
  Frame frame{std::vector<std::string>{"C1"}};
  int grid_rows = 8;
  int grid_cols = 8;
  // Interior grid lines move by a seeded offset in [-boundary_jitter,
  // +boundary_jitter] so field sizes vary instead of collapsing into a single
  // histogram bin.
  int boundary_jitter = 3;
  std::vector<std::vector<double>> class_means;  // [class][band]
  double noise_sigma = 0.0;
  // Pixels whose 4-neighborhood crosses into a differently classed field take
  // the average of the distinct adjoining class means before noise.
  bool mixed_boundary = false;
  std::uint64_t seed = 1;
};

/// The calibrated desk-scale scene: 128x128, 4 bands, 8 classes on a jittered
/// 8x8 grid with mixed boundaries, sized so the Bayes baseline lands in the
/// regime where contextual evidence visibly helps.
SceneSpec desk_default();

std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const std::string& text);

struct Scene {
  Raster raster;
  LabelMap truth;
};

/// Deterministic for a fixed spec. One mt19937_64 stream seeded with
/// spec.seed is consumed in this order: interior row-line offsets (skipped
/// when boundary_jitter is 0), interior column-line offsets, the Fisher-Yates
/// shuffle of the balanced class deck, then two draws per sample (Box-Muller,
/// first component) band by band in raster order (skipped when noise_sigma is
/// 0). Truth labels are the owning field's class; boundary mixing only alters
/// raster values.
Scene generate_scene(const SceneSpec& spec);

}  // namespace evc
