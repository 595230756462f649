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

#include <map>
#include <string>
#include <vector>

#include "evc/raster.hpp"
#include "evc/regions.hpp"

// Spatial feature extractors producing a per-region feature vector: size,
// Roberts edge-density texture, minimum-bounding-rectangle shape measures
// (FIT, ELONG, DIREC), compactness, per-band spectral means, and neighbor
// class counts.

namespace evc {

struct RegionFeatures {
  std::size_t size = 0;
  double texture = 0.0;      // edge density in [0,1]
  double fit = 0.0;          // region area / MBR area, in (0,1]
  double elong = 1.0;        // MBR long side / short side, >= 1
  double direc = 0.0;        // MBR long-side orientation in [0,90) degrees
  double compactness = 0.0;  // 4*pi*area/perimeter^2
  std::vector<double> spectral_mean;       // one entry per band
  std::map<int, int> neighbor_class_counts;  // class id -> adjacent-region count
};

struct FeatureConfig {
  // Weights of the multiband reduction behind the Roberts gradient; empty
  // means the plain average of all bands.
  std::vector<double> band_weights;
  // Gradient threshold; negative means 10% of the raster's global intensity
  // range.
  double texture_threshold = -1.0;
};

/// Per-raster precomputation shared by every region: the band-weighted
/// intensity plane, its Roberts gradient plane, and the resolved threshold.
class FeatureContext {
 public:
  FeatureContext(const Raster& raster, const FeatureConfig& config);

  const Raster& raster() const { return *raster_; }
  const std::vector<float>& gradient() const { return gradient_; }
  double threshold() const { return threshold_; }

 private:
  const Raster* raster_;
  std::vector<float> gradient_;
  double threshold_;
};

/// Fraction of region pixels with a complete forward 2x2 window whose Roberts
/// gradient exceeds the threshold; 0 when no window is complete.
double roberts_edge_density(const FeatureContext& ctx, const Region& region);
double roberts_edge_density(const Raster& raster, const Region& region,
                            const std::vector<double>& band_weights, double threshold);

struct MbrResult {
  double fit = 0.0;
  double elong = 1.0;
  double direc = 0.0;
  double length = 0.0;  // longer rectangle side
  double width = 0.0;   // shorter rectangle side
};

/// Grid search over rotations 0..89 degrees: pixel centers are rotated by
/// -theta and boxed with extents (max-min)+1 per axis; FIT is maximized, ties
/// keep the smallest angle. DIREC is the argmax angle (long-side orientation
/// folded into [0,90)).
MbrResult min_bounding_rect(const Region& region);

/// 4*pi*area/perimeter^2 with perimeter counted in unit edges between region
/// and non-region cells (the image border counts as non-region).
double compactness(const Region& region);

/// Per-band arithmetic mean of intensities over the region pixels.
std::vector<double> spectral_mean(const Raster& raster, const Region& region);

/// Counts of adjacent regions keyed by their current class hypothesis.
std::map<int, int> neighbor_class_feature(const Region& region, const AdjacencyGraph& graph,
                                          const std::map<int, int>& current_labels);

RegionFeatures extract_features(const FeatureContext& ctx, const Region& region,
                                const AdjacencyGraph& graph,
                                const std::map<int, int>& current_labels);

/// Scalar feature ids in fixed order: size, texture, fit, elong, direc,
/// compactness, mean_b0..mean_b{bands-1}.
std::vector<std::string> scalar_feature_ids(std::size_t bands);

/// Value of one scalar feature by id.
double scalar_feature(const RegionFeatures& features, const std::string& feature_id);

/// CSV with columns id, class, size, texture, fit, elong, direc, compactness,
/// mean_b0..bN, then one neighbor-count column per frame class.
std::string features_to_csv(const std::map<int, Region>& regions,
                            const std::map<int, RegionFeatures>& features, const Frame& frame);

}  // namespace evc
