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

#include "evc/features.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "evc/common.hpp"
#include "evc/kernels.hpp"

namespace evc {

FeatureContext::FeatureContext(const Raster& raster, const FeatureConfig& config)
    : raster_(&raster) {
  const std::size_t n = raster.pixels();
  std::vector<double> weights = config.band_weights;
  if (weights.empty()) {
    weights.assign(raster.bands, 1.0 / static_cast<double>(raster.bands));
  } else if (weights.size() != raster.bands) {
    throw Error("band_weights length " + std::to_string(weights.size()) + " does not match " +
                std::to_string(raster.bands) + " bands");
  }

  const auto& k = kernels::active();
  std::vector<float> plane(n);
  k.weighted_plane(raster.samples.data(), n, raster.bands, weights.data(), plane.data());
  gradient_.resize(n);
  k.roberts_plane(plane.data(), raster.width, raster.height, gradient_.data());

  if (config.texture_threshold >= 0.0) {
    threshold_ = config.texture_threshold;
  } else {
    std::uint16_t mn = 0, mx = 0;
    k.minmax_u16(raster.samples.data(), raster.samples.size(), &mn, &mx);
    threshold_ = 0.1 * static_cast<double>(mx - mn);
  }
}

double roberts_edge_density(const FeatureContext& ctx, const Region& region) {
  if (region.pixels.empty()) throw Error("texture of an empty region");
  const Raster& raster = ctx.raster();
  const std::size_t w = raster.width;
  const std::size_t h = raster.height;
  std::size_t evaluated = 0;
  std::size_t exceeding = 0;
  for (const auto& [r, c] : region.pixels) {
    if (static_cast<std::size_t>(r) + 1 >= h || static_cast<std::size_t>(c) + 1 >= w) continue;
    ++evaluated;
    double g = ctx.gradient()[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)];
    if (g > ctx.threshold()) ++exceeding;
  }
  if (evaluated == 0) return 0.0;
  return static_cast<double>(exceeding) / static_cast<double>(evaluated);
}

double roberts_edge_density(const Raster& raster, const Region& region,
                            const std::vector<double>& band_weights, double threshold) {
  FeatureConfig config;
  config.band_weights = band_weights;
  config.texture_threshold = threshold;
  return roberts_edge_density(FeatureContext(raster, config), region);
}

MbrResult min_bounding_rect(const Region& region) {
  if (region.pixels.empty()) throw Error("bounding rectangle of an empty region");
  const double n = static_cast<double>(region.pixels.size());
  MbrResult best;
  double best_fit = -1.0;
  for (int theta = 0; theta < 90; ++theta) {
    double rad = static_cast<double>(theta) * std::numbers::pi / 180.0;
    double cos_t = std::cos(rad);
    double sin_t = std::sin(rad);
    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    bool first = true;
    for (const auto& [r, c] : region.pixels) {
      // Rotation by -theta of the pixel center (x = col, y = row).
      double x = c * cos_t + r * sin_t;
      double y = -c * sin_t + r * cos_t;
      if (first) {
        min_x = max_x = x;
        min_y = max_y = y;
        first = false;
      } else {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
    double extent_x = (max_x - min_x) + 1.0;
    double extent_y = (max_y - min_y) + 1.0;
    double fit = n / (extent_x * extent_y);
    if (fit > best_fit) {
      best_fit = fit;
      best.fit = fit;
      best.length = std::max(extent_x, extent_y);
      best.width = std::min(extent_x, extent_y);
      best.elong = best.length / best.width;
      best.direc = static_cast<double>(theta);
    }
  }
  return best;
}

double compactness(const Region& region) {
  if (region.pixels.empty()) throw Error("compactness of an empty region");
  const std::size_t bw = static_cast<std::size_t>(region.max_col - region.min_col) + 1;
  const std::size_t bh = static_cast<std::size_t>(region.max_row - region.min_row) + 1;
  std::vector<std::uint8_t> bitmap(bw * bh, 0);
  for (const auto& [r, c] : region.pixels) {
    bitmap[static_cast<std::size_t>(r - region.min_row) * bw +
           static_cast<std::size_t>(c - region.min_col)] = 1;
  }
  auto inside = [&](long r, long c) {
    return r >= 0 && c >= 0 && r < static_cast<long>(bh) && c < static_cast<long>(bw) &&
           bitmap[static_cast<std::size_t>(r) * bw + static_cast<std::size_t>(c)] != 0;
  };
  std::size_t perimeter = 0;
  for (const auto& [pr, pc] : region.pixels) {
    long r = pr - region.min_row;
    long c = pc - region.min_col;
    if (!inside(r - 1, c)) ++perimeter;
    if (!inside(r + 1, c)) ++perimeter;
    if (!inside(r, c - 1)) ++perimeter;
    if (!inside(r, c + 1)) ++perimeter;
  }
  double area = static_cast<double>(region.pixels.size());
  double p = static_cast<double>(perimeter);
  return 4.0 * std::numbers::pi * area / (p * p);
}

std::vector<double> spectral_mean(const Raster& raster, const Region& region) {
  if (region.pixels.empty()) throw Error("spectral mean of an empty region");
  std::vector<double> mean(raster.bands, 0.0);
  for (std::size_t b = 0; b < raster.bands; ++b) {
    double sum = 0.0;
    for (const auto& [r, c] : region.pixels) {
      sum += static_cast<double>(raster.at(b, static_cast<std::size_t>(r),
                                           static_cast<std::size_t>(c)));
    }
    mean[b] = sum / static_cast<double>(region.pixels.size());
  }
  return mean;
}

std::map<int, int> neighbor_class_feature(const Region& region, const AdjacencyGraph& graph,
                                          const std::map<int, int>& current_labels) {
  std::map<int, int> counts;
  for (const auto& [neighbor, _] : graph.neighbors(region.id)) {
    auto it = current_labels.find(neighbor);
    if (it == current_labels.end()) {
      throw Error("neighbor region " + std::to_string(neighbor) + " has no class hypothesis");
    }
    counts[it->second] += 1;
  }
  return counts;
}

RegionFeatures extract_features(const FeatureContext& ctx, const Region& region,
                                const AdjacencyGraph& graph,
                                const std::map<int, int>& current_labels) {
  RegionFeatures f;
  f.size = region.pixels.size();
  f.texture = roberts_edge_density(ctx, region);
  MbrResult mbr = min_bounding_rect(region);
  f.fit = mbr.fit;
  f.elong = mbr.elong;
  f.direc = mbr.direc;
  f.compactness = compactness(region);
  f.spectral_mean = spectral_mean(ctx.raster(), region);
  f.neighbor_class_counts = neighbor_class_feature(region, graph, current_labels);
  return f;
}

std::vector<std::string> scalar_feature_ids(std::size_t bands) {
  std::vector<std::string> ids{"size", "texture", "fit", "elong", "direc", "compactness"};
  for (std::size_t b = 0; b < bands; ++b) ids.push_back("mean_b" + std::to_string(b));
  return ids;
}

double scalar_feature(const RegionFeatures& features, const std::string& feature_id) {
  if (feature_id == "size") return static_cast<double>(features.size);
  if (feature_id == "texture") return features.texture;
  if (feature_id == "fit") return features.fit;
  if (feature_id == "elong") return features.elong;
  if (feature_id == "direc") return features.direc;
  if (feature_id == "compactness") return features.compactness;
  if (feature_id.rfind("mean_b", 0) == 0) {
    std::size_t band = std::stoul(feature_id.substr(6));
    if (band < features.spectral_mean.size()) return features.spectral_mean[band];
    throw Error("feature " + feature_id + " exceeds the band count");
  }
  throw Error("unknown feature id: " + feature_id);
}

std::string features_to_csv(const std::map<int, Region>& regions,
                            const std::map<int, RegionFeatures>& features, const Frame& frame) {
  std::size_t bands = 0;
  for (const auto& [_, f] : features) bands = std::max(bands, f.spectral_mean.size());

  std::ostringstream out;
  out << "id,class,size,texture,fit,elong,direc,compactness";
  for (std::size_t b = 0; b < bands; ++b) out << ",mean_b" << b;
  for (const auto& label : frame.labels()) out << ",nbr_" << label;
  out << "\n";
  out.precision(17);
  for (const auto& [id, region] : regions) {
    auto it = features.find(id);
    if (it == features.end()) continue;
    const RegionFeatures& f = it->second;
    out << id << "," << (region.class_id > 0 ? frame.label(region.class_id - 1) : "") << ","
        << f.size << "," << f.texture << "," << f.fit << "," << f.elong << "," << f.direc << ","
        << f.compactness;
    for (std::size_t b = 0; b < bands; ++b) {
      out << ",";
      if (b < f.spectral_mean.size()) out << f.spectral_mean[b];
    }
    for (std::size_t cls = 1; cls <= frame.size(); ++cls) {
      auto n = f.neighbor_class_counts.find(static_cast<int>(cls));
      out << "," << (n == f.neighbor_class_counts.end() ? 0 : n->second);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace evc
