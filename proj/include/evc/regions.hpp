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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evc/raster.hpp"

// Maximal 4-connected components per class band, region adjacency with shared
// boundary lengths, and region merging. Region ids are dense integers in
// raster-scan order of each region's first pixel, so identical inputs always
// produce identical ids.

namespace evc {

struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> set;  // row-major, nonzero = member

  bool at(std::size_t row, std::size_t col) const { return set[row * width + col] != 0; }
};

struct Region {
  int id = -1;
  int class_id = 0;  // 1-based frame index, 0 = unassigned
  std::vector<std::pair<int, int>> pixels;  // (row, col), raster-scan sorted
  int min_row = 0, min_col = 0, max_row = 0, max_col = 0;

  std::size_t size() const { return pixels.size(); }
};

/// Symmetric region adjacency with shared-boundary lengths: the weight of
/// edge (i, j) counts the 4-adjacent pixel pairs straddling the two regions.
class AdjacencyGraph {
 public:
  bool has_node(int id) const { return edges_.count(id) != 0; }
  void add_node(int id);
  void add_edge(int a, int b, int weight);

  /// 0 when the regions are not adjacent.
  int edge(int a, int b) const;
  const std::map<int, int>& neighbors(int id) const;
  std::vector<int> nodes() const;
  std::size_t node_count() const { return edges_.size(); }

  /// Moves every edge of `source` onto `target` (weights to shared neighbors
  /// are summed, the source-target edge disappears) and removes `source`.
  void merge_into(int source, int target);

 private:
  std::map<int, std::map<int, int>> edges_;
};

/// Maximal 4-connected components of the mask's set pixels, ids 0..n-1 in
/// raster-scan order of first pixel. class_id is left at 0.
std::vector<Region> label_components(const Mask& mask);

/// Components of every class band of the map in one list: class_id carries
/// the map label, ids are reassigned 0..n-1 in raster-scan order of first
/// pixel across all classes.
std::vector<Region> label_all(const LabelMap& map);

/// Pairwise shared-boundary counts. The map supplies dimensions and the
/// labeled-pixel set; regions must tile it exactly (no overlap, no gap).
AdjacencyGraph build_adjacency(const std::vector<Region>& regions, const LabelMap& map);

/// Target absorbs source's pixels and edges; source disappears. The pair must
/// share an edge. Target keeps its id and class hypothesis.
void merge_regions(AdjacencyGraph& graph, std::map<int, Region>& regions, int source_id,
                   int target_id);

/// Debugging export: one JSON object per region (id, class, size, bbox).
std::string regions_to_json(const std::map<int, Region>& regions, const Frame& frame);

}  // namespace evc
