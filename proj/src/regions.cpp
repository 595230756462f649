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

#include "evc/regions.hpp"

#include <algorithm>

#include "json.hpp"

#include "evc/common.hpp"

namespace evc {

void AdjacencyGraph::add_node(int id) { edges_[id]; }

void AdjacencyGraph::add_edge(int a, int b, int weight) {
  if (a == b) throw Error("self-edge on region " + std::to_string(a));
  if (weight < 1) throw Error("edge weight must be at least 1");
  edges_[a][b] += weight;
  edges_[b][a] += weight;
}

int AdjacencyGraph::edge(int a, int b) const {
  auto node = edges_.find(a);
  if (node == edges_.end()) return 0;
  auto it = node->second.find(b);
  return it == node->second.end() ? 0 : it->second;
}

const std::map<int, int>& AdjacencyGraph::neighbors(int id) const {
  auto node = edges_.find(id);
  if (node == edges_.end()) throw Error("unknown region id " + std::to_string(id));
  return node->second;
}

std::vector<int> AdjacencyGraph::nodes() const {
  std::vector<int> ids;
  ids.reserve(edges_.size());
  for (const auto& [id, _] : edges_) ids.push_back(id);
  return ids;
}

void AdjacencyGraph::merge_into(int source, int target) {
  auto src = edges_.find(source);
  auto dst = edges_.find(target);
  if (src == edges_.end() || dst == edges_.end()) {
    throw Error("merge with unknown region id");
  }
  for (const auto& [neighbor, weight] : src->second) {
    if (neighbor == target) continue;
    edges_[target][neighbor] += weight;
    edges_[neighbor][target] += weight;
    edges_[neighbor].erase(source);
  }
  dst->second.erase(source);
  edges_.erase(source);
}

std::vector<Region> label_components(const Mask& mask) {
  if (mask.set.size() != mask.width * mask.height) {
    throw Error("mask size does not match its dimensions");
  }
  const std::size_t w = mask.width;
  const std::size_t h = mask.height;
  std::vector<std::uint8_t> visited(w * h, 0);
  std::vector<Region> regions;
  std::vector<std::size_t> stack;

  for (std::size_t start = 0; start < w * h; ++start) {
    if (!mask.set[start] || visited[start]) continue;
    Region region;
    region.id = static_cast<int>(regions.size());
    visited[start] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      std::size_t idx = stack.back();
      stack.pop_back();
      std::size_t r = idx / w;
      std::size_t c = idx % w;
      region.pixels.emplace_back(static_cast<int>(r), static_cast<int>(c));
      if (r > 0 && mask.set[idx - w] && !visited[idx - w]) {
        visited[idx - w] = 1;
        stack.push_back(idx - w);
      }
      if (r + 1 < h && mask.set[idx + w] && !visited[idx + w]) {
        visited[idx + w] = 1;
        stack.push_back(idx + w);
      }
      if (c > 0 && mask.set[idx - 1] && !visited[idx - 1]) {
        visited[idx - 1] = 1;
        stack.push_back(idx - 1);
      }
      if (c + 1 < w && mask.set[idx + 1] && !visited[idx + 1]) {
        visited[idx + 1] = 1;
        stack.push_back(idx + 1);
      }
    }
    std::sort(region.pixels.begin(), region.pixels.end());
    region.min_row = region.pixels.front().first;
    region.max_row = region.pixels.back().first;
    region.min_col = region.pixels.front().second;
    region.max_col = region.pixels.front().second;
    for (const auto& [r, c] : region.pixels) {
      region.min_col = std::min(region.min_col, c);
      region.max_col = std::max(region.max_col, c);
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<Region> label_all(const LabelMap& map) {
  std::uint8_t max_label = 0;
  for (std::uint8_t label : map.labels) max_label = std::max(max_label, label);

  std::vector<Region> all;
  Mask mask{map.width, map.height, std::vector<std::uint8_t>(map.labels.size(), 0)};
  for (std::uint8_t cls = 1; cls <= max_label; ++cls) {
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
      mask.set[i] = map.labels[i] == cls ? 1 : 0;
    }
    for (Region& region : label_components(mask)) {
      region.class_id = cls;
      all.push_back(std::move(region));
    }
  }
  // Re-id by first pixel so ids do not depend on class enumeration order.
  std::sort(all.begin(), all.end(),
            [](const Region& a, const Region& b) { return a.pixels.front() < b.pixels.front(); });
  for (std::size_t i = 0; i < all.size(); ++i) all[i].id = static_cast<int>(i);
  return all;
}

AdjacencyGraph build_adjacency(const std::vector<Region>& regions, const LabelMap& map) {
  const std::size_t w = map.width;
  const std::size_t h = map.height;
  std::vector<int> owner(w * h, -1);
  for (const Region& region : regions) {
    for (const auto& [r, c] : region.pixels) {
      if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= h || static_cast<std::size_t>(c) >= w) {
        throw Error("region " + std::to_string(region.id) + " has a pixel outside the map");
      }
      int& cell = owner[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)];
      if (cell != -1) {
        throw Error("regions " + std::to_string(cell) + " and " + std::to_string(region.id) +
                    " overlap at (" + std::to_string(r) + "," + std::to_string(c) + ")");
      }
      cell = region.id;
    }
  }
  for (std::size_t i = 0; i < w * h; ++i) {
    if (map.labels[i] != 0 && owner[i] == -1) {
      throw Error("labeled pixel " + std::to_string(i) + " is covered by no region");
    }
  }

  AdjacencyGraph graph;
  for (const Region& region : regions) graph.add_node(region.id);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      int a = owner[r * w + c];
      if (a == -1) continue;
      if (c + 1 < w) {
        int b = owner[r * w + c + 1];
        if (b != -1 && b != a) graph.add_edge(a, b, 1);
      }
      if (r + 1 < h) {
        int b = owner[(r + 1) * w + c];
        if (b != -1 && b != a) graph.add_edge(a, b, 1);
      }
    }
  }
  return graph;
}

void merge_regions(AdjacencyGraph& graph, std::map<int, Region>& regions, int source_id,
                   int target_id) {
  auto src = regions.find(source_id);
  auto dst = regions.find(target_id);
  if (src == regions.end() || dst == regions.end()) {
    throw Error("merge with unknown region id");
  }
  if (graph.edge(source_id, target_id) < 1) {
    throw Error("regions " + std::to_string(source_id) + " and " + std::to_string(target_id) +
                " are not adjacent");
  }

  Region& target = dst->second;
  Region& source = src->second;
  std::vector<std::pair<int, int>> merged;
  merged.reserve(target.pixels.size() + source.pixels.size());
  std::merge(target.pixels.begin(), target.pixels.end(), source.pixels.begin(),
             source.pixels.end(), std::back_inserter(merged));
  target.pixels = std::move(merged);
  target.min_row = std::min(target.min_row, source.min_row);
  target.max_row = std::max(target.max_row, source.max_row);
  target.min_col = std::min(target.min_col, source.min_col);
  target.max_col = std::max(target.max_col, source.max_col);

  graph.merge_into(source_id, target_id);
  regions.erase(src);
}

std::string regions_to_json(const std::map<int, Region>& regions, const Frame& frame) {
  auto arr = nlohmann::json::array();
  for (const auto& [id, region] : regions) {
    nlohmann::json j;
    j["id"] = id;
    j["class"] = region.class_id > 0 ? frame.label(region.class_id - 1) : "";
    j["size"] = region.size();
    j["bbox"] = {region.min_row, region.min_col, region.max_row, region.max_col};
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace evc
