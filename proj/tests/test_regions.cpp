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

#include <random>
#include <set>

#include "doctest.h"
#include "evc/common.hpp"
#include "evc/regions.hpp"

using namespace evc;

namespace {

Mask mask_from_rows(const std::vector<std::string>& rows) {
  Mask mask;
  mask.height = rows.size();
  mask.width = rows.front().size();
  for (const auto& row : rows) {
    for (char c : row) mask.set.push_back(c == '#' ? 1 : 0);
  }
  return mask;
}

LabelMap map_from_rows(const std::vector<std::string>& rows) {
  LabelMap map;
  map.height = rows.size();
  map.width = rows.front().size();
  for (const auto& row : rows) {
    for (char c : row) map.labels.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return map;
}

// Flood fill over a pixel set, for connectivity checks independent of
// label_components.
bool connected_4(const std::vector<std::pair<int, int>>& pixels) {
  std::set<std::pair<int, int>> todo(pixels.begin(), pixels.end());
  std::vector<std::pair<int, int>> stack{*todo.begin()};
  todo.erase(todo.begin());
  while (!stack.empty()) {
    auto [r, c] = stack.back();
    stack.pop_back();
    for (auto [dr, dc] : {std::pair<int, int>{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      auto it = todo.find({r + dr, c + dc});
      if (it != todo.end()) {
        stack.push_back(*it);
        todo.erase(it);
      }
    }
  }
  return todo.empty();
}

}  // namespace

TEST_SUITE("regions") {

TEST_CASE("two disjoint blocks") {
  auto regions = label_components(mask_from_rows({
      "##..",
      "##..",
      "..##",
      "..##",
  }));
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].size() == 4);
  CHECK(regions[1].size() == 4);
  CHECK(regions[0].id == 0);
  CHECK(regions[0].pixels.front() == std::pair<int, int>{0, 0});
  CHECK(regions[1].pixels.front() == std::pair<int, int>{2, 2});
}

TEST_CASE("all-set mask is a single component") {
  auto regions = label_components(mask_from_rows({"#####", "#####", "#####", "#####", "#####"}));
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].size() == 25);
  CHECK(regions[0].min_row == 0);
  CHECK(regions[0].max_row == 4);
  CHECK(regions[0].min_col == 0);
  CHECK(regions[0].max_col == 4);
}

TEST_CASE("diagonal touch does not connect") {
  auto regions = label_components(mask_from_rows({
      "#.",
      ".#",
  }));
  CHECK(regions.size() == 2);
}

TEST_CASE("empty mask yields no regions") {
  CHECK(label_components(mask_from_rows({"..", ".."})).empty());
}

TEST_CASE("ids follow raster-scan order of first pixels") {
  auto regions = label_components(mask_from_rows({
      ".#.#",
      ".#.#",
      "....",
      "##..",
  }));
  REQUIRE(regions.size() == 3);
  CHECK(regions[0].pixels.front() == std::pair<int, int>{0, 1});
  CHECK(regions[1].pixels.front() == std::pair<int, int>{0, 3});
  CHECK(regions[2].pixels.front() == std::pair<int, int>{3, 0});
}

TEST_CASE("label_all partitions every labeled pixel exactly once") {
  LabelMap map = map_from_rows({
      "1122",
      "1122",
      "3300",
      "3300",
  });
  auto regions = label_all(map);
  REQUIRE(regions.size() == 3);
  std::size_t total = 0;
  std::set<std::pair<int, int>> seen;
  for (const auto& region : regions) {
    total += region.size();
    CHECK(connected_4(region.pixels));
    for (const auto& p : region.pixels) CHECK(seen.insert(p).second);
  }
  CHECK(total == 12);
  // Scan-order global ids regardless of class value.
  CHECK(regions[0].class_id == 1);
  CHECK(regions[1].class_id == 2);
  CHECK(regions[2].class_id == 3);
}

TEST_CASE("stripe chain adjacency") {
  LabelMap map = map_from_rows({
      "112233",
      "112233",
      "112233",
      "112233",
  });
  auto regions = label_all(map);
  AdjacencyGraph graph = build_adjacency(regions, map);
  CHECK(graph.edge(0, 1) == 4);
  CHECK(graph.edge(1, 2) == 4);
  CHECK(graph.edge(0, 2) == 0);
  CHECK(graph.edge(1, 0) == 4);
}

TEST_CASE("single region has no edges") {
  LabelMap map = map_from_rows({"11", "11"});
  auto regions = label_all(map);
  AdjacencyGraph graph = build_adjacency(regions, map);
  CHECK(graph.neighbors(0).empty());
}

TEST_CASE("four quadrants: orthogonal edges only, weight 2") {
  LabelMap map = map_from_rows({
      "1122",
      "1122",
      "3344",
      "3344",
  });
  auto regions = label_all(map);
  AdjacencyGraph graph = build_adjacency(regions, map);
  CHECK(graph.edge(0, 1) == 2);
  CHECK(graph.edge(0, 2) == 2);
  CHECK(graph.edge(1, 3) == 2);
  CHECK(graph.edge(2, 3) == 2);
  CHECK(graph.edge(0, 3) == 0);  // diagonal quadrants never straddle
  CHECK(graph.edge(1, 2) == 0);
}

TEST_CASE("overlapping regions are rejected") {
  LabelMap map = map_from_rows({"11", "11"});
  auto regions = label_all(map);
  regions.push_back(regions[0]);
  regions.back().id = 7;
  CHECK_THROWS_WITH_AS(build_adjacency(regions, map), doctest::Contains("overlap"), Error);
}

TEST_CASE("uncovered labeled pixel is rejected") {
  LabelMap map = map_from_rows({"11", "12"});
  auto regions = label_all(map);
  regions.pop_back();  // drop the class-2 region
  CHECK_THROWS_WITH_AS(build_adjacency(regions, map), doctest::Contains("no region"), Error);
}

TEST_CASE("merge pools pixels and re-aggregates edges") {
  LabelMap map = map_from_rows({
      "111222",
      "111222",
      "333333",
      "333333",
  });
  auto list = label_all(map);
  AdjacencyGraph graph = build_adjacency(list, map);
  std::map<int, Region> regions;
  for (auto& r : list) regions[r.id] = std::move(r);

  // Chain 0-1 across the top, both border 2 below.
  int w01 = graph.edge(0, 1);
  int w02 = graph.edge(0, 2);
  int w12 = graph.edge(1, 2);
  REQUIRE(w01 == 2);
  REQUIRE(w02 == 3);
  REQUIRE(w12 == 3);

  std::size_t before = regions[0].size() + regions[1].size() + regions[2].size();
  merge_regions(graph, regions, 1, 0);
  CHECK(regions.count(1) == 0);
  CHECK(regions[0].size() == 12);
  CHECK(regions[0].size() + regions[2].size() == before);
  CHECK(graph.edge(0, 2) == w02 + w12);
  CHECK(graph.edge(2, 0) == w02 + w12);
  CHECK(graph.edge(0, 1) == 0);
  CHECK(connected_4(regions[0].pixels));
  CHECK(regions[0].min_row == 0);
  CHECK(regions[0].max_col == 5);

  CHECK_THROWS_AS(merge_regions(graph, regions, 1, 0), Error);
}

TEST_CASE("merge requires adjacency") {
  LabelMap map = map_from_rows({
      "112233",
  });
  auto list = label_all(map);
  AdjacencyGraph graph = build_adjacency(list, map);
  std::map<int, Region> regions;
  for (auto& r : list) regions[r.id] = std::move(r);
  CHECK_THROWS_WITH_AS(merge_regions(graph, regions, 0, 2),
                       doctest::Contains("not adjacent"), Error);
}

TEST_CASE("determinism and symmetry on random maps") {
  std::mt19937_64 rng(301);
  for (int trial = 0; trial < 10; ++trial) {
    LabelMap map;
    map.width = 12;
    map.height = 9;
    map.labels.resize(map.width * map.height);
    std::uniform_int_distribution<int> d(0, 3);
    for (auto& l : map.labels) l = static_cast<std::uint8_t>(d(rng));

    auto first = label_all(map);
    auto second = label_all(map);
    REQUIRE(first.size() == second.size());
    std::size_t labeled = 0;
    for (auto l : map.labels) labeled += l != 0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(first[i].id == second[i].id);
      CHECK(first[i].pixels == second[i].pixels);
      covered += first[i].size();
    }
    CHECK(covered == labeled);

    AdjacencyGraph graph = build_adjacency(first, map);
    for (int a : graph.nodes()) {
      for (const auto& [b, w] : graph.neighbors(a)) {
        CHECK(w >= 1);
        CHECK(graph.edge(b, a) == w);
      }
    }

    // Symmetry survives a merge cascade.
    std::map<int, Region> regions;
    for (auto& r : first) regions[r.id] = std::move(r);
    for (int round = 0; round < 5 && regions.size() > 1; ++round) {
      int source = -1, target = -1;
      for (const auto& [id, _] : regions) {
        if (!graph.neighbors(id).empty()) {
          source = id;
          target = graph.neighbors(id).begin()->first;
          break;
        }
      }
      if (source < 0) break;
      std::size_t before = 0;
      for (const auto& [_, r] : regions) before += r.size();
      merge_regions(graph, regions, source, target);
      std::size_t after = 0;
      for (const auto& [_, r] : regions) after += r.size();
      CHECK(after == before);
      for (int a : graph.nodes()) {
        for (const auto& [b, w] : graph.neighbors(a)) CHECK(graph.edge(b, a) == w);
      }
    }
  }
}

}  // TEST_SUITE
