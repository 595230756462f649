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

#include "evc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "json.hpp"

#include "evc/common.hpp"

namespace evc {

namespace {

void validate_spec(const SceneSpec& spec) {
  if (spec.width == 0 || spec.height == 0) {
    throw DataError("scene dimensions must be positive");
  }
  if (spec.bands == 0) throw DataError("scene needs at least one band");
  if (spec.grid_rows < 1 || spec.grid_cols < 1) {
    throw DataError("grid must have at least one row and column");
  }
  if (static_cast<std::size_t>(spec.grid_rows) > spec.height ||
      static_cast<std::size_t>(spec.grid_cols) > spec.width) {
    throw DataError("grid larger than image");
  }
  if (spec.boundary_jitter < 0) throw DataError("boundary jitter must be >= 0");
  if (!(spec.noise_sigma >= 0.0)) throw DataError("noise sigma must be >= 0");
  if (spec.class_means.size() != spec.frame.size()) {
    throw DataError("class_means must list one row per frame label, got " +
                    std::to_string(spec.class_means.size()) + " rows for " +
                    std::to_string(spec.frame.size()) + " labels");
  }
  for (const auto& row : spec.class_means) {
    if (row.size() != spec.bands) {
      throw DataError("class_means rows must match the band count");
    }
  }
}

// Interior cut positions along one axis. Each of the grid_count bands keeps at
// least one pixel no matter how the jitter lands.
std::vector<std::size_t> jittered_cuts(std::size_t extent, int grid_count,
                                       int jitter, std::mt19937_64& rng) {
  std::vector<std::size_t> cuts(static_cast<std::size_t>(grid_count) + 1);
  cuts.front() = 0;
  cuts.back() = extent;
  for (int i = 1; i < grid_count; ++i) {
    long long line = static_cast<long long>(
        (static_cast<unsigned long long>(i) * extent) / grid_count);
    if (jitter > 0) {
      const std::uint64_t span = 2ull * static_cast<std::uint64_t>(jitter) + 1;
      line += static_cast<long long>(rng() % span) - jitter;
    }
    const long long lo = static_cast<long long>(cuts[i - 1]) + 1;
    const long long hi = static_cast<long long>(extent) - (grid_count - i);
    cuts[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(std::clamp(line, lo, hi));
  }
  return cuts;
}

// Band index lookup per coordinate, from the cut positions.
std::vector<int> band_of_coordinate(const std::vector<std::size_t>& cuts,
                                    std::size_t extent) {
  std::vector<int> band(extent, 0);
  int current = 0;
  for (std::size_t x = 0; x < extent; ++x) {
    while (x >= cuts[static_cast<std::size_t>(current) + 1]) ++current;
    band[x] = current;
  }
  return band;
}

// Uniform in (0, 1]; never 0, so the Box-Muller log stays finite.
double unit_open(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

double normal_draw(std::mt19937_64& rng) {
  const double u1 = unit_open(rng);
  const double u2 = unit_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

SceneSpec desk_default() {
  SceneSpec spec;
  spec.width = 128;
  spec.height = 128;
  spec.bands = 4;
  spec.frame = Frame{{"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"}};
  spec.grid_rows = 8;
  spec.grid_cols = 8;
  spec.boundary_jitter = 3;
  spec.mixed_boundary = true;
  // Calibrated against the acceptance targets: at this noise level the Bayes
  // baseline lands in the low 80s on every seed and the contextual stage
  // recovers roughly three points.
  spec.noise_sigma = 2800.0;
  spec.seed = 1;
  // Eight intensity levels assigned to classes through a different
  // permutation per band, so no single band separates everything and no two
  // classes share a full signature.
  const auto level = [](int k) { return 6000.0 + 3000.0 * k; };
  spec.class_means.assign(8, std::vector<double>(4, 0.0));
  for (int c = 0; c < 8; ++c) {
    spec.class_means[static_cast<std::size_t>(c)][0] = level(c);
    spec.class_means[static_cast<std::size_t>(c)][1] = level((3 * c + 3) % 8);
    spec.class_means[static_cast<std::size_t>(c)][2] = level((5 * c + 5) % 8);
    spec.class_means[static_cast<std::size_t>(c)][3] = level(c ^ 1);
  }
  return spec;
}

std::string scene_to_json(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["bands"] = spec.bands;
  j["frame"] = spec.frame.labels();
  j["grid_rows"] = spec.grid_rows;
  j["grid_cols"] = spec.grid_cols;
  j["boundary_jitter"] = spec.boundary_jitter;
  j["class_means"] = spec.class_means;
  j["noise_sigma"] = spec.noise_sigma;
  j["mixed_boundary"] = spec.mixed_boundary;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

SceneSpec scene_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad scene spec JSON: ") + e.what());
  }
  SceneSpec spec;
  try {
    spec.width = j.at("width").get<std::size_t>();
    spec.height = j.at("height").get<std::size_t>();
    spec.bands = j.at("bands").get<std::size_t>();
    spec.frame = Frame{j.at("frame").get<std::vector<std::string>>()};
    spec.grid_rows = j.at("grid_rows").get<int>();
    spec.grid_cols = j.at("grid_cols").get<int>();
    spec.boundary_jitter = j.at("boundary_jitter").get<int>();
    spec.class_means =
        j.at("class_means").get<std::vector<std::vector<double>>>();
    spec.noise_sigma = j.at("noise_sigma").get<double>();
    spec.mixed_boundary = j.at("mixed_boundary").get<bool>();
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad scene spec JSON: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

Scene generate_scene(const SceneSpec& spec) {
  validate_spec(spec);
  std::mt19937_64 rng(spec.seed);

  // Draw order is part of the contract: row cuts, column cuts, deck shuffle,
  // then noise.
  const auto row_cuts =
      jittered_cuts(spec.height, spec.grid_rows, spec.boundary_jitter, rng);
  const auto col_cuts =
      jittered_cuts(spec.width, spec.grid_cols, spec.boundary_jitter, rng);
  const auto row_band = band_of_coordinate(row_cuts, spec.height);
  const auto col_band = band_of_coordinate(col_cuts, spec.width);

  // Balanced deck: every class appears floor/ceil(fields / classes) times, so
  // no class can vanish from a scene by luck of the draw.
  const std::size_t fields = static_cast<std::size_t>(spec.grid_rows) *
                             static_cast<std::size_t>(spec.grid_cols);
  const std::size_t n_classes = spec.frame.size();
  std::vector<int> deck(fields);
  for (std::size_t i = 0; i < fields; ++i) {
    deck[i] = static_cast<int>(i % n_classes) + 1;
  }
  for (std::size_t i = fields - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(deck[i], deck[j]);
  }

  const auto field_of = [&](std::size_t r, std::size_t c) {
    return static_cast<std::size_t>(row_band[r]) *
               static_cast<std::size_t>(spec.grid_cols) +
           static_cast<std::size_t>(col_band[c]);
  };

  Scene scene;
  scene.truth.width = spec.width;
  scene.truth.height = spec.height;
  scene.truth.labels.assign(spec.width * spec.height, 0);
  for (std::size_t r = 0; r < spec.height; ++r) {
    for (std::size_t c = 0; c < spec.width; ++c) {
      scene.truth.at(r, c) = static_cast<std::uint8_t>(deck[field_of(r, c)]);
    }
  }

  // Noise-free expectation per pixel per band. Mixed boundaries average the
  // distinct class means that meet at the pixel; the truth label stays the
  // owning field's class.
  std::vector<double> expect(spec.bands * spec.height * spec.width, 0.0);
  for (std::size_t r = 0; r < spec.height; ++r) {
    for (std::size_t c = 0; c < spec.width; ++c) {
      const int own = deck[field_of(r, c)];
      std::set<int> mix{own};
      if (spec.mixed_boundary) {
        const auto consider = [&](std::size_t rr, std::size_t cc) {
          const int other = deck[field_of(rr, cc)];
          if (other != own) mix.insert(other);
        };
        if (r > 0) consider(r - 1, c);
        if (r + 1 < spec.height) consider(r + 1, c);
        if (c > 0) consider(r, c - 1);
        if (c + 1 < spec.width) consider(r, c + 1);
      }
      for (std::size_t b = 0; b < spec.bands; ++b) {
        double sum = 0.0;
        for (int cls : mix) {
          sum += spec.class_means[static_cast<std::size_t>(cls - 1)][b];
        }
        expect[(b * spec.height + r) * spec.width + c] =
            sum / static_cast<double>(mix.size());
      }
    }
  }

  scene.raster.width = spec.width;
  scene.raster.height = spec.height;
  scene.raster.bands = spec.bands;
  scene.raster.samples.assign(spec.bands * spec.height * spec.width, 0);
  for (std::size_t b = 0; b < spec.bands; ++b) {
    for (std::size_t r = 0; r < spec.height; ++r) {
      for (std::size_t c = 0; c < spec.width; ++c) {
        double value = expect[(b * spec.height + r) * spec.width + c];
        if (spec.noise_sigma > 0.0) {
          value += spec.noise_sigma * normal_draw(rng);
        }
        const long long q =
            std::clamp(std::llround(value), 0ll, 65535ll);
        scene.raster.at(b, r, c) = static_cast<std::uint16_t>(q);
      }
    }
  }
  return scene;
}

}  // namespace evc
