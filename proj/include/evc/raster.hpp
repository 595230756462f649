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

// Multiband raster and label-map data model with bit-exact file I/O.
// Raster files are a JSON header next to a raw little-endian u16 payload
// (band-sequential, row-major); label maps are binary PGM (P5), value 0
// reserved for "unlabeled". Both formats are the CLI interchange contract
// and must stay byte-stable.

namespace evc {

struct RasterMeta {
  // Ground footprint of one pixel in meters (along-track, across-track).
  double along_m = 57.0;
  double across_m = 79.0;
};

struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 1;
  // Band-sequential: band b of pixel (r, c) sits at (b*height + r)*width + c.
  std::vector<std::uint16_t> samples;
  RasterMeta meta;

  std::size_t pixels() const { return width * height; }
  std::uint16_t at(std::size_t band, std::size_t row, std::size_t col) const {
    return samples[(band * height + row) * width + col];
  }
  std::uint16_t& at(std::size_t band, std::size_t row, std::size_t col) {
    return samples[(band * height + row) * width + col];
  }
};

struct LabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  // Row-major class ids; 0 = unlabeled.
  std::vector<std::uint8_t> labels;

  std::uint8_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
  std::uint8_t& at(std::size_t row, std::size_t col) { return labels[row * width + col]; }
};

/// header_path names the JSON header; the payload lives next to it with the
/// extension replaced by ".raw".
Raster read_raster(const std::string& header_path);
void write_raster(const Raster& raster, const std::string& header_path);

LabelMap read_labelmap(const std::string& path);
void write_labelmap(const LabelMap& map, const std::string& path);

/// Every nonzero label must be a valid 1-based index into the frame.
void validate_labels(const LabelMap& map, const Frame& frame);

}  // namespace evc
