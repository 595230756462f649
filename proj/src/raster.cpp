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

#include "evc/raster.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "evc/common.hpp"

namespace evc {

namespace {

std::string payload_path(const std::string& header_path) {
  std::filesystem::path p(header_path);
  p.replace_extension(".raw");
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw DataError("read failure on " + path);
  return data;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failure on " + path);
}

void check_dimensions(std::size_t width, std::size_t height, std::size_t bands) {
  if (width < 1 || height < 1) throw DataError("raster dimensions must be at least 1x1");
  if (bands < 1) throw DataError("raster must hold at least one band");
}

}  // namespace

Raster read_raster(const std::string& header_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(header_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("raster header " + header_path + ": " + e.what());
  }

  Raster raster;
  try {
    raster.width = j.at("width").get<std::size_t>();
    raster.height = j.at("height").get<std::size_t>();
    raster.bands = j.at("bands").get<std::size_t>();
    std::string dtype = j.at("dtype").get<std::string>();
    if (dtype != "u16") throw DataError("unsupported dtype \"" + dtype + "\", expected \"u16\"");
    std::string layout = j.at("layout").get<std::string>();
    if (layout != "band-sequential") {
      throw DataError("unsupported layout \"" + layout + "\", expected \"band-sequential\"");
    }
    std::string order = j.at("byte_order").get<std::string>();
    if (order != "little-endian") {
      throw DataError("unsupported byte_order \"" + order + "\", expected \"little-endian\"");
    }
    if (j.contains("pixel_ground_area")) {
      auto area = j.at("pixel_ground_area");
      raster.meta.along_m = area.at(0).get<double>();
      raster.meta.across_m = area.at(1).get<double>();
      if (!(raster.meta.along_m > 0.0 && raster.meta.across_m > 0.0)) {
        throw DataError("pixel_ground_area dimensions must be positive");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("raster header " + header_path + ": " + e.what());
  }
  check_dimensions(raster.width, raster.height, raster.bands);

  std::string payload = read_file(payload_path(header_path));
  std::size_t expected = raster.width * raster.height * raster.bands * 2;
  if (payload.size() != expected) {
    throw DataError("raster payload size mismatch for " + header_path + ": expected " +
                    std::to_string(expected) + " bytes, got " + std::to_string(payload.size()));
  }
  raster.samples.resize(expected / 2);
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    auto lo = static_cast<unsigned char>(payload[2 * i]);
    auto hi = static_cast<unsigned char>(payload[2 * i + 1]);
    raster.samples[i] = static_cast<std::uint16_t>(lo | (hi << 8));
  }
  return raster;
}

void write_raster(const Raster& raster, const std::string& header_path) {
  check_dimensions(raster.width, raster.height, raster.bands);
  std::size_t expected = raster.width * raster.height * raster.bands;
  if (raster.samples.size() != expected) {
    throw DataError("raster sample count mismatch: expected " + std::to_string(expected) +
                    ", got " + std::to_string(raster.samples.size()));
  }

  nlohmann::json j;
  j["width"] = raster.width;
  j["height"] = raster.height;
  j["bands"] = raster.bands;
  j["dtype"] = "u16";
  j["layout"] = "band-sequential";
  j["byte_order"] = "little-endian";
  j["pixel_ground_area"] = {raster.meta.along_m, raster.meta.across_m};
  write_file(header_path, j.dump(2) + "\n");

  std::string payload(raster.samples.size() * 2, '\0');
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    payload[2 * i] = static_cast<char>(raster.samples[i] & 0xff);
    payload[2 * i + 1] = static_cast<char>(raster.samples[i] >> 8);
  }
  write_file(payload_path(header_path), payload);
}

namespace {

// Consumes one PGM token, skipping whitespace and '#' comment lines.
std::string next_pgm_token(const std::string& data, std::size_t& pos, const std::string& path) {
  while (pos < data.size()) {
    char c = data[pos];
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
  if (start == pos) throw DataError("truncated PGM header in " + path);
  return data.substr(start, pos - start);
}

std::size_t parse_pgm_number(const std::string& token, const std::string& path) {
  std::size_t value = 0;
  for (char c : token) {
    if (c < '0' || c > '9') throw DataError("malformed PGM number \"" + token + "\" in " + path);
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

}  // namespace

LabelMap read_labelmap(const std::string& path) {
  std::string data = read_file(path);
  std::size_t pos = 0;
  if (next_pgm_token(data, pos, path) != "P5") {
    throw DataError(path + " is not a binary PGM (P5) file");
  }
  LabelMap map;
  map.width = parse_pgm_number(next_pgm_token(data, pos, path), path);
  map.height = parse_pgm_number(next_pgm_token(data, pos, path), path);
  std::size_t maxval = parse_pgm_number(next_pgm_token(data, pos, path), path);
  if (map.width < 1 || map.height < 1) throw DataError("degenerate PGM dimensions in " + path);
  if (maxval == 0 || maxval > 255) {
    throw DataError("PGM maxval " + std::to_string(maxval) + " unsupported in " + path);
  }
  ++pos;  // exactly one whitespace byte separates the header from the payload
  std::size_t expected = map.width * map.height;
  if (data.size() - pos != expected) {
    throw DataError("PGM payload size mismatch for " + path + ": expected " +
                    std::to_string(expected) + " bytes, got " + std::to_string(data.size() - pos));
  }
  map.labels.resize(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    map.labels[i] = static_cast<std::uint8_t>(data[pos + i]);
  }
  return map;
}

void write_labelmap(const LabelMap& map, const std::string& path) {
  if (map.width < 1 || map.height < 1) throw DataError("degenerate label map dimensions");
  if (map.labels.size() != map.width * map.height) {
    throw DataError("label count mismatch: expected " + std::to_string(map.width * map.height) +
                    ", got " + std::to_string(map.labels.size()));
  }
  std::string data = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) +
                     "\n255\n";
  data.append(reinterpret_cast<const char*>(map.labels.data()), map.labels.size());
  write_file(path, data);
}

void validate_labels(const LabelMap& map, const Frame& frame) {
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    std::uint8_t label = map.labels[i];
    if (label > frame.size()) {
      throw DataError("label " + std::to_string(label) + " at pixel " + std::to_string(i) +
                      " exceeds the " + std::to_string(frame.size()) + "-class frame");
    }
  }
}

}  // namespace evc
