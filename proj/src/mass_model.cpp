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

#include "evc/mass_model.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "evc/common.hpp"

namespace evc {

namespace {

std::string histogram_key(const std::string& feature_id, const std::string& class_label) {
  return feature_id + ":" + class_label;
}

FeatureHistogram build_histogram(const std::string& feature_id, int class_id, double lo,
                                 double hi, const std::vector<double>& values,
                                 const MassModelConfig& config) {
  FeatureHistogram h;
  h.feature_id = feature_id;
  h.class_id = class_id;
  if (hi <= lo) {
    // Constant feature across the whole training set: one bin catches all.
    h.degenerate = true;
    h.bin_edges = {lo, lo + 1.0};
    h.freq = {1.0};
    return h;
  }
  const int bins = config.bins;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  double width = (hi - lo) / static_cast<double>(bins);
  for (int b = 0; b <= bins; ++b) {
    h.bin_edges[static_cast<std::size_t>(b)] = lo + width * static_cast<double>(b);
  }
  h.bin_edges.back() = hi;  // guard against accumulation drift at the top edge

  // freq must be sized before binning: histogram_bin reads freq.size().
  h.freq.assign(static_cast<std::size_t>(bins), config.alpha);
  for (double v : values) h.freq[histogram_bin(h, v)] += 1.0;
  double total = 0.0;
  for (double c : h.freq) total += c;
  for (double& f : h.freq) f /= total;
  return h;
}

}  // namespace

std::size_t histogram_bin(const FeatureHistogram& histogram, double value) {
  const std::size_t bins = histogram.freq.size();
  double lo = histogram.bin_edges.front();
  double hi = histogram.bin_edges.back();
  if (value <= lo) return 0;
  if (value >= hi) return bins - 1;
  double width = (hi - lo) / static_cast<double>(bins);
  auto bin = static_cast<std::size_t>((value - lo) / width);
  return std::min(bin, bins - 1);
}

MassModel fit_mass_model(const std::vector<TrainingRow>& rows, const AdjacencyGraph& graph,
                         const Frame& frame, const MassModelConfig& config) {
  if (rows.empty()) throw Error("cannot fit a mass model on an empty training set");
  if (config.bins < 1) throw Error("histogram bin count must be at least 1");
  if (!(config.s_max > 0.0 && config.s_max < 1.0)) throw Error("s_max must lie in (0,1)");
  if (!(config.alpha > 0.0)) throw Error("smoothing alpha must be positive");

  MassModel model;
  model.frame = frame;
  model.config = config;

  std::size_t bands = 0;
  for (const TrainingRow& row : rows) {
    if (row.class_id < 1 || static_cast<std::size_t>(row.class_id) > frame.size()) {
      throw Error("training region " + std::to_string(row.region_id) +
                  " carries class id outside the frame");
    }
    bands = std::max(bands, row.features.spectral_mean.size());
  }
  for (std::size_t cls = 1; cls <= frame.size(); ++cls) {
    bool present = std::any_of(rows.begin(), rows.end(), [&](const TrainingRow& r) {
      return r.class_id == static_cast<int>(cls);
    });
    if (!present) model.sparse_classes.push_back(frame.label(cls - 1));
  }

  for (const std::string& feature_id : scalar_feature_ids(bands)) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const TrainingRow& row : rows) {
      double v = scalar_feature(row.features, feature_id);
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    // Size bins start at 0: a never-seen speck must fall into a genuinely
    // low-frequency bin instead of clamping into the smallest observed size.
    if (feature_id == "size") lo = 0.0;

    for (std::size_t cls = 1; cls <= frame.size(); ++cls) {
      std::vector<double> values;
      for (const TrainingRow& row : rows) {
        if (row.class_id == static_cast<int>(cls)) {
          values.push_back(scalar_feature(row.features, feature_id));
        }
      }
      FeatureHistogram h =
          build_histogram(feature_id, static_cast<int>(cls), lo, hi, values, config);
      model.histograms[histogram_key(feature_id, frame.label(cls - 1))] = std::move(h);
    }
  }

  const std::size_t n = frame.size();
  std::map<int, int> true_class;
  for (const TrainingRow& row : rows) true_class[row.region_id] = row.class_id;
  std::vector<double> counts(n * n, config.alpha);
  for (int id : graph.nodes()) {
    auto from = true_class.find(id);
    if (from == true_class.end()) continue;
    for (const auto& [neighbor, _] : graph.neighbors(id)) {
      if (neighbor < id) continue;  // count each unordered pair once per direction
      auto to = true_class.find(neighbor);
      if (to == true_class.end()) continue;
      counts[static_cast<std::size_t>(from->second - 1) * n +
             static_cast<std::size_t>(to->second - 1)] += 1.0;
      counts[static_cast<std::size_t>(to->second - 1) * n +
             static_cast<std::size_t>(from->second - 1)] += 1.0;
    }
  }
  model.transition.resize(n * n);
  for (std::size_t row = 0; row < n; ++row) {
    double total = 0.0;
    for (std::size_t col = 0; col < n; ++col) total += counts[row * n + col];
    for (std::size_t col = 0; col < n; ++col) {
      model.transition[row * n + col] = counts[row * n + col] / total;
    }
  }
  return model;
}

SimpleSupport feature_support(const MassModel& model, const std::string& feature_id, double value,
                              int hypothesis_class) {
  if (hypothesis_class < 1 || static_cast<std::size_t>(hypothesis_class) > model.frame.size()) {
    throw Error("hypothesis class id outside the frame");
  }
  const std::string& label = model.frame.label(static_cast<std::size_t>(hypothesis_class - 1));
  auto it = model.histograms.find(histogram_key(feature_id, label));
  if (it == model.histograms.end()) {
    throw Error("no histogram for feature " + feature_id + " and class " + label);
  }
  const FeatureHistogram& h = it->second;
  double max_freq = *std::max_element(h.freq.begin(), h.freq.end());
  double s = model.config.s_max * h.freq[histogram_bin(h, value)] / max_freq;
  return SimpleSupport{FocalSet{1u << (hypothesis_class - 1)}, s};
}

SimpleSupport neighbor_support(const MassModel& model,
                               const std::map<int, int>& neighbor_class_counts,
                               int hypothesis_class) {
  if (hypothesis_class < 1 || static_cast<std::size_t>(hypothesis_class) > model.frame.size()) {
    throw Error("hypothesis class id outside the frame");
  }
  FocalSet focus{1u << (hypothesis_class - 1)};
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& [cls, count] : neighbor_class_counts) {
    if (cls < 1 || static_cast<std::size_t>(cls) > model.frame.size()) {
      throw Error("neighbor class id outside the frame");
    }
    total += static_cast<double>(count);
    weighted += static_cast<double>(count) * model.transition_at(cls, hypothesis_class);
  }
  if (total == 0.0) return SimpleSupport{focus, 0.0};
  return SimpleSupport{focus, model.config.s_max * weighted / total};
}

std::string model_to_json(const MassModel& model) {
  nlohmann::json j;
  j["frame"] = model.frame.labels();
  j["config"] = {{"bins", model.config.bins},
                 {"s_max", model.config.s_max},
                 {"alpha", model.config.alpha}};
  nlohmann::json hists = nlohmann::json::object();
  for (const auto& [key, h] : model.histograms) {
    hists[key] = {{"feature", h.feature_id},
                  {"class", model.frame.label(static_cast<std::size_t>(h.class_id - 1))},
                  {"edges", h.bin_edges},
                  {"freq", h.freq},
                  {"degenerate", h.degenerate}};
  }
  j["histograms"] = hists;
  j["transition"] = model.transition;
  j["sparse_classes"] = model.sparse_classes;
  return j.dump(2);
}

MassModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mass model JSON parse error: ") + e.what());
  }
  try {
    MassModel model;
    model.frame = Frame(j.at("frame").get<std::vector<std::string>>());
    model.config.bins = j.at("config").at("bins").get<int>();
    model.config.s_max = j.at("config").at("s_max").get<double>();
    model.config.alpha = j.at("config").at("alpha").get<double>();
    for (const auto& [key, hj] : j.at("histograms").items()) {
      FeatureHistogram h;
      h.feature_id = hj.at("feature").get<std::string>();
      int idx = model.frame.index_of(hj.at("class").get<std::string>());
      if (idx < 0) throw DataError("histogram class outside the frame in " + key);
      h.class_id = idx + 1;
      h.bin_edges = hj.at("edges").get<std::vector<double>>();
      h.freq = hj.at("freq").get<std::vector<double>>();
      h.degenerate = hj.at("degenerate").get<bool>();
      if (h.bin_edges.size() != h.freq.size() + 1 || h.freq.empty()) {
        throw DataError("inconsistent histogram shape in " + key);
      }
      model.histograms[key] = std::move(h);
    }
    model.transition = j.at("transition").get<std::vector<double>>();
    if (model.transition.size() != model.frame.size() * model.frame.size()) {
      throw DataError("transition matrix does not match the frame size");
    }
    model.sparse_classes = j.at("sparse_classes").get<std::vector<std::string>>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mass model JSON schema error: ") + e.what());
  }
}

}  // namespace evc
