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

#include "evc/belief.hpp"
#include "evc/features.hpp"
#include "evc/regions.hpp"

// Ground-truth-driven histograms per (feature, class), their conversion to
// simple support degrees, and the adjacency class-transition matrix. The
// fitted model is the contract between the fit and classify pipeline stages
// and persists as a JSON document.

namespace evc {

struct FeatureHistogram {
  std::string feature_id;
  int class_id = 0;
  std::vector<double> bin_edges;  // strictly increasing, bins+1 entries
  std::vector<double> freq;       // normalized, one entry per bin
  bool degenerate = false;        // constant feature collapsed to one bin
};

struct MassModelConfig {
  int bins = 16;
  double s_max = 0.95;
  double alpha = 0.1;  // add-alpha smoothing pseudo-count
};

struct MassModel {
  Frame frame{std::vector<std::string>{"unset"}};
  // Keyed "feature:class_label".
  std::map<std::string, FeatureHistogram> histograms;
  // Row-major frame.size() x frame.size(); row = neighbor class, column =
  // hypothesis class; each row sums to 1.
  std::vector<double> transition;
  MassModelConfig config;
  std::vector<std::string> sparse_classes;  // classes with no training region

  double transition_at(int from_class, int to_class) const {
    return transition[static_cast<std::size_t>(from_class - 1) * frame.size() +
                      static_cast<std::size_t>(to_class - 1)];
  }
};

struct TrainingRow {
  int region_id = -1;
  int class_id = 0;  // true class
  RegionFeatures features;
};

/// Histograms use equal-width bins shared across classes, spanning each
/// feature's observed min-max (the size feature's lower edge is pinned to 0 so
/// unseen tiny regions always land in a real low bin). Counts are add-alpha
/// smoothed, then normalized. The transition matrix row-normalizes add-alpha
/// smoothed counts of adjacent true-class pairs.
MassModel fit_mass_model(const std::vector<TrainingRow>& rows, const AdjacencyGraph& graph,
                         const Frame& frame, const MassModelConfig& config);

/// Bin index of a value (out-of-range values clamp to the end bins).
std::size_t histogram_bin(const FeatureHistogram& histogram, double value);

/// Degree s = s_max * freq(bin of value) / max bin freq, focused on the
/// hypothesis class singleton.
SimpleSupport feature_support(const MassModel& model, const std::string& feature_id, double value,
                              int hypothesis_class);

/// Degree s = s_max * (sum over neighbor classes n of count(n) *
/// transition(n -> hypothesis)) / total neighbor count; no neighbors yields a
/// vacuous support (s = 0).
SimpleSupport neighbor_support(const MassModel& model,
                               const std::map<int, int>& neighbor_class_counts,
                               int hypothesis_class);

/// Round-trips bit-exactly.
std::string model_to_json(const MassModel& model);
MassModel model_from_json(const std::string& text);

}  // namespace evc
