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
#include <vector>

#include "evc/belief.hpp"
#include "evc/features.hpp"
#include "evc/mass_model.hpp"
#include "evc/raster.hpp"
#include "evc/regions.hpp"

// Maximum-likelihood Gaussian preclassification and the evidential contextual
// refinement loop: segment the preclassification into class-pure regions,
// test every region's class hypothesis against feature evidence, and merge
// rejected regions into their strongest neighbor until the scene stabilizes.

namespace evc {

struct ClassGaussian {
  int class_id = 0;          // 1-based frame index
  std::size_t pixel_count = 0;
  double prior = 0.0;        // pixel share among trained classes
  std::vector<double> mean;     // per band
  std::vector<double> cov;      // row-major bands x bands, ridge included
  std::vector<double> inv_cov;  // row-major bands x bands
  double log_const = 0.0;       // log prior - 0.5 logdet - (bands/2) log 2pi
};

struct GaussianModel {
  std::size_t bands = 0;
  std::vector<ClassGaussian> classes;  // ascending class id, trained classes only
  std::vector<int> excluded_classes;   // classes with zero training pixels
};

/// Per-class sample mean, MLE covariance with an always-applied ridge
/// lambda*I (lambda = 1e-3 x mean diagonal, floored at 1e-3 for constant
/// data), and pixel-count priors over the trained classes. Classes without
/// training pixels are excluded and reported.
GaussianModel fit_gaussians(const Raster& raster, const LabelMap& truth, const Frame& frame);

/// Per pixel argmax of log prior + log Gaussian density over the trained
/// classes; exact ties keep the lowest class id.
LabelMap bayes_preclassify(const Raster& raster, const GaussianModel& model);

/// One binary mask per frame class (absent classes get an empty mask); the
/// masks are pairwise disjoint and cover exactly the labeled pixels.
std::map<int, Mask> partition_bands(const LabelMap& map, const Frame& frame);

struct PipelineConfig {
  double accept_spt = 0.5;  // theta_s: minimum support to accept
  double accept_pls = 0.8;  // theta_p: minimum plausibility to accept
  int max_merge_iters = 100;
  // Evidence sources: scalar feature ids, "mean_b*" for every band mean, and
  // "neighbor" for the adjacency transition evidence.
  std::vector<std::string> enabled_features{"size", "mean_b*", "neighbor"};
  FeatureConfig features;
};

struct HypothesisDecision {
  int region_id = -1;
  int hypothesis = 0;  // class id under test
  std::string hypothesis_label;
  std::size_t region_size = 0;
  double spt = 0.0;
  double pls = 0.0;
  bool accepted = false;
  bool conflict = false;    // combination collapsed into total conflict
  bool unresolved = false;  // rejected but had no neighbor to merge into
  int merged_into = -1;     // target region id when this rejection merged
};

struct RunReport {
  std::size_t initial_regions = 0;
  std::size_t final_regions = 0;
  int passes = 0;
  int merges = 0;
  bool all_accepted = false;
  std::vector<std::vector<HypothesisDecision>> pass_decisions;
};

std::string report_to_json(const RunReport& report);

/// One simple support per enabled feature (plus the neighbor evidence),
/// combined by the orthogonal sum; the region's hypothesis is accepted iff
/// spt >= accept_spt and pls >= accept_pls on its singleton. Total conflict
/// rejects with the conflict flag and a [0,0] interval.
HypothesisDecision hypothesis_test(const Region& region, const RegionFeatures& features,
                                   const MassModel& model, const PipelineConfig& config);

struct EvidentialResult {
  LabelMap labels;
  RunReport report;
};

/// The contextual loop: partition the preclassification into class bands,
/// label connected regions, build adjacency, then run passes over the live
/// regions in ascending (size, id) order. A rejected region merges into the
/// neighbor with the longest shared boundary (ties to the lowest id), adopts
/// its class, and the merged region is retested once. Stops when a pass makes
/// no merge or after max_merge_iters passes. Every labeled input pixel stays
/// labeled; rejected regions without neighbors keep their class and are
/// flagged unresolved.
EvidentialResult evidential_classify(const Raster& raster, const LabelMap& preclass,
                                     const MassModel& model, const PipelineConfig& config);

/// Regions, adjacency, and per-region features from a ground-truth map; the
/// rows carry true classes, ready for fit_mass_model. graph_out receives the
/// full adjacency when non-null.
std::vector<TrainingRow> training_rows_from_truth(const Raster& raster, const LabelMap& truth,
                                                  const Frame& frame,
                                                  const FeatureConfig& config,
                                                  AdjacencyGraph* graph_out);

/// Stratified training selection: per class (ascending), region ids are
/// shuffled by a seeded Fisher-Yates and the first max(1, round(fraction*n))
/// are kept. The result is sorted. Deterministic for a fixed seed.
std::vector<int> select_training(const std::vector<Region>& regions, double fraction,
                                 std::uint64_t seed);

}  // namespace evc
