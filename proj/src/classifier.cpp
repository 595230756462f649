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

#include "evc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"

#include "evc/common.hpp"
#include "evc/kernels.hpp"

namespace evc {

namespace {

void validate_config(const PipelineConfig& config) {
  if (!(config.accept_spt > 0.0 && config.accept_spt <= config.accept_pls &&
        config.accept_pls <= 1.0)) {
    throw Error("acceptance thresholds must satisfy 0 < spt <= pls <= 1");
  }
  if (config.max_merge_iters < 1) throw Error("max_merge_iters must be at least 1");
}

// Expands "mean_b*" to every band mean and splits off the "neighbor" toggle;
// unknown names are an error, repeats are ignored.
std::vector<std::string> resolve_features(const std::vector<std::string>& enabled,
                                          std::size_t bands, bool* neighbor) {
  std::vector<std::string> valid = scalar_feature_ids(bands);
  std::vector<std::string> ids;
  std::set<std::string> seen;
  *neighbor = false;
  for (const std::string& name : enabled) {
    if (name == "neighbor") {
      *neighbor = true;
      continue;
    }
    if (name == "mean_b*") {
      for (std::size_t b = 0; b < bands; ++b) {
        std::string id = "mean_b" + std::to_string(b);
        if (seen.insert(id).second) ids.push_back(id);
      }
      continue;
    }
    if (std::find(valid.begin(), valid.end(), name) == valid.end()) {
      throw Error("unknown evidence feature: " + name);
    }
    if (seen.insert(name).second) ids.push_back(name);
  }
  return ids;
}

}  // namespace

GaussianModel fit_gaussians(const Raster& raster, const LabelMap& truth, const Frame& frame) {
  if (truth.width != raster.width || truth.height != raster.height) {
    throw DataError("truth map " + std::to_string(truth.width) + "x" +
                    std::to_string(truth.height) + " does not match raster " +
                    std::to_string(raster.width) + "x" + std::to_string(raster.height));
  }
  validate_labels(truth, frame);

  const std::size_t bands = raster.bands;
  const std::size_t n = raster.pixels();
  struct Accumulator {
    std::size_t count = 0;
    std::vector<double> sum;       // per band; integer-exact for u16 data
    std::vector<double> product;   // row-major sum of per-pixel products
  };
  std::vector<Accumulator> acc(frame.size());
  for (auto& a : acc) {
    a.sum.assign(bands, 0.0);
    a.product.assign(bands * bands, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t cls = truth.labels[i];
    if (cls == 0) continue;
    Accumulator& a = acc[cls - 1];
    ++a.count;
    for (std::size_t b = 0; b < bands; ++b) {
      double v = static_cast<double>(raster.samples[b * n + i]);
      a.sum[b] += v;
      for (std::size_t j = 0; j <= b; ++j) {
        a.product[b * bands + j] += v * static_cast<double>(raster.samples[j * n + i]);
      }
    }
  }

  GaussianModel model;
  model.bands = bands;
  std::size_t total = 0;
  for (std::size_t cls = 1; cls <= frame.size(); ++cls) {
    if (acc[cls - 1].count == 0) {
      model.excluded_classes.push_back(static_cast<int>(cls));
    } else {
      total += acc[cls - 1].count;
    }
  }
  if (total == 0) throw DataError("truth map has no labeled pixels");

  for (std::size_t cls = 1; cls <= frame.size(); ++cls) {
    const Accumulator& a = acc[cls - 1];
    if (a.count == 0) continue;
    ClassGaussian g;
    g.class_id = static_cast<int>(cls);
    g.pixel_count = a.count;
    g.prior = static_cast<double>(a.count) / static_cast<double>(total);
    g.mean.resize(bands);
    double count = static_cast<double>(a.count);
    for (std::size_t b = 0; b < bands; ++b) g.mean[b] = a.sum[b] / count;

    Eigen::MatrixXd cov(bands, bands);
    for (std::size_t b = 0; b < bands; ++b) {
      for (std::size_t j = 0; j <= b; ++j) {
        double c = a.product[b * bands + j] / count - g.mean[b] * g.mean[j];
        cov(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = c;
        cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = c;
      }
    }
    double lambda = 1e-3 * cov.trace() / static_cast<double>(bands);
    if (!(lambda > 0.0)) lambda = 1e-3;  // constant data leaves ridge only
    cov += lambda * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(bands),
                                              static_cast<Eigen::Index>(bands));

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error("covariance for class " + frame.label(cls - 1) +
                  " is not positive definite after ridge repair");
    }
    double logdet = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
      logdet += std::log(llt.matrixL()(static_cast<Eigen::Index>(b),
                                       static_cast<Eigen::Index>(b)));
    }
    logdet *= 2.0;
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(
        static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(bands)));

    g.cov.resize(bands * bands);
    g.inv_cov.resize(bands * bands);
    for (std::size_t b = 0; b < bands; ++b) {
      for (std::size_t j = 0; j < bands; ++j) {
        g.cov[b * bands + j] = cov(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
        g.inv_cov[b * bands + j] =
            inv(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
      }
    }
    g.log_const = std::log(g.prior) - 0.5 * logdet -
                  0.5 * static_cast<double>(bands) * std::log(2.0 * std::numbers::pi);
    model.classes.push_back(std::move(g));
  }
  return model;
}

LabelMap bayes_preclassify(const Raster& raster, const GaussianModel& model) {
  if (model.bands != raster.bands) {
    throw DataError("model expects " + std::to_string(model.bands) + " bands, raster has " +
                    std::to_string(raster.bands));
  }
  if (model.classes.empty()) throw Error("preclassification needs at least one trained class");

  const std::size_t n = raster.pixels();
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> best_id(n, 0);
  std::vector<double> scores(n);
  const auto& k = kernels::active();
  for (const ClassGaussian& g : model.classes) {
    k.gauss_score_plane(raster.samples.data(), n, raster.bands, g.mean.data(),
                        g.inv_cov.data(), g.log_const, scores.data());
    k.argmax_merge(scores.data(), n, g.class_id, best.data(), best_id.data());
  }

  LabelMap out;
  out.width = raster.width;
  out.height = raster.height;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = static_cast<std::uint8_t>(best_id[i]);
  return out;
}

std::map<int, Mask> partition_bands(const LabelMap& map, const Frame& frame) {
  validate_labels(map, frame);
  std::map<int, Mask> bands;
  for (std::size_t cls = 1; cls <= frame.size(); ++cls) {
    bands.emplace(static_cast<int>(cls),
                  Mask{map.width, map.height, std::vector<std::uint8_t>(map.labels.size(), 0)});
  }
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    if (map.labels[i] != 0) bands.at(map.labels[i]).set[i] = 1;
  }
  return bands;
}

HypothesisDecision hypothesis_test(const Region& region, const RegionFeatures& features,
                                   const MassModel& model, const PipelineConfig& config) {
  validate_config(config);
  if (region.class_id < 1 || static_cast<std::size_t>(region.class_id) > model.frame.size()) {
    throw Error("region " + std::to_string(region.id) + " has no class hypothesis to test");
  }
  HypothesisDecision d;
  d.region_id = region.id;
  d.hypothesis = region.class_id;
  d.hypothesis_label = model.frame.label(static_cast<std::size_t>(region.class_id - 1));
  d.region_size = region.size();

  bool use_neighbor = false;
  std::vector<std::string> ids =
      resolve_features(config.enabled_features, features.spectral_mean.size(), &use_neighbor);
  std::vector<MassFunction> supports;
  supports.reserve(ids.size() + 1);
  for (const std::string& id : ids) {
    SimpleSupport s = feature_support(model, id, scalar_feature(features, id), region.class_id);
    supports.push_back(from_simple_support(model.frame, s));
  }
  if (use_neighbor) {
    supports.push_back(from_simple_support(
        model.frame, neighbor_support(model, features.neighbor_class_counts, region.class_id)));
  }

  try {
    MassFunction combined = combine_all(model.frame, supports);
    EvidentialInterval iv =
        interval(combined, FocalSet{1u << static_cast<std::uint32_t>(region.class_id - 1)});
    d.spt = iv.spt;
    d.pls = iv.pls;
    d.accepted = iv.spt >= config.accept_spt && iv.pls >= config.accept_pls;
  } catch (const ConflictError&) {
    d.conflict = true;
    d.spt = 0.0;
    d.pls = 0.0;
    d.accepted = false;
  }
  return d;
}

EvidentialResult evidential_classify(const Raster& raster, const LabelMap& preclass,
                                     const MassModel& model, const PipelineConfig& config) {
  validate_config(config);
  if (preclass.width != raster.width || preclass.height != raster.height) {
    throw DataError("preclassification " + std::to_string(preclass.width) + "x" +
                    std::to_string(preclass.height) + " does not match raster " +
                    std::to_string(raster.width) + "x" + std::to_string(raster.height));
  }

  std::map<int, Mask> bands = partition_bands(preclass, model.frame);
  std::vector<Region> all;
  for (auto& [cls, mask] : bands) {
    for (Region& region : label_components(mask)) {
      region.class_id = cls;
      all.push_back(std::move(region));
    }
  }
  if (all.empty()) throw DataError("preclassification has no labeled pixels");
  std::sort(all.begin(), all.end(),
            [](const Region& a, const Region& b) { return a.pixels.front() < b.pixels.front(); });
  for (std::size_t i = 0; i < all.size(); ++i) all[i].id = static_cast<int>(i);

  AdjacencyGraph graph = build_adjacency(all, preclass);
  std::map<int, Region> live;
  std::map<int, int> labels;
  for (Region& region : all) {
    labels[region.id] = region.class_id;
    live.emplace(region.id, std::move(region));
  }

  FeatureContext ctx(raster, config.features);
  std::map<int, RegionFeatures> cache;
  auto features_of = [&](int id) -> const RegionFeatures& {
    auto it = cache.find(id);
    if (it == cache.end()) {
      it = cache.emplace(id, extract_features(ctx, live.at(id), graph, labels)).first;
    }
    return it->second;
  };

  EvidentialResult result;
  RunReport& report = result.report;
  report.initial_regions = live.size();

  for (int pass = 1; pass <= config.max_merge_iters; ++pass) {
    std::vector<std::pair<std::size_t, int>> order;
    order.reserve(live.size());
    for (const auto& [id, region] : live) order.emplace_back(region.size(), id);
    std::sort(order.begin(), order.end());

    std::vector<HypothesisDecision> decisions;
    int merges_this_pass = 0;
    bool all_ok = true;
    for (const auto& [snapshot_size, id] : order) {
      if (live.find(id) == live.end()) continue;  // merged away earlier this pass
      HypothesisDecision d = hypothesis_test(live.at(id), features_of(id), model, config);
      if (d.accepted) {
        decisions.push_back(std::move(d));
        continue;
      }
      all_ok = false;
      const auto& neighbors = graph.neighbors(id);
      if (neighbors.empty()) {
        d.unresolved = true;
        decisions.push_back(std::move(d));
        continue;
      }
      int target = -1;
      int best_weight = -1;
      for (const auto& [neighbor, weight] : neighbors) {
        if (weight > best_weight) {  // ascending ids: ties keep the lowest
          best_weight = weight;
          target = neighbor;
        }
      }
      d.merged_into = target;
      decisions.push_back(std::move(d));

      // Neighbor rosters of everything touching either side change.
      cache.erase(id);
      cache.erase(target);
      for (const auto& [neighbor, _] : graph.neighbors(id)) cache.erase(neighbor);
      for (const auto& [neighbor, _] : graph.neighbors(target)) cache.erase(neighbor);
      merge_regions(graph, live, id, target);
      labels.erase(id);
      ++merges_this_pass;
      ++report.merges;

      // The merged whole is retested once; further action waits for the next
      // pass so one pass stays one sweep.
      HypothesisDecision retest =
          hypothesis_test(live.at(target), features_of(target), model, config);
      if (!retest.accepted) all_ok = false;
      decisions.push_back(std::move(retest));
    }
    report.pass_decisions.push_back(std::move(decisions));
    report.passes = pass;
    if (merges_this_pass == 0) {
      report.all_accepted = all_ok;
      break;
    }
  }

  report.final_regions = live.size();
  LabelMap& out = result.labels;
  out.width = preclass.width;
  out.height = preclass.height;
  out.labels.assign(preclass.labels.size(), 0);
  for (const auto& [id, region] : live) {
    for (const auto& [r, c] : region.pixels) {
      out.labels[static_cast<std::size_t>(r) * out.width + static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(region.class_id);
    }
  }
  return result;
}

std::string report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["initial_regions"] = report.initial_regions;
  j["final_regions"] = report.final_regions;
  j["passes"] = report.passes;
  j["merges"] = report.merges;
  j["all_accepted"] = report.all_accepted;
  nlohmann::json passes = nlohmann::json::array();
  for (const auto& pass : report.pass_decisions) {
    nlohmann::json list = nlohmann::json::array();
    for (const HypothesisDecision& d : pass) {
      list.push_back({{"region_id", d.region_id},
                      {"hypothesis", d.hypothesis},
                      {"hypothesis_label", d.hypothesis_label},
                      {"size", d.region_size},
                      {"spt", d.spt},
                      {"pls", d.pls},
                      {"accepted", d.accepted},
                      {"conflict", d.conflict},
                      {"unresolved", d.unresolved},
                      {"merged_into", d.merged_into}});
    }
    passes.push_back(std::move(list));
  }
  j["pass_decisions"] = std::move(passes);
  return j.dump(2);
}

std::vector<TrainingRow> training_rows_from_truth(const Raster& raster, const LabelMap& truth,
                                                  const Frame& frame,
                                                  const FeatureConfig& config,
                                                  AdjacencyGraph* graph_out) {
  if (truth.width != raster.width || truth.height != raster.height) {
    throw DataError("truth map " + std::to_string(truth.width) + "x" +
                    std::to_string(truth.height) + " does not match raster " +
                    std::to_string(raster.width) + "x" + std::to_string(raster.height));
  }
  validate_labels(truth, frame);
  std::vector<Region> regions = label_all(truth);
  if (regions.empty()) throw DataError("truth map has no labeled pixels");
  AdjacencyGraph graph = build_adjacency(regions, truth);
  std::map<int, int> labels;
  for (const Region& region : regions) labels[region.id] = region.class_id;

  FeatureContext ctx(raster, config);
  std::vector<TrainingRow> rows;
  rows.reserve(regions.size());
  for (const Region& region : regions) {
    TrainingRow row;
    row.region_id = region.id;
    row.class_id = region.class_id;
    row.features = extract_features(ctx, region, graph, labels);
    rows.push_back(std::move(row));
  }
  if (graph_out != nullptr) *graph_out = std::move(graph);
  return rows;
}

std::vector<int> select_training(const std::vector<Region>& regions, double fraction,
                                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error("training fraction must lie in (0,1]");
  }
  std::map<int, std::vector<int>> by_class;
  for (const Region& region : regions) {
    if (region.class_id > 0) by_class[region.class_id].push_back(region.id);
  }
  std::mt19937_64 rng(seed);
  std::vector<int> selected;
  for (auto& [cls, ids] : by_class) {
    std::sort(ids.begin(), ids.end());
    // Explicit Fisher-Yates: std::shuffle sequences vary across standard
    // libraries, this must not.
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(ids[i - 1], ids[j]);
    }
    auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    std::size_t take = std::min(ids.size(), std::max<std::size_t>(1, want));
    selected.insert(selected.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace evc
