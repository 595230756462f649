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

#include <cmath>
#include <cstring>

#include "doctest.h"
#include "evc/common.hpp"
#include "evc/mass_model.hpp"

using namespace evc;

namespace {

TrainingRow make_row(int id, int class_id, double size, double texture, double fit,
                     double elong) {
  TrainingRow row;
  row.region_id = id;
  row.class_id = class_id;
  row.features.size = static_cast<std::size_t>(size);
  row.features.texture = texture;
  row.features.fit = fit;
  row.features.elong = elong;
  row.features.direc = 0.0;
  row.features.compactness = 0.5;
  return row;
}

// Two classes, eight regions each, sizes in two well-separated clusters so the
// size histograms have clear modes. fit is constant 1.0 everywhere, making it
// degenerate by construction.
std::vector<TrainingRow> two_cluster_rows() {
  std::vector<TrainingRow> rows;
  for (int i = 0; i < 8; ++i) {
    rows.push_back(make_row(i, 1, 100.0 + i, 0.1 + 0.01 * i, 1.0, 1.5));
    rows.push_back(make_row(8 + i, 2, 190.0 + i, 0.6 + 0.01 * i, 1.0, 3.0 + 0.1 * i));
  }
  return rows;
}

// Chain 0-1-...-15 alternating the two classes.
AdjacencyGraph chain_graph(int nodes) {
  AdjacencyGraph graph;
  for (int i = 0; i < nodes; ++i) graph.add_node(i);
  for (int i = 0; i + 1 < nodes; ++i) graph.add_edge(i, i + 1, 1);
  return graph;
}

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

MassModel hand_model() {
  MassModel model;
  model.frame = Frame({"A", "B"});
  model.config.s_max = 0.95;
  FeatureHistogram h;
  h.feature_id = "f";
  h.class_id = 1;
  h.bin_edges = {0.0, 1.0, 2.0, 3.0, 4.0};
  h.freq = {0.5, 0.25, 0.125, 0.125};
  model.histograms["f:A"] = h;
  model.transition = {1.0, 0.0, 0.0, 1.0};
  return model;
}

}  // namespace

TEST_SUITE("mass_model") {

TEST_CASE("fitted histograms are normalized with shared edges") {
  auto rows = two_cluster_rows();
  AdjacencyGraph graph = chain_graph(16);
  Frame frame({"A", "B"});
  MassModel model = fit_mass_model(rows, graph, frame, MassModelConfig{});

  for (const auto& [key, h] : model.histograms) {
    double total = 0.0;
    for (double f : h.freq) {
      CHECK(f > 0.0);  // smoothing keeps every bin reachable
      total += f;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    if (!h.degenerate) {
      REQUIRE(h.bin_edges.size() == h.freq.size() + 1);
      for (std::size_t i = 1; i < h.bin_edges.size(); ++i) {
        CHECK(h.bin_edges[i] > h.bin_edges[i - 1]);
      }
    }
  }

  // Edges are shared across classes per feature.
  CHECK(same_doubles(model.histograms.at("size:A").bin_edges,
                     model.histograms.at("size:B").bin_edges));
  CHECK(same_doubles(model.histograms.at("texture:A").bin_edges,
                     model.histograms.at("texture:B").bin_edges));

  // The size axis starts at zero even though the smallest region is 100 px.
  CHECK(model.histograms.at("size:A").bin_edges.front() == 0.0);
  CHECK(model.histograms.at("size:A").bin_edges.back() == 197.0);
  CHECK(model.sparse_classes.empty());
}

TEST_CASE("modal bin yields s_max, half-modal bin yields half") {
  MassModel model = hand_model();
  SimpleSupport modal = feature_support(model, "f", 0.5, 1);
  CHECK(modal.degree == 0.95);
  CHECK(modal.focus.bits == 0x1u);
  SimpleSupport half = feature_support(model, "f", 1.5, 1);
  CHECK(half.degree == 0.475);
  // Support scales with the landed bin's frequency.
  CHECK(feature_support(model, "f", 2.5, 1).degree ==
        doctest::Approx(0.95 * 0.25).epsilon(1e-12));
}

TEST_CASE("histogram_bin clamps out-of-range values") {
  MassModel model = hand_model();
  const FeatureHistogram& h = model.histograms.at("f:A");
  CHECK(histogram_bin(h, -5.0) == 0);
  CHECK(histogram_bin(h, 0.0) == 0);
  CHECK(histogram_bin(h, 3.0) == 3);
  CHECK(histogram_bin(h, 4.0) == 3);
  CHECK(histogram_bin(h, 99.0) == 3);
  CHECK(histogram_bin(h, 1.0) == 1);
}

TEST_CASE("low-frequency bins stay strictly positive") {
  auto rows = two_cluster_rows();
  MassModel model =
      fit_mass_model(rows, chain_graph(16), Frame({"A", "B"}), MassModelConfig{});
  // A never-seen speck lands in a smoothed low bin: weak but never zero, so
  // no single feature can categorically rule a class out.
  SimpleSupport s = feature_support(model, "size", 5.0, 1);
  CHECK(s.degree > 0.0);
  CHECK(s.degree < 0.2);
  SimpleSupport modal = feature_support(model, "size", 103.0, 1);
  CHECK(modal.degree == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(modal.degree > s.degree);
}

TEST_CASE("constant feature collapses to a flagged degenerate bin") {
  auto rows = two_cluster_rows();
  MassModel model =
      fit_mass_model(rows, chain_graph(16), Frame({"A", "B"}), MassModelConfig{});
  const FeatureHistogram& h = model.histograms.at("fit:A");
  CHECK(h.degenerate);
  REQUIRE(h.freq.size() == 1);
  CHECK(h.freq[0] == 1.0);
  // Any value maps onto the single bin and earns full support.
  CHECK(feature_support(model, "fit", 1.0, 1).degree == 0.95);
  CHECK(feature_support(model, "fit", -3.0, 2).degree == 0.95);
}

TEST_CASE("sparse classes are flagged and fall back to uniform histograms") {
  auto rows = two_cluster_rows();
  Frame frame({"A", "B", "C"});
  MassModel model = fit_mass_model(rows, chain_graph(16), frame, MassModelConfig{});
  REQUIRE(model.sparse_classes == std::vector<std::string>{"C"});
  const FeatureHistogram& h = model.histograms.at("size:C");
  for (double f : h.freq) CHECK(f == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  // Uniform frequencies support every value equally at s_max.
  CHECK(feature_support(model, "size", 42.0, 3).degree ==
        doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("transition rows sum to one and reflect adjacency") {
  // Regions 0:A, 1:B, 2:A in a chain: both edges are A-B pairs.
  std::vector<TrainingRow> rows{make_row(0, 1, 50, 0.1, 0.9, 1.0),
                                make_row(1, 2, 60, 0.2, 0.8, 2.0),
                                make_row(2, 1, 70, 0.3, 0.7, 3.0)};
  AdjacencyGraph graph = chain_graph(3);
  MassModelConfig config;
  config.alpha = 0.1;
  MassModel model = fit_mass_model(rows, graph, Frame({"A", "B"}), config);

  for (std::size_t row = 0; row < 2; ++row) {
    double total = 0.0;
    for (std::size_t col = 0; col < 2; ++col) {
      total += model.transition[row * 2 + col];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  // A row: alpha for A-A, 2 pairs + alpha for A-B.
  CHECK(model.transition_at(1, 1) == doctest::Approx(0.1 / 2.2).epsilon(1e-12));
  CHECK(model.transition_at(1, 2) == doctest::Approx(2.1 / 2.2).epsilon(1e-12));
  CHECK(model.transition_at(2, 1) == doctest::Approx(2.1 / 2.2).epsilon(1e-12));
}

TEST_CASE("neighbor support closed forms") {
  MassModel model = hand_model();

  // No neighbors: vacuous.
  CHECK(neighbor_support(model, {}, 1).degree == 0.0);

  // All three neighbors transition to the hypothesis with certainty.
  CHECK(neighbor_support(model, {{1, 3}}, 1).degree ==
        doctest::Approx(0.95).epsilon(1e-12));

  // Mixed neighborhood with transition values 0.8 and 0.4.
  model.transition = {0.8, 0.2, 0.4, 0.6};
  SimpleSupport s = neighbor_support(model, {{1, 1}, {2, 1}}, 1);
  CHECK(s.degree == doctest::Approx(0.95 * 0.6).epsilon(1e-12));
  CHECK(s.focus.bits == 0x1u);
  CHECK(neighbor_support(model, {{1, 1}, {2, 1}}, 2).degree ==
        doctest::Approx(0.95 * 0.4).epsilon(1e-12));

  // Counts weight the average: three class-1 neighbors, one class-2.
  CHECK(neighbor_support(model, {{1, 3}, {2, 1}}, 1).degree ==
        doctest::Approx(0.95 * (3.0 * 0.8 + 0.4) / 4.0).epsilon(1e-12));
}

TEST_CASE("support monotone in bin frequency") {
  MassModel model = hand_model();
  double previous = 1.0;
  for (double v : {0.5, 1.5, 2.5}) {
    double s = feature_support(model, "f", v, 1).degree;
    CHECK(s <= previous);
    previous = s;
  }
}

TEST_CASE("json round trip is bit exact") {
  auto rows = two_cluster_rows();
  MassModel model =
      fit_mass_model(rows, chain_graph(16), Frame({"A", "B"}), MassModelConfig{});
  std::string text = model_to_json(model);
  MassModel back = model_from_json(text);
  CHECK(model_to_json(back) == text);
  CHECK(same_doubles(back.transition, model.transition));
  for (const auto& [key, h] : model.histograms) {
    CHECK(same_doubles(back.histograms.at(key).bin_edges, h.bin_edges));
    CHECK(same_doubles(back.histograms.at(key).freq, h.freq));
  }
  CHECK(back.frame.labels() == model.frame.labels());
  CHECK(back.config.bins == model.config.bins);
}

TEST_CASE("refitting identical inputs reproduces the model exactly") {
  auto rows = two_cluster_rows();
  AdjacencyGraph graph = chain_graph(16);
  Frame frame({"A", "B"});
  std::string a = model_to_json(fit_mass_model(rows, graph, frame, MassModelConfig{}));
  std::string b = model_to_json(fit_mass_model(rows, graph, frame, MassModelConfig{}));
  CHECK(a == b);
}

TEST_CASE("validation rejects bad configs and lookups") {
  auto rows = two_cluster_rows();
  AdjacencyGraph graph = chain_graph(16);
  Frame frame({"A", "B"});

  MassModelConfig bad;
  bad.bins = 0;
  CHECK_THROWS_AS(fit_mass_model(rows, graph, frame, bad), Error);
  bad = MassModelConfig{};
  bad.s_max = 1.0;
  CHECK_THROWS_AS(fit_mass_model(rows, graph, frame, bad), Error);
  bad = MassModelConfig{};
  bad.alpha = 0.0;
  CHECK_THROWS_AS(fit_mass_model(rows, graph, frame, bad), Error);
  CHECK_THROWS_AS(fit_mass_model({}, graph, frame, MassModelConfig{}), Error);

  MassModel model = fit_mass_model(rows, graph, frame, MassModelConfig{});
  CHECK_THROWS_AS(feature_support(model, "nope", 1.0, 1), Error);
  CHECK_THROWS_AS(feature_support(model, "size", 1.0, 0), Error);
  CHECK_THROWS_AS(feature_support(model, "size", 1.0, 3), Error);
  CHECK_THROWS_AS(neighbor_support(model, {{7, 1}}, 1), Error);

  auto out_of_frame = rows;
  out_of_frame[0].class_id = 9;
  CHECK_THROWS_AS(fit_mass_model(out_of_frame, graph, frame, MassModelConfig{}), Error);

  CHECK_THROWS_AS(model_from_json("{"), DataError);
  CHECK_THROWS_AS(model_from_json("{\"frame\":[\"A\"]}"), DataError);
}

}  // TEST_SUITE
