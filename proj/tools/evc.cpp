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

// Batch pipeline driver: synth, preclassify, fit, classify, eval, report.
// Every artifact-producing run writes a byte-stable manifest next to its
// output; wall-clock timestamps live in a separate .stamp file so reruns
// stay byte-identical.

#include <algorithm>
#include <chrono>
#include <clocale>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evc/classifier.hpp"
#include "evc/common.hpp"
#include "evc/eval_report.hpp"
#include "evc/kernels.hpp"
#include "evc/mass_model.hpp"
#include "evc/raster.hpp"
#include "evc/regions.hpp"
#include "evc/synth.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw evc::DataError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw evc::DataError("cannot write " + path);
  out << text;
  if (!out.good()) throw evc::DataError("cannot write " + path);
}

std::string hash_hex(const std::string& text) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << evc::fnv1a64(text);
  return out.str();
}

// Manifest: canonical (alphabetically keyed) JSON describing the run, plus a
// sibling .stamp file carrying the only volatile value, the completion time.
void write_manifest(const std::string& manifest_path, const std::string& stamp_path,
                    const std::string& subcommand, const nlohmann::json& config,
                    const std::map<std::string, std::string>& inputs,
                    const std::map<std::string, std::string>& outputs) {
  nlohmann::json manifest;
  manifest["config"] = config;
  manifest["config_hash"] = hash_hex(config.dump());
  manifest["inputs"] = inputs;
  manifest["outputs"] = outputs;
  manifest["subcommand"] = subcommand;
  manifest["tool"] = "evc";
  manifest["version"] = evc::kVersion;
  spit(manifest_path, manifest.dump(2) + "\n");

  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  spit(stamp_path, std::string(buffer) + "\n");
}

std::string frame_to_json_text(const evc::Frame& frame) {
  nlohmann::json j;
  j["labels"] = frame.labels();
  return j.dump(2) + "\n";
}

evc::Frame frame_from_json_text(const std::string& text, const std::string& origin) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    return evc::Frame{j.at("labels").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw evc::DataError("bad frame JSON in " + origin + ": " + e.what());
  }
}

// Frame resolution: an explicit --frame file wins; otherwise a frame.json
// next to the label map; otherwise generic labels C1..Ck up to the largest
// label observed.
evc::Frame resolve_frame(const std::string& frame_path, const std::string& sibling_of,
                         const std::vector<const evc::LabelMap*>& maps) {
  if (!frame_path.empty()) {
    return frame_from_json_text(slurp(frame_path), frame_path);
  }
  const fs::path sibling = fs::path(sibling_of).parent_path() / "frame.json";
  if (fs::exists(sibling)) {
    return frame_from_json_text(slurp(sibling.string()), sibling.string());
  }
  std::uint8_t max_label = 0;
  for (const evc::LabelMap* map : maps) {
    for (std::uint8_t v : map->labels) max_label = std::max(max_label, v);
  }
  if (max_label == 0) throw evc::DataError("label maps carry no labels to derive a frame from");
  std::vector<std::string> labels;
  for (int i = 1; i <= max_label; ++i) labels.push_back("C" + std::to_string(i));
  return evc::Frame{labels};
}

// The seeded training subset shared by preclassify and fit: both label the
// same truth map, so the same fraction and seed select the same regions.
std::vector<evc::Region> training_regions(const evc::LabelMap& truth, double fraction,
                                          std::uint64_t seed) {
  std::vector<evc::Region> regions = evc::label_all(truth);
  if (regions.empty()) throw evc::DataError("truth map has no labeled pixels");
  std::vector<int> selected = evc::select_training(regions, fraction, seed);
  std::vector<evc::Region> picked;
  picked.reserve(selected.size());
  for (int id : selected) picked.push_back(regions[static_cast<std::size_t>(id)]);
  return picked;
}

struct SynthArgs {
  std::string spec_path;
  std::string out_dir;
};

int run_synth(const SynthArgs& args) {
  evc::SceneSpec spec = evc::scene_from_json(slurp(args.spec_path));
  evc::Scene scene = evc::generate_scene(spec);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  const std::string raster_path = (dir / "raster.json").string();
  const std::string truth_path = (dir / "truth.pgm").string();
  const std::string frame_path = (dir / "frame.json").string();
  evc::write_raster(scene.raster, raster_path);
  evc::write_labelmap(scene.truth, truth_path);
  spit(frame_path, frame_to_json_text(spec.frame));

  write_manifest((dir / "manifest.json").string(), (dir / "manifest.stamp").string(), "synth",
                 nlohmann::json::parse(evc::scene_to_json(spec)),
                 {{"spec", args.spec_path}},
                 {{"raster", raster_path},
                  {"raster_payload", (dir / "raster.raw").string()},
                  {"truth", truth_path},
                  {"frame", frame_path}});
  std::cout << "scene " << scene.raster.width << "x" << scene.raster.height << "x"
            << scene.raster.bands << " -> " << args.out_dir << "\n";
  return 0;
}

struct PreclassifyArgs {
  std::string raster_path;
  std::string labels_path;
  std::string out_path;
  std::string frame_path;
  double train_fraction = 0.3;
  std::uint64_t seed = 1;
};

int run_preclassify(const PreclassifyArgs& args) {
  evc::Raster raster = evc::read_raster(args.raster_path);
  evc::LabelMap truth = evc::read_labelmap(args.labels_path);
  evc::Frame frame = resolve_frame(args.frame_path, args.labels_path, {&truth});
  evc::validate_labels(truth, frame);

  // Train the Gaussians on the selected region subset only.
  evc::LabelMap training;
  training.width = truth.width;
  training.height = truth.height;
  training.labels.assign(truth.labels.size(), 0);
  for (const evc::Region& region : training_regions(truth, args.train_fraction, args.seed)) {
    for (const auto& [r, c] : region.pixels) {
      training.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          static_cast<std::uint8_t>(region.class_id);
    }
  }

  evc::GaussianModel model = evc::fit_gaussians(raster, training, frame);
  evc::LabelMap out = evc::bayes_preclassify(raster, model);
  evc::write_labelmap(out, args.out_path);

  nlohmann::json config;
  config["frame"] = frame.labels();
  config["kernels"] = evc::kernels::active().name;
  config["seed"] = args.seed;
  config["train_fraction"] = args.train_fraction;
  write_manifest(args.out_path + ".manifest.json", args.out_path + ".stamp", "preclassify",
                 config, {{"raster", args.raster_path}, {"train_labels", args.labels_path}},
                 {{"preclass", args.out_path}});
  if (!model.excluded_classes.empty()) {
    std::cerr << "note: " << model.excluded_classes.size()
              << " class(es) had no training pixels and were excluded\n";
  }
  std::cout << "preclassified " << raster.width << "x" << raster.height << " -> "
            << args.out_path << "\n";
  return 0;
}

struct FitArgs {
  std::string raster_path;
  std::string labels_path;
  std::string frame_path;
  std::string out_path;
  double train_fraction = 0.3;
  std::uint64_t seed = 1;
  evc::MassModelConfig config;
};

int run_fit(const FitArgs& args) {
  evc::Raster raster = evc::read_raster(args.raster_path);
  evc::LabelMap truth = evc::read_labelmap(args.labels_path);
  evc::Frame frame = frame_from_json_text(slurp(args.frame_path), args.frame_path);

  evc::AdjacencyGraph graph;
  std::vector<evc::TrainingRow> rows =
      evc::training_rows_from_truth(raster, truth, frame, evc::FeatureConfig{}, &graph);

  std::vector<evc::Region> picked = training_regions(truth, args.train_fraction, args.seed);
  std::vector<int> keep;
  keep.reserve(picked.size());
  for (const evc::Region& region : picked) keep.push_back(region.id);
  std::vector<evc::TrainingRow> selected;
  selected.reserve(keep.size());
  for (const evc::TrainingRow& row : rows) {
    if (std::binary_search(keep.begin(), keep.end(), row.region_id)) selected.push_back(row);
  }

  evc::MassModel model = evc::fit_mass_model(selected, graph, frame, args.config);
  spit(args.out_path, evc::model_to_json(model));

  nlohmann::json config;
  config["alpha"] = args.config.alpha;
  config["bins"] = args.config.bins;
  config["frame"] = frame.labels();
  config["s_max"] = args.config.s_max;
  config["seed"] = args.seed;
  config["train_fraction"] = args.train_fraction;
  write_manifest(args.out_path + ".manifest.json", args.out_path + ".stamp", "fit", config,
                 {{"frame", args.frame_path},
                  {"labels", args.labels_path},
                  {"raster", args.raster_path}},
                 {{"model", args.out_path}});
  if (!model.sparse_classes.empty()) {
    std::cerr << "note: sparse classes with no training region:";
    for (const std::string& label : model.sparse_classes) std::cerr << " " << label;
    std::cerr << "\n";
  }
  std::cout << "fitted mass model over " << selected.size() << " of " << rows.size()
            << " regions -> " << args.out_path << "\n";
  return 0;
}

struct ClassifyArgs {
  std::string raster_path;
  std::string preclass_path;
  std::string model_path;
  std::string out_path;
  std::string report_path;
  std::string features_csv;
  evc::PipelineConfig config;
};

int run_classify(const ClassifyArgs& args) {
  evc::Raster raster = evc::read_raster(args.raster_path);
  evc::LabelMap preclass = evc::read_labelmap(args.preclass_path);
  evc::MassModel model = evc::model_from_json(slurp(args.model_path));

  evc::PipelineConfig config = args.config;
  if (!args.features_csv.empty()) {
    config.enabled_features.clear();
    std::istringstream in(args.features_csv);
    std::string token;
    while (std::getline(in, token, ',')) {
      if (!token.empty()) config.enabled_features.push_back(token);
    }
  }

  evc::EvidentialResult result = evc::evidential_classify(raster, preclass, model, config);
  evc::write_labelmap(result.labels, args.out_path);
  std::map<std::string, std::string> outputs{{"labels", args.out_path}};
  if (!args.report_path.empty()) {
    spit(args.report_path, evc::report_to_json(result.report) + "\n");
    outputs["report"] = args.report_path;
  }

  nlohmann::json config_json;
  config_json["accept_pls"] = config.accept_pls;
  config_json["accept_spt"] = config.accept_spt;
  config_json["features"] = config.enabled_features;
  config_json["kernels"] = evc::kernels::active().name;
  config_json["max_merge_iters"] = config.max_merge_iters;
  write_manifest(args.out_path + ".manifest.json", args.out_path + ".stamp", "classify",
                 config_json,
                 {{"model", args.model_path},
                  {"preclass", args.preclass_path},
                  {"raster", args.raster_path}},
                 outputs);
  std::cout << "regions " << result.report.initial_regions << " -> "
            << result.report.final_regions << " after " << result.report.merges
            << " merge(s) in " << result.report.passes << " pass(es)"
            << (result.report.all_accepted ? ", all accepted" : "") << " -> "
            << args.out_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string truth_path;
  std::string pred_path;
  std::string out_path;
  std::string frame_path;
};

int run_eval(const EvalArgs& args) {
  evc::LabelMap truth = evc::read_labelmap(args.truth_path);
  evc::LabelMap pred = evc::read_labelmap(args.pred_path);
  evc::Frame frame = resolve_frame(args.frame_path, args.truth_path, {&truth, &pred});

  evc::ContingencyTable table = evc::contingency(truth, pred, frame);
  spit(args.out_path, evc::table_to_csv(table));

  evc::AccuracyReport report = evc::accuracy_report(table);
  std::ostringstream overall;
  overall << std::fixed << std::setprecision(2) << report.overall;
  std::cout << "overall accuracy " << overall.str() << " -> " << args.out_path << "\n";

  nlohmann::json config;
  config["frame"] = frame.labels();
  write_manifest(args.out_path + ".manifest.json", args.out_path + ".stamp", "eval", config,
                 {{"predicted", args.pred_path}, {"truth", args.truth_path}},
                 {{"table", args.out_path}});
  return 0;
}

struct ReportArgs {
  std::vector<std::string> tables;
  std::string out_path;
};

int run_report(const ReportArgs& args) {
  evc::ParsedTable a = evc::table_from_csv(slurp(args.tables[0]));
  evc::ParsedTable b = evc::table_from_csv(slurp(args.tables[1]));

  std::ostringstream out;
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string& path = args.tables[i];
    const evc::ParsedTable& parsed = i == 0 ? a : b;
    for (const std::string& flag : evc::consistency_flags(parsed)) {
      out << path << ": " << flag << "\n";
    }
  }
  out << evc::compare_tables(a, b, fs::path(args.tables[0]).filename().string(),
                             fs::path(args.tables[1]).filename().string());

  std::cout << out.str();
  if (!args.out_path.empty()) {
    spit(args.out_path, out.str());
    nlohmann::json config;
    config["tables"] = args.tables;
    write_manifest(args.out_path + ".manifest.json", args.out_path + ".stamp", "report", config,
                   {{"table_a", args.tables[0]}, {"table_b", args.tables[1]}},
                   {{"comparison", args.out_path}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");

  CLI::App app{"Evidential contextual classification pipeline"};
  app.set_version_flag("--version", evc::kVersion);
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a seeded synthetic scene");
  synth->add_option("--spec", synth_args.spec_path, "Scene spec JSON")->required();
  synth->add_option("-o,--out", synth_args.out_dir, "Output directory")->required();

  PreclassifyArgs pre_args;
  CLI::App* pre = app.add_subcommand("preclassify", "Pixelwise Bayes maximum-likelihood labels");
  pre->add_option("--raster", pre_args.raster_path, "Raster header JSON")->required();
  pre->add_option("--train-labels", pre_args.labels_path, "Ground-truth label map (PGM)")
      ->required();
  pre->add_option("-o,--out", pre_args.out_path, "Output label map (PGM)")->required();
  pre->add_option("--frame", pre_args.frame_path, "Frame JSON (default: frame.json beside labels)");
  pre->add_option("--train-fraction", pre_args.train_fraction,
                  "Fraction of truth regions used for training")
      ->capture_default_str();
  pre->add_option("--seed", pre_args.seed, "Training selection seed")->capture_default_str();

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit the evidential mass model");
  fit->add_option("--raster", fit_args.raster_path, "Raster header JSON")->required();
  fit->add_option("--labels", fit_args.labels_path, "Ground-truth label map (PGM)")->required();
  fit->add_option("--frame", fit_args.frame_path, "Frame JSON")->required();
  fit->add_option("-o,--out", fit_args.out_path, "Output model JSON")->required();
  fit->add_option("--train-fraction", fit_args.train_fraction,
                  "Fraction of truth regions used for training")
      ->capture_default_str();
  fit->add_option("--seed", fit_args.seed, "Training selection seed")->capture_default_str();
  fit->add_option("--bins", fit_args.config.bins, "Histogram bins")->capture_default_str();
  fit->add_option("--s-max", fit_args.config.s_max, "Maximum support degree")
      ->capture_default_str();
  fit->add_option("--alpha", fit_args.config.alpha, "Histogram smoothing pseudo-count")
      ->capture_default_str();

  ClassifyArgs cls_args;
  CLI::App* cls = app.add_subcommand("classify", "Evidential contextual refinement");
  cls->add_option("--raster", cls_args.raster_path, "Raster header JSON")->required();
  cls->add_option("--preclass", cls_args.preclass_path, "Preclassification label map (PGM)")
      ->required();
  cls->add_option("--model", cls_args.model_path, "Mass model JSON")->required();
  cls->add_option("-o,--out", cls_args.out_path, "Output label map (PGM)")->required();
  cls->add_option("--report", cls_args.report_path, "Decision report JSON");
  cls->add_option("--spt", cls_args.config.accept_spt, "Minimum support to accept")
      ->capture_default_str();
  cls->add_option("--pls", cls_args.config.accept_pls, "Minimum plausibility to accept")
      ->capture_default_str();
  cls->add_option("--max-iters", cls_args.config.max_merge_iters, "Maximum merge passes")
      ->capture_default_str();
  cls->add_option("--features", cls_args.features_csv,
                  "Comma-separated evidence list (default size,mean_b*,neighbor)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Contingency table and accuracies");
  eval->add_option("--truth", eval_args.truth_path, "Ground-truth label map (PGM)")->required();
  eval->add_option("--pred", eval_args.pred_path, "Predicted label map (PGM)")->required();
  eval->add_option("-o,--out", eval_args.out_path, "Output CSV table")->required();
  eval->add_option("--frame", eval_args.frame_path, "Frame JSON (default: frame.json beside truth)");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Compare two accuracy tables");
  report->add_option("--tables", report_args.tables, "Two CSV tables to compare")
      ->expected(2)
      ->required();
  report->add_option("-o,--out", report_args.out_path, "Also write the comparison to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean, usage errors exit 2
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (pre->parsed()) return run_preclassify(pre_args);
    if (fit->parsed()) return run_fit(fit_args);
    if (cls->parsed()) return run_classify(cls_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (report->parsed()) return run_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
