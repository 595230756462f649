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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

const std::string kCli = EVC_CLI_PATH;

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args).c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: ", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Fresh scratch directory per test binary run.
fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "evc_cli_scratch";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

// Small four-class scene that the whole pipeline can chew through quickly.
fs::path write_small_spec(const std::string& name, int seed) {
  const fs::path path = scratch() / name;
  std::ofstream out(path);
  out << R"({
  "width": 64, "height": 64, "bands": 2,
  "frame": ["K1", "K2", "K3", "K4"],
  "grid_rows": 4, "grid_cols": 4, "boundary_jitter": 2,
  "class_means": [[8000, 20000], [14000, 8000], [20000, 26000], [26000, 14000]],
  "noise_sigma": 1500.0, "mixed_boundary": true, "seed": )"
      << seed << "\n}\n";
  return path;
}

// One full pipeline pass; returns the output directory.
fs::path pipeline(const std::string& dir_name, int seed) {
  const fs::path spec = write_small_spec(dir_name + ".json", seed);
  const fs::path dir = scratch() / dir_name;
  REQUIRE(run("synth --spec " + spec.string() + " -o " + dir.string() +
              " >/dev/null") == 0);
  REQUIRE(run("preclassify --raster " + (dir / "raster.json").string() +
              " --train-labels " + (dir / "truth.pgm").string() + " -o " +
              (dir / "pre.pgm").string() + " >/dev/null") == 0);
  REQUIRE(run("fit --raster " + (dir / "raster.json").string() + " --labels " +
              (dir / "truth.pgm").string() + " --frame " +
              (dir / "frame.json").string() + " -o " +
              (dir / "model.json").string() + " >/dev/null") == 0);
  REQUIRE(run("classify --raster " + (dir / "raster.json").string() +
              " --preclass " + (dir / "pre.pgm").string() + " --model " +
              (dir / "model.json").string() + " -o " +
              (dir / "evid.pgm").string() + " --report " +
              (dir / "report.json").string() + " >/dev/null") == 0);
  REQUIRE(run("eval --truth " + (dir / "truth.pgm").string() + " --pred " +
              (dir / "evid.pgm").string() + " -o " +
              (dir / "table.csv").string() + " >/dev/null") == 0);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2, help and version exit 0") {
  CHECK(run("--help >/dev/null 2>&1") == 0);
  CHECK(run("--version >/dev/null 2>&1") == 0);
  CHECK(run(">/dev/null 2>&1") == 2);               // missing subcommand
  CHECK(run("frobnicate >/dev/null 2>&1") == 2);    // unknown subcommand
  CHECK(run("synth >/dev/null 2>&1") == 2);         // missing required flags
  CHECK(run("synth --spec a.json >/dev/null 2>&1") == 2);
  CHECK(run("eval --truth a --pred b >/dev/null 2>&1") == 2);
  CHECK(run("classify --bogus x >/dev/null 2>&1") == 2);
}

TEST_CASE("missing input files are data errors, exit 1") {
  CHECK(run("synth --spec " + (scratch() / "nope.json").string() + " -o " +
            (scratch() / "out").string() + " >/dev/null 2>&1") == 1);
  CHECK(run("eval --truth nope.pgm --pred nope.pgm -o t.csv >/dev/null 2>&1") ==
        1);
}

TEST_CASE("synth writes the full scene bundle") {
  const fs::path spec = write_small_spec("bundle.json", 5);
  const fs::path dir = scratch() / "bundle";
  REQUIRE(run("synth --spec " + spec.string() + " -o " + dir.string() +
              " >/dev/null") == 0);
  for (const char* name : {"raster.json", "raster.raw", "truth.pgm",
                           "frame.json", "manifest.json", "manifest.stamp"}) {
    CHECK_MESSAGE(fs::exists(dir / name), "missing ", name);
  }
  // The manifest itself is byte-stable; its sole volatile value, the
  // timestamp, lives in the .stamp file.
  const std::string manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find("\"subcommand\": \"synth\"") != std::string::npos);
}

TEST_CASE("dimension mismatches name both shapes and exit 1") {
  const fs::path big = pipeline("mismatch_big", 31);
  const fs::path small_spec = write_small_spec("mismatch_small.json", 32);
  // Shrink one scene so the preclass no longer fits the raster.
  {
    std::string text = slurp(small_spec);
    text.replace(text.find("\"width\": 64"), 11, "\"width\": 48");
    std::ofstream out(small_spec, std::ios::trunc);
    out << text;
  }
  const fs::path small_dir = scratch() / "mismatch_small";
  REQUIRE(run("synth --spec " + small_spec.string() + " -o " +
              small_dir.string() + " >/dev/null") == 0);

  const fs::path log = scratch() / "mismatch.log";
  CHECK(run("classify --raster " + (big / "raster.json").string() +
            " --preclass " + (small_dir / "truth.pgm").string() + " --model " +
            (big / "model.json").string() + " -o " +
            (scratch() / "never.pgm").string() + " 2>" + log.string() +
            " >/dev/null") == 1);
  const std::string message = slurp(log);
  CHECK(message.find("48x64") != std::string::npos);
  CHECK(message.find("64x64") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
  const char* names[] = {"raster.json", "raster.raw", "truth.pgm",
                         "pre.pgm",     "model.json", "evid.pgm",
                         "report.json", "table.csv",  "manifest.json"};
  const fs::path a = pipeline("rerun", 77);
  std::map<std::string, std::string> first;
  for (const char* name : names) first[name] = slurp(a / name);

  fs::remove_all(a);
  const fs::path b = pipeline("rerun", 77);
  for (const char* name : names) {
    CHECK_MESSAGE(first.at(name) == slurp(b / name), std::string(name),
                  " differs between reruns");
  }

  // Different seeds genuinely change the data.
  const fs::path c = pipeline("rerun_c", 78);
  CHECK(first.at("raster.raw") != slurp(c / "raster.raw"));
}

TEST_CASE("eval picks up the frame beside the truth map") {
  const fs::path dir = pipeline("framed", 12);
  const std::string csv = slurp(dir / "table.csv");
  CHECK(csv.find("CLASS,K1,K2,K3,K4,TOTAL,ACC") != std::string::npos);

  // The report subcommand reads the table back and prints the comparison.
  const fs::path out = scratch() / "cmp.txt";
  REQUIRE(run("report --tables " + (dir / "table.csv").string() + " " +
              (dir / "table.csv").string() + " -o " + out.string() +
              " >/dev/null") == 0);
  const std::string cmp = slurp(out);
  CHECK(cmp.find("OVERALL") != std::string::npos);
  CHECK(cmp.find("+0.00") != std::string::npos);
  CHECK(fs::exists(out.string() + ".manifest.json"));
}

TEST_CASE("classify honors threshold and feature flags") {
  const fs::path dir = pipeline("flags", 21);
  // An impossible support threshold forces rejects everywhere; the run must
  // still terminate and write output.
  REQUIRE(run("classify --raster " + (dir / "raster.json").string() +
              " --preclass " + (dir / "pre.pgm").string() + " --model " +
              (dir / "model.json").string() + " -o " +
              (dir / "strict.pgm").string() +
              " --spt 0.99 --pls 0.999 --max-iters 3 --features size,neighbor" +
              " >/dev/null") == 0);
  CHECK(fs::exists(dir / "strict.pgm"));
  const std::string manifest = slurp(dir / "strict.pgm.manifest.json");
  CHECK(manifest.find("\"accept_spt\": 0.99") != std::string::npos);
  CHECK(manifest.find("\"max_merge_iters\": 3") != std::string::npos);
  CHECK(manifest.find("size") != std::string::npos);

  // An unknown evidence feature is a data error.
  CHECK(run("classify --raster " + (dir / "raster.json").string() +
            " --preclass " + (dir / "pre.pgm").string() + " --model " +
            (dir / "model.json").string() + " -o " +
            (dir / "never2.pgm").string() +
            " --features warp >/dev/null 2>&1") == 1);
}

}  // TEST_SUITE
