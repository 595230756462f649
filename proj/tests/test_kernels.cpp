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

#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "evc/kernels.hpp"

namespace {

using namespace evc::kernels;

// Every ISA variant must equal the scalar reference bit for bit, so the
// comparisons below are raw byte comparisons, never approximate ones.
template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::vector<std::uint16_t> random_u16(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(0, 65535);
  std::vector<std::uint16_t> v(n);
  for (auto& x : v) x = static_cast<std::uint16_t>(d(rng));
  return v;
}

std::vector<float> random_f32(std::mt19937_64& rng, std::size_t n, float lo, float hi) {
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<double> random_f64(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

const std::size_t kPixelCounts[] = {1, 3, 4, 5, 8, 9, 17, 64, 1000};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("registry lists scalar first and active is registered") {
  const auto& sets = available();
  REQUIRE(!sets.empty());
  CHECK(std::string(sets[0]->name) == "scalar");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      CHECK(std::string(sets[i]->name) != std::string(sets[j]->name));
    }
  }
  bool found = false;
  for (const auto* set : sets) {
    if (set == &active()) found = true;
  }
  CHECK(found);
}

TEST_CASE("weighted_plane variants match scalar bitwise") {
  std::mt19937_64 rng(7001);
  for (const auto* set : available()) {
    if (set == &scalar()) continue;
    for (std::size_t n : kPixelCounts) {
      for (std::size_t bands : {std::size_t{1}, std::size_t{3}, std::size_t{4}}) {
        auto samples = random_u16(rng, n * bands);
        auto weights = random_f64(rng, bands, 0.0, 1.0);
        std::vector<float> ref(n), got(n);
        scalar().weighted_plane(samples.data(), n, bands, weights.data(), ref.data());
        set->weighted_plane(samples.data(), n, bands, weights.data(), got.data());
        CAPTURE(set->name);
        CAPTURE(n);
        CAPTURE(bands);
        CHECK(same_bits(ref, got));
      }
    }
  }
}

TEST_CASE("roberts_plane variants match scalar bitwise") {
  std::mt19937_64 rng(7002);
  const std::pair<std::size_t, std::size_t> shapes[] = {
      {1, 1}, {2, 2}, {3, 3}, {8, 5}, {9, 4}, {17, 9}, {64, 33}, {130, 7}};
  for (const auto* set : available()) {
    if (set == &scalar()) continue;
    for (auto [w, h] : shapes) {
      auto plane = random_f32(rng, w * h, -70000.0f, 70000.0f);
      std::vector<float> ref(w * h, -1.0f), got(w * h, -2.0f);
      scalar().roberts_plane(plane.data(), w, h, ref.data());
      set->roberts_plane(plane.data(), w, h, got.data());
      CAPTURE(set->name);
      CAPTURE(w);
      CAPTURE(h);
      CHECK(same_bits(ref, got));
    }
  }
}

TEST_CASE("minmax_u16 variants match scalar") {
  std::mt19937_64 rng(7003);
  for (const auto* set : available()) {
    if (set == &scalar()) continue;
    for (std::size_t n : kPixelCounts) {
      auto v = random_u16(rng, n);
      std::uint16_t ref_mn = 1, ref_mx = 2, got_mn = 3, got_mx = 4;
      scalar().minmax_u16(v.data(), n, &ref_mn, &ref_mx);
      set->minmax_u16(v.data(), n, &got_mn, &got_mx);
      CAPTURE(set->name);
      CAPTURE(n);
      CHECK(ref_mn == got_mn);
      CHECK(ref_mx == got_mx);
    }
  }
}

TEST_CASE("gauss_score_plane variants match scalar bitwise") {
  std::mt19937_64 rng(7004);
  for (const auto* set : available()) {
    if (set == &scalar()) continue;
    for (std::size_t n : kPixelCounts) {
      for (std::size_t bands : {std::size_t{1}, std::size_t{3}, std::size_t{4}}) {
        auto samples = random_u16(rng, n * bands);
        auto mean = random_f64(rng, bands, 0.0, 65535.0);
        auto inv_cov = random_f64(rng, bands * bands, -1e-4, 1e-4);
        double log_const = random_f64(rng, 1, -50.0, 0.0)[0];
        std::vector<double> ref(n), got(n);
        scalar().gauss_score_plane(samples.data(), n, bands, mean.data(), inv_cov.data(),
                                   log_const, ref.data());
        set->gauss_score_plane(samples.data(), n, bands, mean.data(), inv_cov.data(),
                               log_const, got.data());
        CAPTURE(set->name);
        CAPTURE(n);
        CAPTURE(bands);
        CHECK(same_bits(ref, got));
      }
    }
  }
}

TEST_CASE("argmax_merge variants match scalar, ties keep earlier id") {
  std::mt19937_64 rng(7005);
  for (const auto* set : available()) {
    if (set == &scalar()) continue;
    for (std::size_t n : kPixelCounts) {
      auto best0 = random_f64(rng, n, -100.0, 100.0);
      auto scores = random_f64(rng, n, -100.0, 100.0);
      // Exact ties at every third position: strict '>' must leave id alone.
      for (std::size_t i = 0; i < n; i += 3) scores[i] = best0[i];
      std::vector<double> ref_best = best0, got_best = best0;
      std::vector<std::int32_t> ref_id(n, 1), got_id(n, 1);
      scalar().argmax_merge(scores.data(), n, 2, ref_best.data(), ref_id.data());
      set->argmax_merge(scores.data(), n, 2, got_best.data(), got_id.data());
      CAPTURE(set->name);
      CAPTURE(n);
      CHECK(same_bits(ref_best, got_best));
      CHECK(same_bits(ref_id, got_id));
      for (std::size_t i = 0; i < n; i += 3) CHECK(ref_id[i] == 1);
    }
  }
}

}  // TEST_SUITE
