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

#include "evc/belief.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "evc/common.hpp"

namespace evc {

namespace {

constexpr double kMassSumTolerance = 1e-9;
constexpr double kConflictEpsilon = 1e-12;

}  // namespace

Frame::Frame(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error("frame must hold at least one label");
  if (labels_.size() > 16) {
    throw Error("frame holds " + std::to_string(labels_.size()) + " labels, maximum is 16");
  }
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (label.empty()) throw Error("frame labels must be nonempty");
    if (!seen.insert(label).second) throw Error("duplicate frame label: " + label);
  }
}

int Frame::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  return -1;
}

FocalSet singleton(const Frame& frame, const std::string& label) {
  int i = frame.index_of(label);
  if (i < 0) throw Error("label not in frame: " + label);
  return FocalSet{1u << i};
}

FocalSet subset(const Frame& frame, const std::vector<std::string>& labels) {
  FocalSet s;
  for (const auto& label : labels) s.bits |= singleton(frame, label).bits;
  return s;
}

MassFunction::MassFunction(Frame frame, std::map<FocalSet, double> focal)
    : frame_(std::move(frame)), focal_(std::move(focal)) {
  double sum = 0.0;
  for (const auto& [set, mass] : focal_) {
    if (set.empty()) throw Error("mass assigned to the empty set");
    if ((set.bits & ~frame_.full_mask()) != 0) throw Error("focal element outside the frame");
    if (!(mass > 0.0)) throw Error("focal element with non-positive mass");
    sum += mass;
  }
  if (std::fabs(sum - 1.0) > kMassSumTolerance) {
    throw Error("masses sum to " + std::to_string(sum) + ", expected 1");
  }
}

MassFunction MassFunction::vacuous(Frame frame) {
  std::map<FocalSet, double> focal{{FocalSet{frame.full_mask()}, 1.0}};
  return MassFunction(std::move(frame), std::move(focal));
}

double MassFunction::mass(FocalSet s) const {
  auto it = focal_.find(s);
  return it == focal_.end() ? 0.0 : it->second;
}

MassFunction from_simple_support(const Frame& frame, FocalSet focus, double degree) {
  if (focus.empty()) throw Error("simple support focus must be nonempty");
  if ((focus.bits & ~frame.full_mask()) != 0) throw Error("focus outside the frame");
  if (!(degree >= 0.0 && degree <= 1.0)) {
    throw Error("support degree " + std::to_string(degree) + " outside [0,1]");
  }
  std::map<FocalSet, double> focal;
  if (degree > 0.0) focal[focus] = degree;
  if (degree < 1.0) focal[FocalSet{frame.full_mask()}] += 1.0 - degree;
  return MassFunction(frame, std::move(focal));
}

MassFunction from_simple_support(const Frame& frame, const SimpleSupport& support) {
  return from_simple_support(frame, support.focus, support.degree);
}

MassFunction combine(const MassFunction& m1, const MassFunction& m2) {
  if (!(m1.frame() == m2.frame())) throw Error("combine requires a shared frame");

  // Contributions per output subset are sorted before summation: the multiset
  // of products is independent of operand order, so the folded sums (and the
  // conflict K) come out bit-identical either way.
  std::map<FocalSet, std::vector<double>> contributions;
  std::vector<double> conflict;
  for (const auto& [x, mx] : m1.focal()) {
    for (const auto& [y, my] : m2.focal()) {
      FocalSet c = x & y;
      double product = mx * my;
      if (c.empty()) {
        conflict.push_back(product);
      } else {
        contributions[c].push_back(product);
      }
    }
  }

  std::sort(conflict.begin(), conflict.end());
  double k = 0.0;
  for (double p : conflict) k += p;
  double remainder = 1.0 - k;
  if (remainder <= kConflictEpsilon) {
    throw ConflictError("completely conflicting evidence: K = " + std::to_string(k));
  }

  std::map<FocalSet, double> focal;
  for (auto& [set, products] : contributions) {
    std::sort(products.begin(), products.end());
    double sum = 0.0;
    for (double p : products) sum += p;
    double mass = sum / remainder;
    if (mass > 0.0) focal[set] = mass;
  }
  return MassFunction(m1.frame(), std::move(focal));
}

MassFunction combine_all(const Frame& frame, const std::vector<MassFunction>& masses) {
  MassFunction acc = MassFunction::vacuous(frame);
  for (const auto& m : masses) acc = combine(acc, m);
  return acc;
}

double belief(const MassFunction& m, FocalSet p) {
  if ((p.bits & ~m.frame().full_mask()) != 0) throw Error("belief query outside the frame");
  double sum = 0.0;
  for (const auto& [set, mass] : m.focal()) {
    if (set.subset_of(p)) sum += mass;
  }
  return sum;
}

EvidentialInterval interval(const MassFunction& m, FocalSet p) {
  FocalSet complement{m.frame().full_mask() & ~p.bits};
  return EvidentialInterval{belief(m, p), 1.0 - belief(m, complement)};
}

std::string mass_to_json(const MassFunction& m) {
  nlohmann::json j;
  j["frame"] = m.frame().labels();
  auto focal = nlohmann::json::array();
  for (const auto& [set, mass] : m.focal()) {
    auto labels = nlohmann::json::array();
    for (std::size_t i = 0; i < m.frame().size(); ++i) {
      if (set.contains(i)) labels.push_back(m.frame().label(i));
    }
    focal.push_back({{"set", labels}, {"mass", mass}});
  }
  j["focal"] = focal;
  return j.dump(2);
}

MassFunction mass_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mass function JSON parse error: ") + e.what());
  }
  try {
    Frame frame(j.at("frame").get<std::vector<std::string>>());
    std::map<FocalSet, double> focal;
    for (const auto& entry : j.at("focal")) {
      FocalSet set = subset(frame, entry.at("set").get<std::vector<std::string>>());
      focal[set] += entry.at("mass").get<double>();
    }
    return MassFunction(std::move(frame), std::move(focal));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mass function JSON schema error: ") + e.what());
  }
}

}  // namespace evc
