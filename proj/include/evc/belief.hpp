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

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Frames of discernment, mass functions, simple support functions, Dempster's
// combination rule, and belief/plausibility queries. All types are immutable
// values after construction and all operations are pure functions.

namespace evc {

/// An ordered set of mutually exclusive class labels. At most 16 labels, so
/// every subset fits in a 16-bit mask and power-set sums stay tractable.
class Frame {
 public:
  explicit Frame(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  /// Index of a label, -1 when absent.
  int index_of(const std::string& label) const;

  /// Bit mask with one bit per label: the whole frame Θ.
  std::uint32_t full_mask() const { return (1u << labels_.size()) - 1u; }

  bool operator==(const Frame& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
};

/// A subset of one frame's labels, bit i = label i. Meaningful only relative
/// to the frame it was built against.
struct FocalSet {
  std::uint32_t bits = 0;

  bool empty() const { return bits == 0; }
  std::size_t cardinality() const { return static_cast<std::size_t>(std::popcount(bits)); }
  bool subset_of(FocalSet other) const { return (bits & ~other.bits) == 0; }
  bool contains(std::size_t label_index) const { return (bits >> label_index) & 1u; }

  friend FocalSet operator&(FocalSet a, FocalSet b) { return FocalSet{a.bits & b.bits}; }
  auto operator<=>(const FocalSet&) const = default;
};

/// The subset holding exactly one label.
FocalSet singleton(const Frame& frame, const std::string& label);

/// The subset holding the given labels; unknown labels are an error.
FocalSet subset(const Frame& frame, const std::vector<std::string>& labels);

/// Θ as a FocalSet.
inline FocalSet theta(const Frame& frame) { return FocalSet{frame.full_mask()}; }

/// A mass distribution over focal elements: every stored subset is nonempty
/// and carries strictly positive mass, and the masses sum to 1 within 1e-9.
class MassFunction {
 public:
  MassFunction(Frame frame, std::map<FocalSet, double> focal);

  static MassFunction vacuous(Frame frame);

  const Frame& frame() const { return frame_; }
  const std::map<FocalSet, double>& focal() const { return focal_; }

  /// Mass of one subset; 0 when it is not a focal element.
  double mass(FocalSet s) const;

 private:
  Frame frame_;
  std::map<FocalSet, double> focal_;
};

/// One feature's evidence: degree s toward a single focus, ignorance 1-s.
struct SimpleSupport {
  FocalSet focus;
  double degree = 0.0;
};

/// [Spt(P), Pls(P)]: the interval bracketing the credibility of P.
struct EvidentialInterval {
  double spt = 0.0;
  double pls = 1.0;
};

/// {focus: degree, Θ: 1-degree}, dropping zero-mass entries. degree 0 yields
/// the vacuous mass function, degree 1 the categorical one.
MassFunction from_simple_support(const Frame& frame, FocalSet focus, double degree);
MassFunction from_simple_support(const Frame& frame, const SimpleSupport& support);

/// Dempster's orthogonal sum. Mass landing on the empty set (conflict K) is
/// discarded and the rest renormalized by 1/(1-K). Throws ConflictError when
/// 1-K <= 1e-12. Per-subset product contributions are summed in sorted order,
/// which makes the operation exactly commutative.
MassFunction combine(const MassFunction& m1, const MassFunction& m2);

/// Left fold of combine. The empty sequence yields the vacuous mass function,
/// which is the identity of the orthogonal sum.
MassFunction combine_all(const Frame& frame, const std::vector<MassFunction>& masses);

/// Bel(p) = sum of masses of focal elements contained in p.
double belief(const MassFunction& m, FocalSet p);

/// spt = Bel(p); pls = 1 - Bel(Θ∖p).
EvidentialInterval interval(const MassFunction& m, FocalSet p);

/// {"frame": [labels...], "focal": [{"set": [labels...], "mass": n}, ...]};
/// masses round-trip bit-exactly.
std::string mass_to_json(const MassFunction& m);
MassFunction mass_from_json(const std::string& text);

}  // namespace evc
