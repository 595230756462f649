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

#include "evc/kernels.hpp"

#include <cstdlib>
#include <string>

#include "evc/common.hpp"

namespace evc::kernels {

#if EVC_HAVE_AVX2
const KernelSet& avx2();
#endif

const std::vector<const KernelSet*>& available() {
  static const std::vector<const KernelSet*> sets = [] {
    std::vector<const KernelSet*> s;
    s.push_back(&scalar());
#if EVC_HAVE_AVX2
    if (__builtin_cpu_supports("avx2")) s.push_back(&avx2());
#endif
    return s;
  }();
  return sets;
}

const KernelSet& active() {
  static const KernelSet* chosen = [] {
    const char* pin = std::getenv("EVC_KERNELS");
    if (pin != nullptr && *pin != '\0') {
      for (const KernelSet* set : available()) {
        if (std::string(pin) == set->name) return set;
      }
      throw Error("EVC_KERNELS names an unavailable kernel set: " + std::string(pin));
    }
    return available().back();
  }();
  return *chosen;
}

}  // namespace evc::kernels
