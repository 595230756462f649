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
#include <limits>
#include <string>
#include <vector>

#include "evc/belief.hpp"
#include "evc/raster.hpp"

// True-class x assigned-class contingency tables, per-class and overall
// accuracy, and a CSV rendering with a TOTAL row and ACC column. The parser
// also ingests published tables whose printed totals and percentages may
// disagree with their own cells; such tables are kept verbatim and their
// inconsistencies surface as flags, never as silent corrections.

namespace evc {

struct ContingencyTable {
  Frame frame{std::vector<std::string>{"unset"}};
  std::vector<long long> counts;  // row-major, row = true class, col = assigned
  int scale_factor = 1;

  long long at(std::size_t true_class, std::size_t assigned_class) const {
    return counts[true_class * frame.size() + assigned_class];
  }
  long long& at(std::size_t true_class, std::size_t assigned_class) {
    return counts[true_class * frame.size() + assigned_class];
  }
};

/// counts[i][j] = pixels with true class i+1 assigned class j+1. Pixels
/// unlabeled in either map are excluded.
ContingencyTable contingency(const LabelMap& truth, const LabelMap& predicted,
                             const Frame& frame);

struct AccuracyReport {
  std::vector<double> per_class;        // percent; 0 for empty rows
  std::vector<std::uint8_t> empty_rows; // flag per class: no true pixels
  double overall = 0.0;                 // percent, trace / grand total
};

AccuracyReport accuracy_report(const ContingencyTable& table);

/// "# scale_factor=N", then "CLASS,<codes...>,TOTAL,ACC", one row per true
/// class, and a trailing TOTAL row; totals and percentages are computed from
/// the counts, percentages to 2 decimals.
std::string table_to_csv(const ContingencyTable& table);

struct ParsedTable {
  ContingencyTable table;
  std::vector<std::uint8_t> row_present;  // classes whose row appears
  // Printed values as found in the file; they may disagree with the cells.
  std::vector<long long> printed_row_totals;  // -1 when absent
  std::vector<double> printed_row_acc;        // NaN when absent
  std::vector<long long> printed_col_totals;  // empty without a TOTAL row
  long long printed_grand = -1;
  double printed_overall = std::numeric_limits<double>::quiet_NaN();
};

/// Inverse of table_to_csv, plus fixture ingestion: class rows may be missing
/// (filled with zeros and flagged absent) and printed totals are kept
/// verbatim for consistency checking.
ParsedTable table_from_csv(const std::string& text);

/// Human-readable descriptions of every disagreement between the printed
/// totals/percentages and what the cells actually sum to (tolerance 0.05 on
/// percentages), plus missing rows. Empty for self-consistent tables.
std::vector<std::string> consistency_flags(const ParsedTable& parsed);

/// Side-by-side accuracy comparison of two parsed tables for terminal output.
std::string compare_tables(const ParsedTable& a, const ParsedTable& b,
                           const std::string& name_a, const std::string& name_b);

}  // namespace evc
