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

#include "evc/eval_report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "evc/common.hpp"

namespace evc {

namespace {

std::string percent(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else if (ch != '\r') {
      current += ch;
    }
  }
  fields.push_back(current);
  return fields;
}

long long parse_count(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad count '" + s + "' in " + context);
  }
}

double parse_percent(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad percentage '" + s + "' in " + context);
  }
}

}  // namespace

ContingencyTable contingency(const LabelMap& truth, const LabelMap& predicted,
                             const Frame& frame) {
  if (truth.width != predicted.width || truth.height != predicted.height) {
    throw DataError("truth map " + std::to_string(truth.width) + "x" +
                    std::to_string(truth.height) + " does not match prediction " +
                    std::to_string(predicted.width) + "x" + std::to_string(predicted.height));
  }
  validate_labels(truth, frame);
  validate_labels(predicted, frame);

  ContingencyTable table;
  table.frame = frame;
  table.counts.assign(frame.size() * frame.size(), 0);
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == 0 || predicted.labels[i] == 0) continue;
    table.at(truth.labels[i] - 1u, predicted.labels[i] - 1u) += 1;
  }
  return table;
}

AccuracyReport accuracy_report(const ContingencyTable& table) {
  const std::size_t n = table.frame.size();
  AccuracyReport report;
  report.per_class.assign(n, 0.0);
  report.empty_rows.assign(n, 0);
  long long grand = 0;
  long long trace = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long long row = 0;
    for (std::size_t j = 0; j < n; ++j) row += table.at(i, j);
    grand += row;
    trace += table.at(i, i);
    if (row == 0) {
      report.empty_rows[i] = 1;
    } else {
      report.per_class[i] =
          100.0 * static_cast<double>(table.at(i, i)) / static_cast<double>(row);
    }
  }
  if (grand == 0) throw DataError("contingency table has no counted pixels");
  report.overall = 100.0 * static_cast<double>(trace) / static_cast<double>(grand);
  return report;
}

std::string table_to_csv(const ContingencyTable& table) {
  const std::size_t n = table.frame.size();
  AccuracyReport report = accuracy_report(table);

  std::ostringstream out;
  out << "# scale_factor=" << table.scale_factor << "\n";
  out << "CLASS";
  for (const std::string& label : table.frame.labels()) out << "," << label;
  out << ",TOTAL,ACC\n";

  std::vector<long long> col_totals(n, 0);
  long long grand = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long long row = 0;
    out << table.frame.label(i);
    for (std::size_t j = 0; j < n; ++j) {
      long long c = table.at(i, j);
      out << "," << c;
      row += c;
      col_totals[j] += c;
    }
    grand += row;
    out << "," << row << "," << percent(report.per_class[i]) << "\n";
  }
  out << "TOTAL";
  for (std::size_t j = 0; j < n; ++j) out << "," << col_totals[j];
  out << "," << grand << "," << percent(report.overall) << "\n";
  return out.str();
}

ParsedTable table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ParsedTable parsed;
  bool header_seen = false;
  bool total_seen = false;
  std::size_t n = 0;

  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      auto pos = line.find("scale_factor=");
      if (pos != std::string::npos) {
        parsed.table.scale_factor =
            static_cast<int>(parse_count(line.substr(pos + 13), "scale_factor"));
      }
      continue;
    }
    std::vector<std::string> fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() < 4 || fields[0] != "CLASS" || fields[fields.size() - 2] != "TOTAL" ||
          fields.back() != "ACC") {
        throw DataError("table header must be CLASS,<codes...>,TOTAL,ACC");
      }
      std::vector<std::string> labels(fields.begin() + 1, fields.end() - 2);
      parsed.table.frame = Frame(labels);
      n = labels.size();
      parsed.table.counts.assign(n * n, 0);
      parsed.row_present.assign(n, 0);
      parsed.printed_row_totals.assign(n, -1);
      parsed.printed_row_acc.assign(n, std::numeric_limits<double>::quiet_NaN());
      header_seen = true;
      continue;
    }
    if (fields.size() != n + 3) {
      throw DataError("row '" + fields[0] + "' has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(n + 3));
    }
    if (fields[0] == "TOTAL") {
      if (total_seen) throw DataError("duplicate TOTAL row");
      total_seen = true;
      parsed.printed_col_totals.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        parsed.printed_col_totals[j] = parse_count(fields[j + 1], "TOTAL row");
      }
      parsed.printed_grand = parse_count(fields[n + 1], "TOTAL row");
      parsed.printed_overall = parse_percent(fields[n + 2], "TOTAL row");
      continue;
    }
    int cls = parsed.table.frame.index_of(fields[0]);
    if (cls < 0) throw DataError("unknown class row '" + fields[0] + "'");
    auto row = static_cast<std::size_t>(cls);
    if (parsed.row_present[row]) throw DataError("duplicate row '" + fields[0] + "'");
    parsed.row_present[row] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      parsed.table.at(row, j) = parse_count(fields[j + 1], "row " + fields[0]);
    }
    parsed.printed_row_totals[row] = parse_count(fields[n + 1], "row " + fields[0]);
    parsed.printed_row_acc[row] = parse_percent(fields[n + 2], "row " + fields[0]);
  }
  if (!header_seen) throw DataError("table CSV has no header");
  return parsed;
}

std::vector<std::string> consistency_flags(const ParsedTable& parsed) {
  std::vector<std::string> flags;
  const std::size_t n = parsed.table.frame.size();
  long long cell_grand = 0;
  long long cell_trace = 0;
  std::vector<long long> col_sums(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const std::string& label = parsed.table.frame.label(i);
    if (!parsed.row_present[i]) {
      flags.push_back("row " + label + " is missing from the table");
      continue;
    }
    long long row_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row_sum += parsed.table.at(i, j);
      col_sums[j] += parsed.table.at(i, j);
    }
    cell_grand += row_sum;
    cell_trace += parsed.table.at(i, i);
    if (parsed.printed_row_totals[i] >= 0 && parsed.printed_row_totals[i] != row_sum) {
      flags.push_back("row " + label + " prints total " +
                      std::to_string(parsed.printed_row_totals[i]) + " but its cells sum to " +
                      std::to_string(row_sum));
    }
    if (!std::isnan(parsed.printed_row_acc[i]) && row_sum > 0) {
      double computed =
          100.0 * static_cast<double>(parsed.table.at(i, i)) / static_cast<double>(row_sum);
      if (std::fabs(computed - parsed.printed_row_acc[i]) > 0.05) {
        flags.push_back("row " + label + " prints accuracy " +
                        percent(parsed.printed_row_acc[i]) + " but its cells give " +
                        percent(computed));
      }
    }
  }
  if (!parsed.printed_col_totals.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      if (parsed.printed_col_totals[j] != col_sums[j]) {
        flags.push_back("column " + parsed.table.frame.label(j) + " prints total " +
                        std::to_string(parsed.printed_col_totals[j]) +
                        " but its cells sum to " + std::to_string(col_sums[j]));
      }
    }
  }
  if (parsed.printed_grand >= 0 && parsed.printed_grand != cell_grand) {
    flags.push_back("grand total prints " + std::to_string(parsed.printed_grand) +
                    " but the cells sum to " + std::to_string(cell_grand));
  }
  if (!std::isnan(parsed.printed_overall) && cell_grand > 0) {
    double computed = 100.0 * static_cast<double>(cell_trace) / static_cast<double>(cell_grand);
    if (std::fabs(computed - parsed.printed_overall) > 0.05) {
      flags.push_back("overall accuracy prints " + percent(parsed.printed_overall) +
                      " but the cells give " + percent(computed));
    }
  }
  return flags;
}

std::string compare_tables(const ParsedTable& a, const ParsedTable& b,
                           const std::string& name_a, const std::string& name_b) {
  if (!(a.table.frame == b.table.frame)) {
    throw DataError("tables cover different class frames");
  }
  AccuracyReport ra = accuracy_report(a.table);
  AccuracyReport rb = accuracy_report(b.table);

  std::ostringstream out;
  out << "class        " << name_a << "  vs  " << name_b << "\n";
  for (std::size_t i = 0; i < a.table.frame.size(); ++i) {
    out << std::left << std::setw(12) << a.table.frame.label(i) << " " << std::right
        << std::setw(7) << percent(ra.per_class[i]) << "   " << std::setw(7)
        << percent(rb.per_class[i]) << "   " << std::showpos << std::fixed
        << std::setprecision(2) << (rb.per_class[i] - ra.per_class[i]) << std::noshowpos
        << "\n";
  }
  out << std::left << std::setw(12) << "OVERALL" << " " << std::right << std::setw(7)
      << percent(ra.overall) << "   " << std::setw(7) << percent(rb.overall) << "   "
      << std::showpos << std::fixed << std::setprecision(2) << (rb.overall - ra.overall)
      << std::noshowpos << "\n";
  return out.str();
}

}  // namespace evc
