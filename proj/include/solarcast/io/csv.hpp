/*
 * Copyright 2026 The solarcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SOLARCAST_IO_CSV_HPP_
#define SOLARCAST_IO_CSV_HPP_

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "solarcast/common.hpp"

namespace solarcast {

// Comma-separated, UTF-8, mandatory header, '.' decimal separator, no quoting
// (no field produced or consumed by this toolkit contains a comma).
struct csv_table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  int col_required(const std::string& name) const {
    int c = col(name);
    if (c < 0)
      throw data_error(path + ": missing required column '" + name + "'");
    return c;
  }

  // 1-based data row number as it appears in the file (header is line 1)
  long file_line(size_t row_index) const { return static_cast<long>(row_index) + 2; }
};

inline csv_table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  csv_table t;
  t.path = path;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.empty()) throw data_error(path + ": empty header line");
    if (!first && line.empty()) continue;
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw data_error(path + " line " +
                         std::to_string(t.rows.size() + 2) + ": expected " +
                         std::to_string(t.header.size()) + " fields, got " +
                         std::to_string(cells.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw data_error(path + ": empty file");
  return t;
}

class csv_writer {
 public:
  explicit csv_writer(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw data_error("cannot write " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw data_error("failed writing " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

// Numeric cell helpers: empty cells mean "absent", anything else must parse.
inline bool cell_present(const std::string& s) { return !trim(s).empty(); }

inline double cell_double(const csv_table& t, size_t row, int col) {
  const std::string& s = t.rows[row][static_cast<size_t>(col)];
  double v;
  if (!parse_double(s, v) || !std::isfinite(v))
    throw data_error(t.path + " line " + std::to_string(t.file_line(row)) +
                     ": cannot parse '" + s + "' in column '" +
                     t.header[static_cast<size_t>(col)] + "'");
  return v;
}

inline long long cell_long(const csv_table& t, size_t row, int col) {
  const std::string& s = t.rows[row][static_cast<size_t>(col)];
  long long v;
  if (!parse_long(s, v))
    throw data_error(t.path + " line " + std::to_string(t.file_line(row)) +
                     ": cannot parse '" + s + "' in column '" +
                     t.header[static_cast<size_t>(col)] + "'");
  return v;
}

}  // namespace solarcast

#endif  // SOLARCAST_IO_CSV_HPP_
