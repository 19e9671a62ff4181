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
#ifndef SOLARCAST_IO_REPORTS_HPP_
#define SOLARCAST_IO_REPORTS_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "solarcast/engines/engine.hpp"
#include "solarcast/io/csv.hpp"
#include "solarcast/time.hpp"
#include "solarcast/verify.hpp"

namespace solarcast {

struct forecast_row {
  std::string engine;
  std::string season;
  int lead = 0;
  int fold = 0;
  std::string station;
  std::int64_t valid = 0;
  double obs = std::numeric_limits<double>::quiet_NaN();  // CSI, may be absent
  double clearsky = 0.0;
  std::vector<double> q;  // sanitized, one per level
};

inline void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

inline void write_forecasts(const std::string& path,
                            const std::vector<double>& levels, int median_index,
                            const std::vector<forecast_row>& rows) {
  ensure_dir(std::filesystem::path(path).parent_path().string());
  csv_writer w(path);
  std::vector<std::string> head = {"engine",     "season",      "lead_time",
                                   "fold",       "station_id",  "valid_time",
                                   "observation", "clearsky_wm2"};
  for (double lv : levels) head.push_back("q" + fmt_double(lv));
  head.push_back("median");
  w.row(head);
  std::vector<std::string> cells;
  for (const auto& r : rows) {
    cells.clear();
    cells.push_back(r.engine);
    cells.push_back(r.season);
    cells.push_back(std::to_string(r.lead));
    cells.push_back(std::to_string(r.fold));
    cells.push_back(r.station);
    cells.push_back(format_utc(r.valid));
    cells.push_back(std::isnan(r.obs) ? "" : fmt_double(r.obs));
    cells.push_back(fmt_double(r.clearsky));
    for (double v : r.q) cells.push_back(fmt_double(v));
    cells.push_back(fmt_double(r.q[static_cast<size_t>(median_index)]));
    w.row(cells);
  }
  w.close();
}

struct forecast_file {
  std::vector<double> levels;
  std::vector<forecast_row> rows;
};

inline forecast_file read_forecasts(const std::string& path) {
  csv_table t = read_csv(path);
  forecast_file f;
  std::vector<int> qcols;
  for (size_t c = 0; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (h.size() > 1 && h[0] == 'q' && (std::isdigit(h[1]) || h[1] == '.')) {
      double lv;
      if (parse_double(std::string_view(h).substr(1), lv)) {
        f.levels.push_back(lv);
        qcols.push_back(static_cast<int>(c));
      }
    }
  }
  if (qcols.empty()) throw data_error(path + ": no quantile columns found");
  int c_eng = t.col_required("engine");
  int c_sea = t.col_required("season");
  int c_lead = t.col_required("lead_time");
  int c_fold = t.col_required("fold");
  int c_sta = t.col_required("station_id");
  int c_vt = t.col_required("valid_time");
  int c_obs = t.col_required("observation");
  int c_cs = t.col_required("clearsky_wm2");
  for (size_t r = 0; r < t.rows.size(); ++r) {
    forecast_row row;
    row.engine = t.rows[r][static_cast<size_t>(c_eng)];
    row.season = t.rows[r][static_cast<size_t>(c_sea)];
    row.lead = static_cast<int>(cell_long(t, r, c_lead));
    row.fold = static_cast<int>(cell_long(t, r, c_fold));
    row.station = t.rows[r][static_cast<size_t>(c_sta)];
    if (!parse_utc(t.rows[r][static_cast<size_t>(c_vt)], row.valid))
      throw data_error(path + " line " + std::to_string(t.file_line(r)) +
                       ": bad timestamp");
    if (cell_present(t.rows[r][static_cast<size_t>(c_obs)]))
      row.obs = cell_double(t, r, c_obs);
    row.clearsky = cell_double(t, r, c_cs);
    row.q.reserve(qcols.size());
    for (int qc : qcols) row.q.push_back(cell_double(t, r, qc));
    f.rows.push_back(std::move(row));
  }
  return f;
}

struct metric_row {
  std::string engine;
  std::string season;
  int lead = 0;
  int fold = 0;
  std::string metric;
  double value = 0.0;  // NaN serialized as NA
};

inline void write_metrics(const std::string& path,
                          const std::vector<metric_row>& rows) {
  ensure_dir(std::filesystem::path(path).parent_path().string());
  csv_writer w(path);
  w.row({"engine", "season", "lead_time", "fold", "metric", "value"});
  for (const auto& r : rows)
    w.row({r.engine, r.season, std::to_string(r.lead), std::to_string(r.fold),
           r.metric, metric_str(r.value)});
  w.close();
}

inline std::vector<metric_row> read_metrics(const std::string& path) {
  csv_table t = read_csv(path);
  int c_eng = t.col_required("engine");
  int c_sea = t.col_required("season");
  int c_lead = t.col_required("lead_time");
  int c_fold = t.col_required("fold");
  int c_met = t.col_required("metric");
  int c_val = t.col_required("value");
  std::vector<metric_row> rows;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    metric_row m;
    m.engine = t.rows[r][static_cast<size_t>(c_eng)];
    m.season = t.rows[r][static_cast<size_t>(c_sea)];
    m.lead = static_cast<int>(cell_long(t, r, c_lead));
    m.fold = static_cast<int>(cell_long(t, r, c_fold));
    m.metric = t.rows[r][static_cast<size_t>(c_met)];
    const std::string& v = t.rows[r][static_cast<size_t>(c_val)];
    m.value = (v == "NA") ? na_value() : cell_double(t, r, c_val);
    rows.push_back(std::move(m));
  }
  return rows;
}

// pooled rows use "all" in the season and lead_time columns
struct reliability_row {
  std::string engine;
  std::string season;
  std::string lead;
  double threshold = 0.0;
  int bin = 0;
  double prob_mean = 0.0;
  double obs_freq = 0.0;
  long count = 0;
};

inline void write_reliability(const std::string& path,
                              const std::vector<reliability_row>& rows) {
  ensure_dir(std::filesystem::path(path).parent_path().string());
  csv_writer w(path);
  w.row({"engine", "season", "lead_time", "threshold", "bin", "prob_mean",
         "obs_freq", "count"});
  for (const auto& r : rows)
    w.row({r.engine, r.season, r.lead, fmt_double(r.threshold),
           std::to_string(r.bin), r.count > 0 ? fmt_double(r.prob_mean) : "NA",
           r.count > 0 ? fmt_double(r.obs_freq) : "NA",
           std::to_string(r.count)});
  w.close();
}

struct pev_row {
  std::string engine;
  std::string season;
  std::string lead;
  double threshold = 0.0;
  double cost_loss = 0.0;
  double value = 0.0;
};

inline void write_pev(const std::string& path, const std::vector<pev_row>& rows) {
  ensure_dir(std::filesystem::path(path).parent_path().string());
  csv_writer w(path);
  w.row({"engine", "season", "lead_time", "threshold", "cost_loss", "pev"});
  for (const auto& r : rows)
    w.row({r.engine, r.season, r.lead, fmt_double(r.threshold),
           fmt_double(r.cost_loss), metric_str(r.value)});
  w.close();
}

struct note_row {
  std::string engine;
  std::string season;
  std::string lead;
  std::string fold;
  std::string message;
};

inline void write_notes(const std::string& path, const std::vector<note_row>& rows) {
  ensure_dir(std::filesystem::path(path).parent_path().string());
  csv_writer w(path);
  w.row({"engine", "season", "lead_time", "fold", "message"});
  for (const auto& r : rows) w.row({r.engine, r.season, r.lead, r.fold, r.message});
  w.close();
}

// aggregated predictor importance, one column per engine plus a total
inline void write_importance(const std::string& path,
                             const std::vector<std::string>& engines,
                             const std::map<std::string, std::map<std::string, double>>&
                                 per_engine /* engine -> predictor -> score */) {
  ensure_dir(std::filesystem::path(path).parent_path().string());
  std::map<std::string, double> total;
  for (const auto& name : predictor_registry()) total[name] = 0.0;
  for (const auto& e : engines) {
    auto it = per_engine.find(e);
    if (it == per_engine.end()) continue;
    for (const auto& [pred, v] : it->second) total[pred] += v;
  }
  std::vector<std::string> order;
  for (const auto& [pred, v] : total) {
    (void)v;
    order.push_back(pred);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) {
                     if (total.at(a) != total.at(b)) return total.at(a) > total.at(b);
                     return a < b;
                   });
  csv_writer w(path);
  std::vector<std::string> head = {"rank", "predictor"};
  for (const auto& e : engines) head.push_back(e);
  head.push_back("total");
  w.row(head);
  int rank = 1;
  for (const auto& pred : order) {
    std::vector<std::string> cells = {std::to_string(rank++), pred};
    for (const auto& e : engines) {
      auto it = per_engine.find(e);
      double v = 0.0;
      if (it != per_engine.end()) {
        auto jt = it->second.find(pred);
        if (jt != it->second.end()) v = jt->second;
      }
      cells.push_back(fmt_double(v));
    }
    cells.push_back(fmt_double(total.at(pred)));
    w.row(cells);
  }
  w.close();
}

}  // namespace solarcast

#endif  // SOLARCAST_IO_REPORTS_HPP_
