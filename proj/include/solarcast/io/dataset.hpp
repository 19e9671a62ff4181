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
#ifndef SOLARCAST_IO_DATASET_HPP_
#define SOLARCAST_IO_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "solarcast/domain.hpp"
#include "solarcast/features.hpp"
#include "solarcast/io/config.hpp"
#include "solarcast/io/csv.hpp"
#include "solarcast/solar.hpp"

namespace solarcast {

// fixed vertical grids of the input tables
inline const std::vector<double>& pressure_levels_hpa() {
  static const std::vector<double> v = {1000, 925, 850, 700, 600, 500,
                                        400,  300, 250, 200, 150};
  return v;
}

inline const std::vector<double>& height_levels_m() {
  static const std::vector<double> v = {250,  750,  1500, 3000, 4500,
                                        5500, 7000, 9000, 11000};
  return v;
}

inline std::vector<std::string> model_field_columns() {
  std::vector<std::string> cols = {"station_id", "valid_time", "lead_time",
                                   "g_wm2",      "dir_surf_wm2", "dir_toa_wm2",
                                   "ncs_surf_wm2", "ncs_toa_wm2", "rain_mm"};
  for (double p : pressure_levels_hpa())
    cols.push_back("t_p" + std::to_string(static_cast<int>(p)));
  for (double p : pressure_levels_hpa())
    cols.push_back("rh_p" + std::to_string(static_cast<int>(p)));
  for (double h : height_levels_m())
    cols.push_back("cc_h" + std::to_string(static_cast<int>(h)));
  for (double h : height_levels_m())
    cols.push_back("cw_h" + std::to_string(static_cast<int>(h)));
  cols.push_back("aod");
  cols.push_back("ang");
  cols.push_back("oz");
  return cols;
}

struct forecast_case {
  std::string station_id;
  std::int64_t valid_time = 0;  // start of the hour, UTC
  int lead_time = 0;            // whole hours
  double observation = std::numeric_limits<double>::quiet_NaN();  // CSI
  double clearsky_wm2 = 0.0;
  std::vector<double> predictors;  // registry order; NaN marks missing
  long source_line = 0;            // model_fields.csv line, for messages
};

struct dataset {
  std::vector<station_meta> stations;
  std::vector<forecast_case> cases;  // sorted by (station, valid, lead)
  std::uint64_t data_hash = 0;
  long cams_missing_runs = 0;
};

namespace detail {

inline std::uint64_t file_bytes_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return fnv1a(buf.str());
}

inline int registry_index(const std::string& name) {
  const auto& reg = predictor_registry();
  for (size_t i = 0; i < reg.size(); ++i)
    if (reg[i] == name) return static_cast<int>(i);
  throw internal_error("predictor not in registry: " + name);
}

}  // namespace detail

// Reads observations.csv, stations.csv, and model_fields.csv from `dir` and
// assembles one case per model row: ESRA clear sky, CSI conversion of the
// observation and the five radiation fields, layer aggregation of profile
// fields, precipitable water, 3-hourly-field matching to the nearest lead
// time (ties to the earlier lead), and optional temporal smoothing of the
// hourly-model predictors over adjacent lead times of the same run.
inline dataset load_dataset(const std::string& dir, const run_config& cfg) {
  dataset ds;
  const std::string obs_path = dir + "/observations.csv";
  const std::string sta_path = dir + "/stations.csv";
  const std::string mod_path = dir + "/model_fields.csv";

  std::uint64_t h = detail::file_bytes_hash(obs_path);
  h = fnv1a_u64(detail::file_bytes_hash(sta_path), h);
  h = fnv1a_u64(detail::file_bytes_hash(mod_path), h);
  ds.data_hash = h;

  csv_table sta = read_csv(sta_path);
  int c_id = sta.col_required("id");
  int c_lat = sta.col_required("lat");
  int c_lon = sta.col_required("lon");
  int c_dc = sta.col_required("dist_coast_km");
  int c_dw = sta.col_required("dist_water_km");
  int c_di = sta.col_required("dist_inland_km");
  std::map<std::string, int> station_index;
  for (size_t r = 0; r < sta.rows.size(); ++r) {
    station_meta m;
    m.id = sta.rows[r][static_cast<size_t>(c_id)];
    m.lat = cell_double(sta, r, c_lat);
    m.lon = cell_double(sta, r, c_lon);
    m.dist_coast_km = cell_double(sta, r, c_dc);
    m.dist_water_km = cell_double(sta, r, c_dw);
    m.dist_inland_km = cell_double(sta, r, c_di);
    try {
      validate_station(m);
    } catch (const data_error& e) {
      throw data_error(sta_path + " line " + std::to_string(sta.file_line(r)) +
                       ": " + e.what());
    }
    if (!station_index.emplace(m.id, static_cast<int>(ds.stations.size())).second)
      throw data_error(sta_path + " line " + std::to_string(sta.file_line(r)) +
                       ": duplicate station id '" + m.id + "'");
    ds.stations.push_back(m);
  }

  csv_table obs = read_csv(obs_path);
  int o_id = obs.col_required("station_id");
  int o_vt = obs.col_required("valid_time");
  int o_ghi = obs.col_required("ghi_wm2");
  std::map<std::pair<int, std::int64_t>, double> obs_ghi;
  for (size_t r = 0; r < obs.rows.size(); ++r) {
    const std::string& sid = obs.rows[r][static_cast<size_t>(o_id)];
    auto it = station_index.find(sid);
    if (it == station_index.end())
      throw data_error(obs_path + " line " + std::to_string(obs.file_line(r)) +
                       ": unknown station '" + sid + "'");
    std::int64_t vt;
    if (!parse_utc(obs.rows[r][static_cast<size_t>(o_vt)], vt))
      throw data_error(obs_path + " line " + std::to_string(obs.file_line(r)) +
                       ": bad timestamp '" + obs.rows[r][static_cast<size_t>(o_vt)] + "'");
    if (!cell_present(obs.rows[r][static_cast<size_t>(o_ghi)])) continue;
    double ghi = cell_double(obs, r, o_ghi);
    if (ghi < 0.0)
      throw data_error(obs_path + " line " + std::to_string(obs.file_line(r)) +
                       ": negative global radiation " + fmt_double(ghi));
    if (!obs_ghi.emplace(std::make_pair(it->second, vt), ghi).second)
      throw data_error(obs_path + " line " + std::to_string(obs.file_line(r)) +
                       ": duplicate observation for " + sid);
  }

  csv_table mod = read_csv(mod_path);
  std::vector<int> mc;
  for (const auto& name : model_field_columns())
    mc.push_back(mod.col_required(name));
  const int n_fixed = 9;  // station, valid, lead, 5 radiation, rain
  const int np = static_cast<int>(pressure_levels_hpa().size());
  const int nh = static_cast<int>(height_levels_m().size());

  struct raw_row {
    int station = 0;
    std::int64_t valid = 0;
    int lead = 0;
    long line = 0;
    std::vector<double> fields;  // model_field_columns()[3..] order
    bool has_cams = false;
  };
  std::vector<raw_row> rows;
  rows.reserve(mod.rows.size());
  std::map<std::tuple<int, std::int64_t, int>, long> seen;
  for (size_t r = 0; r < mod.rows.size(); ++r) {
    raw_row rr;
    const std::string& sid = mod.rows[r][static_cast<size_t>(mc[0])];
    auto it = station_index.find(sid);
    if (it == station_index.end())
      throw data_error(mod_path + " line " + std::to_string(mod.file_line(r)) +
                       ": unknown station '" + sid + "'");
    rr.station = it->second;
    if (!parse_utc(mod.rows[r][static_cast<size_t>(mc[1])], rr.valid))
      throw data_error(mod_path + " line " + std::to_string(mod.file_line(r)) +
                       ": bad timestamp '" + mod.rows[r][static_cast<size_t>(mc[1])] + "'");
    long long lt = cell_long(mod, r, mc[2]);
    if (lt < 0 || lt > 96)
      throw data_error(mod_path + " line " + std::to_string(mod.file_line(r)) +
                       ": lead_time out of range");
    rr.lead = static_cast<int>(lt);
    rr.line = mod.file_line(r);
    if (!seen.emplace(std::make_tuple(rr.station, rr.valid, rr.lead), rr.line).second)
      throw data_error(mod_path + " line " + std::to_string(rr.line) +
                       ": duplicate (station, valid_time, lead_time) row");

    const size_t nfields = mc.size() - 3;
    rr.fields.assign(nfields, std::numeric_limits<double>::quiet_NaN());
    for (size_t f = 0; f < nfields; ++f) {
      const std::string& cell = mod.rows[r][static_cast<size_t>(mc[f + 3])];
      if (cell_present(cell)) rr.fields[f] = cell_double(mod, r, mc[f + 3]);
    }
    // everything except the trailing 3-hourly fields must be present
    for (size_t f = 0; f + 3 < nfields; ++f)
      if (std::isnan(rr.fields[f]))
        throw data_error(mod_path + " line " + std::to_string(rr.line) +
                         ": empty value in column '" +
                         mod.header[static_cast<size_t>(mc[f + 3])] + "'");
    rr.has_cams = !std::isnan(rr.fields[nfields - 3]) &&
                  !std::isnan(rr.fields[nfields - 2]) &&
                  !std::isnan(rr.fields[nfields - 1]);
    rows.push_back(std::move(rr));
  }

  // nearest-lead matching of the 3-hourly fields within each model run
  std::map<std::pair<int, std::int64_t>, std::vector<size_t>> runs;
  for (size_t i = 0; i < rows.size(); ++i)
    runs[{rows[i].station, rows[i].valid - 3600LL * rows[i].lead}].push_back(i);
  const size_t f_aod = rows.empty() ? 0 : rows[0].fields.size() - 3;
  for (auto& [key, members] : runs) {
    (void)key;
    std::sort(members.begin(), members.end(),
              [&](size_t a, size_t b) { return rows[a].lead < rows[b].lead; });
    std::vector<size_t> with_cams;
    for (size_t i : members)
      if (rows[i].has_cams) with_cams.push_back(i);
    if (with_cams.empty()) {
      ds.cams_missing_runs += 1;
      continue;
    }
    for (size_t i : members) {
      if (rows[i].has_cams) continue;
      size_t best = with_cams.front();
      for (size_t j : with_cams) {
        int da = std::abs(rows[j].lead - rows[i].lead);
        int db = std::abs(rows[best].lead - rows[i].lead);
        if (da < db || (da == db && rows[j].lead < rows[best].lead)) best = j;
      }
      for (size_t f = f_aod; f < rows[i].fields.size(); ++f)
        rows[i].fields[f] = rows[best].fields[f];
    }
  }

  // assemble predictor vectors
  const auto& reg = predictor_registry();
  const int i_t_low = detail::registry_index("t_low");
  const int i_rh_low = detail::registry_index("rh_low");
  const int i_g = detail::registry_index("g");
  const int i_rain = detail::registry_index("rain");
  const int i_cc_low = detail::registry_index("cc_low");
  const int i_cw_low = detail::registry_index("cw_low");
  const int i_pw_low = detail::registry_index("pw_low");
  const int i_aod = detail::registry_index("aod");
  const int i_lat = detail::registry_index("lat");

  std::vector<double> level_heights;
  for (double p : pressure_levels_hpa()) level_heights.push_back(isa_height_m(p));

  ds.cases.reserve(rows.size());
  for (const raw_row& rr : rows) {
    const station_meta& meta = ds.stations[static_cast<size_t>(rr.station)];
    forecast_case fc;
    fc.station_id = meta.id;
    fc.valid_time = rr.valid;
    fc.lead_time = rr.lead;
    fc.source_line = rr.line;
    fc.clearsky_wm2 = hourly_clearsky(meta.lat, meta.lon, rr.valid, cfg.clearsky);
    auto oit = obs_ghi.find({rr.station, rr.valid});
    if (oit != obs_ghi.end() && fc.clearsky_wm2 > 0.0)
      fc.observation = to_csi(oit->second, fc.clearsky_wm2);

    fc.predictors.assign(reg.size(), std::numeric_limits<double>::quiet_NaN());
    const std::vector<double>& f = rr.fields;

    std::vector<double> tk(f.begin() + 6, f.begin() + 6 + np);
    std::vector<double> rh(f.begin() + 6 + np, f.begin() + 6 + 2 * np);
    layer_values tl = layer_aggregate_all(level_heights, tk);
    layer_values rl = layer_aggregate_all(level_heights, rh);
    fc.predictors[i_t_low] = tl.low;
    fc.predictors[i_t_low + 1] = tl.mid;
    fc.predictors[i_t_low + 2] = tl.high;
    fc.predictors[i_rh_low] = rl.low;
    fc.predictors[i_rh_low + 1] = rl.mid;
    fc.predictors[i_rh_low + 2] = rl.high;

    if (fc.clearsky_wm2 > 0.0)
      for (int k = 0; k < 5; ++k)
        fc.predictors[i_g + k] = to_csi(f[static_cast<size_t>(k)], fc.clearsky_wm2);
    fc.predictors[i_rain] = f[5];

    std::vector<double> cc(f.begin() + 6 + 2 * np, f.begin() + 6 + 2 * np + nh);
    std::vector<double> cw(f.begin() + 6 + 2 * np + nh,
                           f.begin() + 6 + 2 * np + 2 * nh);
    layer_values ccl = layer_aggregate_all(height_levels_m(), cc);
    layer_values cwl = layer_aggregate_all(height_levels_m(), cw);
    fc.predictors[i_cc_low] = ccl.low;
    fc.predictors[i_cc_low + 1] = ccl.mid;
    fc.predictors[i_cc_low + 2] = ccl.high;
    fc.predictors[i_cc_low + 3] = ccl.total;
    fc.predictors[i_cw_low] = cwl.low;
    fc.predictors[i_cw_low + 1] = cwl.mid;
    fc.predictors[i_cw_low + 2] = cwl.high;
    fc.predictors[i_cw_low + 3] = cwl.total;

    try {
      layer_values pwl = precipitable_water_all(pressure_levels_hpa(), tk, rh);
      fc.predictors[i_pw_low] = pwl.low;
      fc.predictors[i_pw_low + 1] = pwl.mid;
      fc.predictors[i_pw_low + 2] = pwl.high;
      fc.predictors[i_pw_low + 3] = pwl.total;
    } catch (const data_error& e) {
      throw data_error(mod_path + " line " + std::to_string(rr.line) + ": " +
                       e.what());
    }

    fc.predictors[i_aod] = f[f.size() - 3];
    fc.predictors[i_aod + 1] = f[f.size() - 2];
    fc.predictors[i_aod + 2] = f[f.size() - 1];

    solar_position pos = sun_position(rr.valid + 1800, meta.lat, meta.lon);
    time_place_values tp = time_place_predictors(meta, rr.valid, pos);
    fc.predictors[i_lat] = tp.lat;
    fc.predictors[i_lat + 1] = tp.lon;
    fc.predictors[i_lat + 2] = tp.doy;
    fc.predictors[i_lat + 3] = tp.cos_z;
    fc.predictors[i_lat + 4] = tp.dist_coast;
    fc.predictors[i_lat + 5] = tp.dist_water;
    fc.predictors[i_lat + 6] = tp.dist_inland;

    ds.cases.push_back(std::move(fc));
  }

  if (cfg.spatial_smoothing)
    throw data_error(
        "spatial smoothing requires gridded model fields, which the CSV "
        "ingestion format does not carry; disable smoothing.spatial");

  if (cfg.temporal_smoothing && !ds.cases.empty()) {
    // hourly-model predictors only (profile aggregates, radiation, rain,
    // precipitable water); 3-hourly and time/place columns stay untouched
    const int smooth_end = i_pw_low + 4;
    std::map<std::pair<std::string, std::int64_t>, std::map<int, size_t>> by_run;
    for (size_t i = 0; i < ds.cases.size(); ++i) {
      const forecast_case& fc = ds.cases[i];
      by_run[{fc.station_id, fc.valid_time - 3600LL * fc.lead_time}]
           [fc.lead_time] = i;
    }
    std::vector<std::vector<double>> smoothed(ds.cases.size());
    for (const auto& [key, leads] : by_run) {
      (void)key;
      for (const auto& [lead, ci] : leads) {
        std::vector<double> out = ds.cases[ci].predictors;
        for (int c = 0; c < smooth_end; ++c) {
          double acc = 0.0;
          int cnt = 0;
          for (int dl = -1; dl <= 1; ++dl) {
            auto nit = leads.find(lead + dl);
            if (nit == leads.end()) continue;
            double v = ds.cases[nit->second].predictors[static_cast<size_t>(c)];
            if (std::isnan(v)) continue;
            acc += v;
            cnt += 1;
          }
          out[static_cast<size_t>(c)] =
              cnt > 0 ? acc / cnt : std::numeric_limits<double>::quiet_NaN();
        }
        smoothed[ci] = std::move(out);
      }
    }
    for (size_t i = 0; i < ds.cases.size(); ++i)
      ds.cases[i].predictors = std::move(smoothed[i]);
  }

  std::sort(ds.cases.begin(), ds.cases.end(),
            [](const forecast_case& a, const forecast_case& b) {
              if (a.station_id != b.station_id) return a.station_id < b.station_id;
              if (a.valid_time != b.valid_time) return a.valid_time < b.valid_time;
              return a.lead_time < b.lead_time;
            });
  return ds;
}

}  // namespace solarcast

#endif  // SOLARCAST_IO_DATASET_HPP_
