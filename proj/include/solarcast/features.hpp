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
#ifndef SOLARCAST_FEATURES_HPP_
#define SOLARCAST_FEATURES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "solarcast/common.hpp"
#include "solarcast/domain.hpp"
#include "solarcast/solar.hpp"

namespace solarcast {

// Atmosphere layer bounds in metres. "high" runs to the top of the provided
// profile; "total" is handled as a combination of the three (see
// layer_aggregate_all).
inline constexpr double kLayerLowTop = 2000.0;
inline constexpr double kLayerMidTop = 6000.0;

struct layer_values {
  double low;
  double mid;
  double high;
  double total;
};

namespace detail {

// Midpoint-partition cell of level i, clipped to [lo, hi]; the first and
// last cells extend to the layer bounds.
inline double cell_weight(const std::vector<double>& h, size_t i, double lo, double hi) {
  double cell_lo = (i == 0) ? lo : 0.5 * (h[i - 1] + h[i]);
  double cell_hi = (i + 1 == h.size()) ? hi : 0.5 * (h[i] + h[i + 1]);
  cell_lo = std::max(cell_lo, lo);
  cell_hi = std::min(cell_hi, hi);
  return std::max(cell_hi - cell_lo, 0.0);
}

}  // namespace detail

// Distance-weighted mean of the level values inside [lo, hi).
inline double layer_aggregate(const std::vector<double>& heights,
                              const std::vector<double>& values, double lo, double hi) {
  if (heights.size() != values.size() || heights.size() < 1)
    throw data_error("layer aggregation: malformed profile");
  for (size_t i = 1; i < heights.size(); ++i)
    if (heights[i] <= heights[i - 1])
      throw data_error("layer aggregation: coordinate not strictly increasing");
  std::vector<double> inside_h, inside_v;
  for (size_t i = 0; i < heights.size(); ++i) {
    if (heights[i] >= lo && heights[i] < hi) {
      inside_h.push_back(heights[i]);
      inside_v.push_back(values[i]);
    }
  }
  if (inside_h.empty()) throw data_error("layer aggregation: no level inside layer");
  double wsum = 0.0, acc = 0.0;
  for (size_t i = 0; i < inside_h.size(); ++i) {
    double w = detail::cell_weight(inside_h, i, lo, hi);
    if (w <= 0.0) w = 1.0;  // degenerate single-level layer
    wsum += w;
    acc += w * inside_v[i];
  }
  return acc / wsum;
}

// All four layers at once. The column top is the last level plus half the
// last spacing; "total" is the width-weighted combination of the three
// per-layer aggregates, which keeps it inside their range by construction.
inline layer_values layer_aggregate_all(const std::vector<double>& heights,
                                        const std::vector<double>& values) {
  if (heights.size() < 2) throw data_error("layer aggregation: need at least 2 levels");
  double top = heights.back() + 0.5 * (heights.back() - heights[heights.size() - 2]);
  top = std::max(top, kLayerMidTop + 1.0);
  layer_values out;
  out.low = layer_aggregate(heights, values, 0.0, kLayerLowTop);
  out.mid = layer_aggregate(heights, values, kLayerLowTop, kLayerMidTop);
  out.high = layer_aggregate(heights, values, kLayerMidTop, top);
  double w_low = kLayerLowTop;
  double w_mid = kLayerMidTop - kLayerLowTop;
  double w_high = top - kLayerMidTop;
  out.total = (w_low * out.low + w_mid * out.mid + w_high * out.high) / top;
  return out;
}

// Standard-atmosphere geopotential height for a pressure level, used to
// assign pressure levels to the metric layer bounds.
inline double isa_height_m(double p_hpa) {
  constexpr double p0 = 1013.25, t0 = 288.15, lapse = 0.0065;
  constexpr double g = 9.80665, r = 287.05287;
  constexpr double exp_term = r * lapse / g;
  const double p_tropopause = 226.32040095007793;  // p0*(1-lapse*11km/t0)^(g/(r*lapse))
  if (p_hpa >= p_tropopause)
    return (t0 / lapse) * (1.0 - std::pow(p_hpa / p0, exp_term));
  return 11000.0 + (r * 216.65 / g) * std::log(p_tropopause / p_hpa);
}

// Saturation vapor pressure over water, hPa (Bolton 1980).
inline double saturation_vapor_pressure_hpa(double t_kelvin) {
  double tc = t_kelvin - 273.15;
  return 6.112 * std::exp(17.67 * tc / (tc + 243.5));
}

inline double specific_humidity(double p_hpa, double t_kelvin, double rh_percent) {
  double e = rh_percent / 100.0 * saturation_vapor_pressure_hpa(t_kelvin);
  return 0.622 * e / (p_hpa - 0.378 * e);
}

// Column water vapor in kg/m^2 between the metric bounds [lo, hi):
// trapezoid integration of q dp/g over level pairs, each pair assigned to
// the layer holding its midpoint height. Summing the three layers
// reproduces the full-column integral exactly.
inline double precipitable_water(const std::vector<double>& pressures_hpa,
                                 const std::vector<double>& t_kelvin,
                                 const std::vector<double>& rh_percent, double lo,
                                 double hi) {
  size_t n = pressures_hpa.size();
  if (t_kelvin.size() != n || rh_percent.size() != n || n < 2)
    throw data_error("precipitable water: mismatched or short profiles");
  for (size_t i = 0; i < n; ++i) {
    if (rh_percent[i] < 0.0 || rh_percent[i] > 100.0)
      throw data_error("precipitable water: RH outside [0,100]");
    if (t_kelvin[i] < 100.0 || t_kelvin[i] > 400.0)
      throw data_error("precipitable water: temperature outside plausible range");
  }
  for (size_t i = 1; i < n; ++i)
    if (pressures_hpa[i] >= pressures_hpa[i - 1])
      throw data_error("precipitable water: pressures must decrease upward");
  constexpr double g = 9.80665;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    double h_mid = 0.5 * (isa_height_m(pressures_hpa[i]) + isa_height_m(pressures_hpa[i + 1]));
    if (h_mid < lo || h_mid >= hi) continue;
    double q1 = specific_humidity(pressures_hpa[i], t_kelvin[i], rh_percent[i]);
    double q2 = specific_humidity(pressures_hpa[i + 1], t_kelvin[i + 1], rh_percent[i + 1]);
    acc += 0.5 * (q1 + q2) * (pressures_hpa[i] - pressures_hpa[i + 1]) * 100.0 / g;
  }
  return acc;
}

inline layer_values precipitable_water_all(const std::vector<double>& pressures_hpa,
                                           const std::vector<double>& t_kelvin,
                                           const std::vector<double>& rh_percent) {
  layer_values out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.low = precipitable_water(pressures_hpa, t_kelvin, rh_percent, 0.0, kLayerLowTop);
  out.mid = precipitable_water(pressures_hpa, t_kelvin, rh_percent, kLayerLowTop, kLayerMidTop);
  out.high = precipitable_water(pressures_hpa, t_kelvin, rh_percent, kLayerMidTop, inf);
  out.total = out.low + out.mid + out.high;
  return out;
}

// Mean of the values present at {t-1, t, t+1}; edges degrade to the
// available neighbors.
inline double temporal_smooth(const std::map<int, double>& by_lead, int t) {
  double acc = 0.0;
  int cnt = 0;
  for (int dt = -1; dt <= 1; ++dt) {
    auto it = by_lead.find(t + dt);
    if (it != by_lead.end()) {
      acc += it->second;
      ++cnt;
    }
  }
  if (cnt == 0) throw data_error("temporal smoothing: no value at or around requested lead");
  return acc / cnt;
}

// Mean over the (2r+1)x(2r+1) block centered on (ci, cj), intersected with
// the grid. Default radius 4 gives the 9x9 block.
inline double spatial_smooth(const std::vector<std::vector<double>>& grid, size_t ci,
                             size_t cj, int radius = 4) {
  if (grid.empty() || grid[0].empty()) throw data_error("spatial smoothing: empty grid");
  size_t rows = grid.size(), cols = grid[0].size();
  if (ci >= rows || cj >= cols) throw data_error("spatial smoothing: center outside grid");
  size_t i_lo = ci >= static_cast<size_t>(radius) ? ci - radius : 0;
  size_t i_hi = std::min(rows - 1, ci + static_cast<size_t>(radius));
  size_t j_lo = cj >= static_cast<size_t>(radius) ? cj - radius : 0;
  size_t j_hi = std::min(cols - 1, cj + static_cast<size_t>(radius));
  double acc = 0.0;
  size_t cnt = 0;
  for (size_t i = i_lo; i <= i_hi; ++i)
    for (size_t j = j_lo; j <= j_hi; ++j) {
      acc += grid[i][j];
      ++cnt;
    }
  return acc / static_cast<double>(cnt);
}

struct time_place_values {
  double lat;
  double lon;
  double doy;
  double cos_z;
  double dist_coast;
  double dist_water;
  double dist_inland;
};

inline time_place_values time_place_predictors(const station_meta& meta,
                                               std::int64_t valid_time,
                                               const solar_position& pos) {
  time_place_values out;
  out.lat = meta.lat;
  out.lon = meta.lon;
  out.doy = static_cast<double>(day_of_year(valid_time));
  out.cos_z = pos.cos_zenith;
  out.dist_coast = meta.dist_coast_km;
  out.dist_water = meta.dist_water_km;
  out.dist_inland = meta.dist_inland_km;
  return out;
}

}  // namespace solarcast

#endif  // SOLARCAST_FEATURES_HPP_
