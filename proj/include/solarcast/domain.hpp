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
#ifndef SOLARCAST_DOMAIN_HPP_
#define SOLARCAST_DOMAIN_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "solarcast/common.hpp"
#include "solarcast/time.hpp"

namespace solarcast {

// 49 levels 0.02, 0.04, ..., 0.98.
inline std::vector<double> default_quantile_levels() {
  std::vector<double> q(49);
  for (int k = 1; k <= 49; ++k) q[k - 1] = static_cast<double>(k) / 50.0;
  return q;
}

inline std::vector<double> quantile_levels(int count, double lo, double hi) {
  if (count < 1 || lo <= 0.0 || hi >= 1.0 || lo > hi)
    throw usage_error("quantile level grid outside (0,1) or empty");
  std::vector<double> q(count);
  if (count == 1) {
    q[0] = lo;
    return q;
  }
  for (int k = 0; k < count; ++k)
    q[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  return q;
}

// Sort ascending, then clamp at zero. Sorting first preserves the
// multiset of nonnegative values.
inline std::vector<double> sanitize_quantiles(std::vector<double> raw, size_t expected) {
  if (raw.size() != expected)
    throw internal_error("quantile vector length " + std::to_string(raw.size()) +
                         " != " + std::to_string(expected));
  std::sort(raw.begin(), raw.end());
  for (double& v : raw)
    if (v < 0.0) v = 0.0;
  return raw;
}

enum class season : int { winter = 0, spring = 1, summer = 2, autumn = 3 };

inline season season_of_month(int month) {
  switch (month) {
    case 12:
    case 1:
    case 2:
      return season::winter;
    case 3:
    case 4:
    case 5:
      return season::spring;
    case 6:
    case 7:
    case 8:
      return season::summer;
    case 9:
    case 10:
    case 11:
      return season::autumn;
    default:
      throw internal_error("month out of range: " + std::to_string(month));
  }
}

inline season season_of(std::int64_t epoch_sec) {
  return season_of_month(from_epoch(epoch_sec).date.month);
}

inline const char* season_name(season s) {
  switch (s) {
    case season::winter: return "winter";
    case season::spring: return "spring";
    case season::summer: return "summer";
    case season::autumn: return "autumn";
  }
  return "?";
}

inline bool season_from_name(std::string_view n, season& out) {
  for (int i = 0; i < 4; ++i) {
    if (n == season_name(static_cast<season>(i))) {
      out = static_cast<season>(i);
      return true;
    }
  }
  return false;
}

struct station_meta {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  double dist_coast_km = 0.0;
  double dist_water_km = 0.0;
  double dist_inland_km = 0.0;
};

inline void validate_station(const station_meta& s) {
  if (s.lat < -90.0 || s.lat > 90.0)
    throw data_error("station " + s.id + ": latitude out of range");
  if (s.lon < -180.0 || s.lon > 180.0)
    throw data_error("station " + s.id + ": longitude out of range");
  if (s.dist_coast_km < 0.0 || s.dist_water_km < 0.0 || s.dist_inland_km < 0.0)
    throw data_error("station " + s.id + ": negative distance");
}

// Canonical predictor registry. Radiation columns are CSI values after
// conversion; T/RH deliberately have no total-column entry.
inline const std::vector<std::string>& predictor_registry() {
  static const std::vector<std::string> names = {
      "t_low",      "t_mid",      "t_high",
      "rh_low",     "rh_mid",     "rh_high",
      "g",          "dir_surf",   "dir_toa",   "ncs_surf", "ncs_toa",
      "rain",
      "cc_low",     "cc_mid",     "cc_high",   "cc_total",
      "cw_low",     "cw_mid",     "cw_high",   "cw_total",
      "pw_low",     "pw_mid",     "pw_high",   "pw_total",
      "aod",        "ang",        "oz",
      "lat",        "lon",        "doy",       "cos_z",
      "dist_coast", "dist_water", "dist_inland"};
  return names;
}

inline std::uint64_t registry_hash() {
  std::uint64_t h = kFnvOffset;
  for (const auto& n : predictor_registry()) {
    h = fnv1a(n, h);
    h = fnv1a(";", h);
  }
  return h;
}

}  // namespace solarcast

#endif  // SOLARCAST_DOMAIN_HPP_
