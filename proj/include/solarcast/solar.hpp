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
#ifndef SOLARCAST_SOLAR_HPP_
#define SOLARCAST_SOLAR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "solarcast/common.hpp"
#include "solarcast/time.hpp"

namespace solarcast {

struct solar_position {
  double zenith_deg;
  double azimuth_deg;  // from north, eastward
  double cos_zenith;
};

namespace detail {
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDeg = kPi / 180.0;
inline constexpr double kSolarConstant = 1367.0;  // W/m^2
}  // namespace detail

// Almanac-grade ephemeris (Michalsky 1988 formulation), good to ~0.01 deg
// over 1950-2050. Zenith is unrefracted.
inline solar_position sun_position(std::int64_t utc_sec, double lat_deg, double lon_deg) {
  using namespace detail;
  civil_datetime t = from_epoch(utc_sec);
  double ut_hours = t.hour + t.minute / 60.0 + t.second / 3600.0;
  // days from J2000.0 (2000-01-01 12:00 UT)
  double n = static_cast<double>(days_from_civil(t.date.year, t.date.month, t.date.day)) -
             10957.5 + ut_hours / 24.0;

  auto wrap360 = [](double x) {
    x = std::fmod(x, 360.0);
    return x < 0.0 ? x + 360.0 : x;
  };

  double mean_lon = wrap360(280.460 + 0.9856474 * n);
  double mean_anom = wrap360(357.528 + 0.9856003 * n) * kDeg;
  double ecl_lon =
      wrap360(mean_lon + 1.915 * std::sin(mean_anom) + 0.020 * std::sin(2.0 * mean_anom)) * kDeg;
  double obliq = (23.439 - 0.0000004 * n) * kDeg;

  double ra = std::atan2(std::cos(obliq) * std::sin(ecl_lon), std::cos(ecl_lon));
  double dec = std::asin(std::sin(obliq) * std::sin(ecl_lon));

  double gmst = std::fmod(6.697375 + 0.0657098242 * n + ut_hours, 24.0);
  if (gmst < 0.0) gmst += 24.0;
  double lmst = std::fmod(gmst + lon_deg / 15.0, 24.0);
  if (lmst < 0.0) lmst += 24.0;
  double ha = lmst * 15.0 * kDeg - ra;
  while (ha > kPi) ha -= 2.0 * kPi;
  while (ha < -kPi) ha += 2.0 * kPi;

  double lat = lat_deg * kDeg;
  double sin_el = std::sin(lat) * std::sin(dec) + std::cos(lat) * std::cos(dec) * std::cos(ha);
  sin_el = std::clamp(sin_el, -1.0, 1.0);
  double el = std::asin(sin_el);
  double az = std::atan2(-std::sin(ha) * std::cos(dec),
                         std::sin(dec) * std::cos(lat) -
                             std::cos(dec) * std::sin(lat) * std::cos(ha));
  double az_deg = std::fmod(az / kDeg + 360.0, 360.0);

  solar_position out;
  out.zenith_deg = 90.0 - el / kDeg;
  out.azimuth_deg = az_deg;
  out.cos_zenith = std::cos(out.zenith_deg * kDeg);
  return out;
}

struct clearsky_config {
  std::array<double, 12> monthly_linke{};
  double site_elevation_m = 0.0;
  int hourly_substep_minutes = 1;

  clearsky_config() { monthly_linke.fill(3.0); }

  void validate() const {
    for (double tl : monthly_linke)
      if (!(tl > 0.0)) throw usage_error("Linke turbidity must be positive");
    if (site_elevation_m < -430.0) throw usage_error("site elevation below -430 m");
    if (hourly_substep_minutes < 1 || hourly_substep_minutes > 60)
      throw usage_error("hourly substep must be 1..60 minutes");
  }
};

struct clearsky_components {
  double ghi;
  double beam;
  double diffuse;
};

// ESRA clear-sky model: beam via the Rayleigh optical-thickness
// parameterization, diffuse via transmission x angular function. The raw
// diffuse term can dip below zero at grazing sun; it is clamped and the last
// two degrees of altitude are tapered so GHI falls continuously to 0 at the
// horizon. Below 15 deg solar altitude the diffuse turbidity response is
// tapered beyond TL = 5.5: with the published coefficients the diffuse gain
// otherwise outruns beam extinction there and global would rise with
// turbidity, breaking the strict-decrease contract. Values for TL <= 5.5 or
// altitude >= 15 deg are untouched.
inline clearsky_components clearsky_ghi_components(double zenith_deg, double linke,
                                                   int day_of_year, double elevation_m) {
  using namespace detail;
  if (!(linke > 0.0)) throw usage_error("Linke turbidity must be positive");
  clearsky_components out{0.0, 0.0, 0.0};
  if (zenith_deg >= 90.0) return out;

  double j_ang = 2.0 * kPi * static_cast<double>(day_of_year) / 365.25;
  double eccentricity = 1.0 + 0.03344 * std::cos(j_ang - 0.048869);
  double gamma = (90.0 - zenith_deg) * kDeg;  // true solar altitude

  // refraction-corrected altitude for the air-mass formula
  double dg = 0.061359 * (0.1594 + 1.1230 * gamma + 0.065656 * gamma * gamma) /
              (1.0 + 28.9344 * gamma + 277.3971 * gamma * gamma);
  double gamma_t = gamma + dg;
  double gt_deg = gamma_t / kDeg;

  double p_ratio = std::exp(-elevation_m / 8434.5);
  double air_mass = p_ratio / (std::sin(gamma_t) +
                               0.50572 * std::pow(gt_deg + 6.07995, -1.6364));

  double inv_dr;
  if (air_mass <= 20.0)
    inv_dr = 6.62960 + 1.75130 * air_mass - 0.12020 * air_mass * air_mass +
             0.00650 * std::pow(air_mass, 3) - 0.00013 * std::pow(air_mass, 4);
  else
    inv_dr = 10.4 + 0.718 * air_mass;
  double delta_r = 1.0 / inv_dr;

  double beam = kSolarConstant * eccentricity *
                std::exp(-0.8662 * linke * air_mass * delta_r) * std::sin(gamma);

  double w = std::clamp((gamma / kDeg - 5.0) / 10.0, 0.0, 1.0);
  double tl = linke <= 5.5 ? linke : 5.5 + w * (linke - 5.5);
  double trd = -1.5843e-2 + 3.0543e-2 * tl + 3.797e-4 * tl * tl;
  double a0 = 2.6463e-1 - 6.1581e-2 * tl + 3.1408e-3 * tl * tl;
  if (a0 * trd < 2e-3) a0 = 2e-3 / trd;
  double a1 = 2.0402 + 1.8945e-2 * tl - 1.1161e-2 * tl * tl;
  double a2 = -1.3025 + 3.9231e-2 * tl + 8.5079e-3 * tl * tl;
  double s = std::sin(gamma);
  double fd = a0 + a1 * s + a2 * s * s;
  double diffuse = kSolarConstant * eccentricity * trd * fd;

  double taper = std::clamp(gamma / (2.0 * kDeg), 0.0, 1.0);
  out.beam = std::max(beam, 0.0) * taper;
  out.diffuse = std::max(diffuse, 0.0) * taper;
  out.ghi = out.beam + out.diffuse;
  return out;
}

inline double clearsky_ghi(double zenith_deg, double linke, int day_of_year,
                           double elevation_m) {
  return clearsky_ghi_components(zenith_deg, linke, day_of_year, elevation_m).ghi;
}

// Mean clear-sky GHI over [hour_start, hour_start + 1h), sampled on the
// configured sub-interval grid (default 1 minute, sample at interval start).
inline double hourly_clearsky(double lat_deg, double lon_deg, std::int64_t hour_start,
                              const clearsky_config& cfg) {
  int month = from_epoch(hour_start).date.month;
  double linke = cfg.monthly_linke[month - 1];
  int steps = 60 / cfg.hourly_substep_minutes;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    std::int64_t t = hour_start + static_cast<std::int64_t>(i) * cfg.hourly_substep_minutes * 60;
    solar_position pos = sun_position(t, lat_deg, lon_deg);
    acc += clearsky_ghi(pos.zenith_deg, linke, day_of_year(t), cfg.site_elevation_m);
  }
  return acc / static_cast<double>(steps);
}

inline double to_csi(double ghi, double clearsky) {
  if (!(clearsky > 0.0)) throw data_error("CSI conversion with nonpositive clear-sky value");
  return ghi / clearsky;
}

inline double from_csi(double csi, double clearsky) { return csi * clearsky; }

}  // namespace solarcast

#endif  // SOLARCAST_SOLAR_HPP_
