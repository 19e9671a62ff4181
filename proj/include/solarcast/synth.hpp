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
#ifndef SOLARCAST_SYNTH_HPP_
#define SOLARCAST_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "solarcast/features.hpp"
#include "solarcast/io/config.hpp"
#include "solarcast/io/csv.hpp"
#include "solarcast/io/dataset.hpp"
#include "solarcast/math/rng.hpp"
#include "solarcast/solar.hpp"
#include "solarcast/time.hpp"

namespace solarcast {

namespace detail {

// Markov sky regimes driving the synthetic truth.
enum sky_state { kClear = 0, kBroken = 1, kOvercast = 2 };

inline const double* sky_prior(int month) {
  static const double summer[3] = {0.45, 0.35, 0.20};
  static const double winter[3] = {0.15, 0.30, 0.55};
  static const double shoulder[3] = {0.30, 0.35, 0.35};
  if (month >= 5 && month <= 8) return summer;
  if (month == 11 || month == 12 || month <= 2) return winter;
  return shoulder;
}

inline int pick_weighted(rng& gen, const double* w) {
  double u = gen.u01() * (w[0] + w[1] + w[2]);
  if (u < w[0]) return 0;
  if (u < w[0] + w[1]) return 1;
  return 2;
}

inline double truth_csi(rng& gen, int state) {
  static const double mu[3] = {0.98, 0.60, 0.22};
  static const double sd[3] = {0.06, 0.18, 0.09};
  double v = gen.normal(mu[state], sd[state]);
  return std::clamp(v, 0.0, 1.25);
}

inline std::int64_t parse_date_or_throw(const std::string& s) {
  auto parts = split(s, '-');
  long long y, m, d;
  if (parts.size() != 3 || !parse_long(parts[0], y) || !parse_long(parts[1], m) ||
      !parse_long(parts[2], d) || m < 1 || m > 12 || d < 1 || d > 31)
    throw usage_error("synth.start_date must be YYYY-MM-DD, got '" + s + "'");
  return days_from_civil(static_cast<int>(y), static_cast<unsigned>(m),
                         static_cast<unsigned>(d)) *
         86400LL;
}

}  // namespace detail

struct synth_result {
  long observation_rows = 0;
  long model_rows = 0;
};

// Writes stations.csv, observations.csv and model_fields.csv for a small
// synthetic network. The truth is an hourly three-state sky chain with
// seasonal regime frequencies; model fields are the truth plus noise that
// grows with lead time, so forecast skill decays the way real guidance does.
inline synth_result write_synthetic_dataset(const std::string& out_dir,
                                            const run_config& cfg) {
  cfg.synth.validate();
  cfg.clearsky.validate();
  std::filesystem::create_directories(out_dir);

  struct site {
    double lat, lon, coast, water, inland;
  };
  static const site base_sites[3] = {
      {52.32, 4.30, 2.0, 1.0, 180.0},    // coastal
      {52.10, 5.18, 55.0, 8.0, 120.0},   // central
      {50.92, 5.78, 150.0, 3.0, 30.0},   // inland south
  };

  const int ns = cfg.synth.stations;
  std::vector<site> sites(static_cast<size_t>(ns));
  std::vector<std::string> ids(static_cast<size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    site st = base_sites[s % 3];
    st.lat += 0.37 * (s / 3);
    st.lon += 0.22 * (s / 3);
    sites[static_cast<size_t>(s)] = st;
    char buf[8];
    std::snprintf(buf, sizeof buf, "S%02d", s + 1);
    ids[static_cast<size_t>(s)] = buf;
  }

  {
    csv_writer w(out_dir + "/stations.csv");
    w.row({"id", "lat", "lon", "dist_coast_km", "dist_water_km", "dist_inland_km"});
    for (int s = 0; s < ns; ++s) {
      const site& st = sites[static_cast<size_t>(s)];
      w.row({ids[static_cast<size_t>(s)], fmt_double(st.lat), fmt_double(st.lon),
             fmt_double(st.coast), fmt_double(st.water), fmt_double(st.inland)});
    }
    w.close();
  }

  const std::int64_t t0 = detail::parse_date_or_throw(cfg.synth.start_date);
  const int days = cfg.synth.days;
  const int lead_lo = cfg.synth.lead_min;
  const int lead_hi = cfg.synth.lead_max;
  const int chain_hours = (days + 3) * 24;  // leads may cross the day boundary

  const auto& pl = pressure_levels_hpa();
  const auto& hl = height_levels_m();

  csv_writer obs_w(out_dir + "/observations.csv");
  obs_w.row({"station_id", "valid_time", "ghi_wm2"});
  csv_writer mod_w(out_dir + "/model_fields.csv");
  mod_w.row(model_field_columns());

  synth_result result;
  std::vector<int> state(static_cast<size_t>(chain_hours));
  std::vector<double> csi(static_cast<size_t>(chain_hours));

  for (int s = 0; s < ns; ++s) {
    const site& st = sites[static_cast<size_t>(s)];
    const std::string& id = ids[static_cast<size_t>(s)];
    rng gen(substream(cfg.seed, "synth", {static_cast<std::uint64_t>(s)}));

    // truth chain, one step per hour, persistence 0.85
    int cur = detail::pick_weighted(gen, detail::sky_prior(from_epoch(t0).date.month));
    for (int h = 0; h < chain_hours; ++h) {
      std::int64_t t = t0 + 3600LL * h;
      if (gen.u01() >= 0.85)
        cur = detail::pick_weighted(gen, detail::sky_prior(from_epoch(t).date.month));
      state[static_cast<size_t>(h)] = cur;
      csi[static_cast<size_t>(h)] = detail::truth_csi(gen, cur);
    }

    // hourly observations, one row per hour whether or not the sun is up
    for (int d = 0; d < days; ++d) {
      for (int hour = 0; hour < 24; ++hour) {
        const std::int64_t valid = t0 + 86400LL * d + 3600LL * hour;
        const double cs = hourly_clearsky(st.lat, st.lon, valid, cfg.clearsky);
        const double truth = csi[static_cast<size_t>(d * 24 + hour)];
        obs_w.row({id, format_utc(valid), fmt_double(cs > 0.0 ? from_csi(truth, cs) : 0.0)});
        ++result.observation_rows;
      }
    }

    double aod = 0.12;
    std::vector<std::string> cells;
    for (int d = 0; d < days; ++d) {
      const std::int64_t init = t0 + 86400LL * d;
      aod = std::clamp(0.12 + 0.9 * (aod - 0.12) + gen.normal(0.0, 0.03), 0.01, 1.5);
      double ang = gen.normal(1.3, 0.2);
      int doy_init = day_of_year(init);
      double oz = 300.0 + 25.0 * std::sin(2.0 * detail::kPi * (doy_init - 80) / 365.25) +
                  gen.normal(0.0, 10.0);

      for (int lead = lead_lo; lead <= lead_hi; ++lead) {
        const int h = d * 24 + lead;
        const std::int64_t valid = init + 3600LL * lead;
        const double cs = hourly_clearsky(st.lat, st.lon, valid, cfg.clearsky);
        const double truth = csi[static_cast<size_t>(h)];
        const int sky = state[static_cast<size_t>(h)];

        // forecast CSI: truth plus noise growing with lead, rare regime busts
        double fc = truth + gen.normal(0.0, 0.07 + 0.004 * lead);
        double bust = gen.u01();
        if (bust < 0.04 + 0.008 * lead)
          fc = detail::truth_csi(gen, detail::pick_weighted(
                                          gen, detail::sky_prior(from_epoch(valid).date.month)));
        fc = std::clamp(fc, 0.0, 1.3);

        double g = from_csi(fc, cs);
        // direct radiation collapses faster than global under cloud
        double dir = 0.8 * cs *
                     std::max(0.0, std::pow(std::max(fc, 0.0), 1.8) +
                                       gen.normal(0.0, 0.10 + 0.004 * lead));
        solar_position mid = sun_position(valid + 1800, st.lat, st.lon);
        double j_ang = 2.0 * detail::kPi * day_of_year(valid) / 365.25;
        double ecc = 1.0 + 0.03344 * std::cos(j_ang - 0.048869);
        double dir_toa = detail::kSolarConstant * ecc * std::max(0.0, mid.cos_zenith);
        double ncs_surf = std::max(0.0, 0.85 * cs - 50.0);
        double ncs_toa = 0.7 * dir_toa + 30.0;
        double rain = std::max(0.0, (0.45 - fc) * 2.0 *
                                        std::max(0.0, gen.normal(1.0, 0.4)));

        cells.clear();
        cells.push_back(id);
        cells.push_back(format_utc(valid));
        cells.push_back(std::to_string(lead));
        cells.push_back(fmt_double(g));
        cells.push_back(fmt_double(dir));
        cells.push_back(fmt_double(dir_toa));
        cells.push_back(fmt_double(ncs_surf));
        cells.push_back(fmt_double(ncs_toa));
        cells.push_back(fmt_double(rain));

        int doy = day_of_year(valid);
        double t_base = 283.0 + 8.0 * std::sin(2.0 * detail::kPi * (doy - 110) / 365.25) +
                        (sky == detail::kClear ? 1.5 : sky == detail::kOvercast ? -1.5 : 0.0) +
                        gen.normal(0.0, 1.0);
        for (double p : pl) {
          double z = isa_height_m(p);
          double t_level = z < 11000.0 ? t_base - 0.0065 * z : t_base - 71.5;
          cells.push_back(fmt_double(t_level + gen.normal(0.0, 0.8)));
        }
        double rh_base = sky == detail::kOvercast ? 92.0 : sky == detail::kBroken ? 70.0 : 45.0;
        for (double p : pl) {
          double z = isa_height_m(p);
          double rh = rh_base * std::exp(-z / 9000.0) + gen.normal(0.0, 5.0);
          cells.push_back(fmt_double(std::clamp(rh, 2.0, 100.0)));
        }
        double cc_base = sky == detail::kOvercast ? 0.92 : sky == detail::kBroken ? 0.45 : 0.05;
        std::vector<double> cc_levels;
        for (double z : hl) {
          double w = std::exp(-std::pow((z - 1200.0) / 2500.0, 2)) +
                     0.3 * std::exp(-std::pow((z - 5000.0) / 3000.0, 2));
          double cc = cc_base * (0.35 + 0.65 * w) + gen.normal(0.0, 0.05);
          cc_levels.push_back(std::clamp(cc, 0.0, 1.0));
        }
        for (double cc : cc_levels) cells.push_back(fmt_double(cc));
        for (double cc : cc_levels) {
          double cw = cc * std::max(0.0, gen.normal(0.12, 0.05));
          cells.push_back(fmt_double(cw));
        }
        if (lead % 3 == 0) {
          cells.push_back(fmt_double(aod));
          cells.push_back(fmt_double(ang));
          cells.push_back(fmt_double(oz));
        } else {
          cells.push_back("");
          cells.push_back("");
          cells.push_back("");
        }
        mod_w.row(cells);
        ++result.model_rows;
      }
    }
  }
  obs_w.close();
  mod_w.close();
  return result;
}

}  // namespace solarcast

#endif  // SOLARCAST_SYNTH_HPP_
