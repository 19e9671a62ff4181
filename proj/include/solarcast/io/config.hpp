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
#ifndef SOLARCAST_IO_CONFIG_HPP_
#define SOLARCAST_IO_CONFIG_HPP_

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "solarcast/common.hpp"
#include "solarcast/domain.hpp"
#include "solarcast/engines/engine.hpp"
#include "solarcast/solar.hpp"

namespace solarcast {

struct synth_config {
  int stations = 3;
  std::string start_date = "2015-01-01";
  int days = 731;
  int lead_min = 8;
  int lead_max = 16;

  void validate() const {
    if (stations < 1 || stations > 99)
      throw usage_error("synth.stations must be in [1,99]");
    if (days < 1) throw usage_error("synth.days must be positive");
    if (lead_min < 0 || lead_max < lead_min || lead_max > 48)
      throw usage_error("synth lead range invalid");
  }
};

struct run_config {
  int schema_version = 1;
  std::uint64_t seed = 1;
  int quantile_count = 49;
  double quantile_min = 0.02;
  double quantile_max = 0.98;
  std::vector<std::string> engines = engine_names();
  int folds = 3;
  double daylight_threshold_wm2 = 20.0;
  int min_cases = 50;
  std::vector<int> lead_times;  // empty: every lead present in the data
  bool seasonal_fit = true;
  bool temporal_smoothing = true;
  bool spatial_smoothing = false;
  std::vector<double> thresholds = {0.2, 0.5, 0.9};
  clearsky_config clearsky;
  engine_hyper hyper;
  synth_config synth;

  std::vector<double> levels() const {
    return quantile_levels(quantile_count, quantile_min, quantile_max);
  }

  // index of the level closest to 0.5, the forecast median
  int median_index() const {
    std::vector<double> lv = levels();
    int best = 0;
    for (size_t k = 1; k < lv.size(); ++k)
      if (std::abs(lv[k] - 0.5) < std::abs(lv[best] - 0.5))
        best = static_cast<int>(k);
    return best;
  }

  void validate() const {
    if (schema_version != 1)
      throw usage_error("unsupported config schema_version (expected 1)");
    if (folds < 2) throw usage_error("folds must be at least 2");
    if (daylight_threshold_wm2 <= 0.0)
      throw usage_error("daylight_threshold_wm2 must be positive");
    if (min_cases < 1) throw usage_error("min_cases must be positive");
    if (engines.empty()) throw usage_error("engines list is empty");
    const auto& known = engine_names();
    for (const auto& e : engines)
      if (std::find(known.begin(), known.end(), e) == known.end()) {
        std::string list;
        for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
        throw usage_error("unknown engine '" + e + "' (valid: " + list + ")");
      }
    for (double t : thresholds)
      if (t <= 0.0) throw usage_error("thresholds must be positive");
    quantile_levels(quantile_count, quantile_min, quantile_max);  // validates
    for (int lt : lead_times)
      if (lt < 0 || lt > 96) throw usage_error("lead_times entries must be in [0,96]");
    clearsky.validate();
    hyper.validate();
    synth.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["seed"] = seed;
    j["quantiles"] = {{"count", quantile_count},
                      {"min", quantile_min},
                      {"max", quantile_max}};
    j["engines"] = engines;
    j["folds"] = folds;
    j["daylight_threshold_wm2"] = daylight_threshold_wm2;
    j["min_cases"] = min_cases;
    j["lead_times"] = lead_times;
    j["seasonal_fit"] = seasonal_fit;
    j["smoothing"] = {{"temporal", temporal_smoothing},
                      {"spatial", spatial_smoothing}};
    j["thresholds"] = thresholds;
    j["clearsky"] = {
        {"monthly_linke", std::vector<double>(clearsky.monthly_linke.begin(),
                                              clearsky.monthly_linke.end())},
        {"site_elevation_m", clearsky.site_elevation_m},
        {"hourly_substep_minutes", clearsky.hourly_substep_minutes}};
    j["hyper"] = {{"steps_mu", hyper.steps_mu},
                  {"steps_sigma", hyper.steps_sigma},
                  {"steps_quantile", hyper.steps_quantile},
                  {"mcqrnn_hidden_layers", hyper.mcqrnn_hidden_layers},
                  {"mcqrnn_iterations", hyper.mcqrnn_iterations},
                  {"mcqrnn_penalty", hyper.mcqrnn_penalty},
                  {"qrf_trees", hyper.qrf_trees},
                  {"grf_trees", hyper.grf_trees},
                  {"gbdt_trees", hyper.gbdt_trees},
                  {"min_leaf", hyper.min_leaf},
                  {"case_fraction", hyper.case_fraction},
                  {"predictor_fraction", hyper.predictor_fraction},
                  {"gbdt_depth", hyper.gbdt_depth},
                  {"learning_rate", hyper.learning_rate}};
    j["synth"] = {{"stations", synth.stations},
                  {"start_date", synth.start_date},
                  {"days", synth.days},
                  {"lead_min", synth.lead_min},
                  {"lead_max", synth.lead_max}};
    return j;
  }
};

namespace detail {

// best-effort line lookup for error messages: first occurrence of the quoted
// key in the raw config text
inline long key_line(const std::string& raw, const std::string& key) {
  size_t pos = raw.find("\"" + key + "\"");
  if (pos == std::string::npos) return -1;
  return 1 + static_cast<long>(std::count(raw.begin(), raw.begin() +
                                          static_cast<long>(pos), '\n'));
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& prefix,
                                const std::set<std::string>& allowed,
                                const std::string& raw) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.count(key)) continue;
    std::string path = prefix.empty() ? key : prefix + "." + key;
    long line = key_line(raw, key);
    std::string where = line > 0 ? " (line " + std::to_string(line) + ")" : "";
    throw usage_error("unknown config key '" + path + "'" + where);
  }
}

template <typename T>
void maybe(const nlohmann::json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace detail

inline run_config config_from_json(const nlohmann::json& j, const std::string& raw) {
  if (!j.is_object()) throw usage_error("config root must be an object");
  detail::reject_unknown_keys(
      j, "",
      {"schema_version", "seed", "quantiles", "engines", "folds",
       "daylight_threshold_wm2", "min_cases", "lead_times", "seasonal_fit",
       "smoothing", "thresholds", "clearsky", "hyper", "synth"},
      raw);
  run_config c;
  detail::maybe(j, "schema_version", c.schema_version);
  detail::maybe(j, "seed", c.seed);
  if (j.contains("quantiles")) {
    const auto& q = j.at("quantiles");
    detail::reject_unknown_keys(q, "quantiles", {"count", "min", "max"}, raw);
    detail::maybe(q, "count", c.quantile_count);
    detail::maybe(q, "min", c.quantile_min);
    detail::maybe(q, "max", c.quantile_max);
  }
  detail::maybe(j, "engines", c.engines);
  detail::maybe(j, "folds", c.folds);
  detail::maybe(j, "daylight_threshold_wm2", c.daylight_threshold_wm2);
  detail::maybe(j, "min_cases", c.min_cases);
  detail::maybe(j, "lead_times", c.lead_times);
  detail::maybe(j, "seasonal_fit", c.seasonal_fit);
  if (j.contains("smoothing")) {
    const auto& s = j.at("smoothing");
    detail::reject_unknown_keys(s, "smoothing", {"temporal", "spatial"}, raw);
    detail::maybe(s, "temporal", c.temporal_smoothing);
    detail::maybe(s, "spatial", c.spatial_smoothing);
  }
  detail::maybe(j, "thresholds", c.thresholds);
  if (j.contains("clearsky")) {
    const auto& k = j.at("clearsky");
    detail::reject_unknown_keys(
        k, "clearsky",
        {"monthly_linke", "site_elevation_m", "hourly_substep_minutes"}, raw);
    if (k.contains("monthly_linke")) {
      const auto& ml = k.at("monthly_linke");
      if (ml.is_number()) {
        c.clearsky.monthly_linke.fill(ml.get<double>());
      } else {
        auto v = ml.get<std::vector<double>>();
        if (v.size() != 12)
          throw usage_error("clearsky.monthly_linke needs 12 values or one scalar");
        std::copy(v.begin(), v.end(), c.clearsky.monthly_linke.begin());
      }
    }
    detail::maybe(k, "site_elevation_m", c.clearsky.site_elevation_m);
    detail::maybe(k, "hourly_substep_minutes", c.clearsky.hourly_substep_minutes);
  }
  if (j.contains("hyper")) {
    const auto& h = j.at("hyper");
    detail::reject_unknown_keys(
        h, "hyper",
        {"steps_mu", "steps_sigma", "steps_quantile", "mcqrnn_hidden_layers",
         "mcqrnn_iterations", "mcqrnn_penalty", "qrf_trees", "grf_trees",
         "gbdt_trees", "min_leaf", "case_fraction", "predictor_fraction",
         "gbdt_depth", "learning_rate"},
        raw);
    detail::maybe(h, "steps_mu", c.hyper.steps_mu);
    detail::maybe(h, "steps_sigma", c.hyper.steps_sigma);
    detail::maybe(h, "steps_quantile", c.hyper.steps_quantile);
    detail::maybe(h, "mcqrnn_hidden_layers", c.hyper.mcqrnn_hidden_layers);
    detail::maybe(h, "mcqrnn_iterations", c.hyper.mcqrnn_iterations);
    detail::maybe(h, "mcqrnn_penalty", c.hyper.mcqrnn_penalty);
    detail::maybe(h, "qrf_trees", c.hyper.qrf_trees);
    detail::maybe(h, "grf_trees", c.hyper.grf_trees);
    detail::maybe(h, "gbdt_trees", c.hyper.gbdt_trees);
    detail::maybe(h, "min_leaf", c.hyper.min_leaf);
    detail::maybe(h, "case_fraction", c.hyper.case_fraction);
    detail::maybe(h, "predictor_fraction", c.hyper.predictor_fraction);
    detail::maybe(h, "gbdt_depth", c.hyper.gbdt_depth);
    detail::maybe(h, "learning_rate", c.hyper.learning_rate);
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    detail::reject_unknown_keys(
        s, "synth", {"stations", "start_date", "days", "lead_min", "lead_max"},
        raw);
    detail::maybe(s, "stations", c.synth.stations);
    detail::maybe(s, "start_date", c.synth.start_date);
    detail::maybe(s, "days", c.synth.days);
    detail::maybe(s, "lead_min", c.synth.lead_min);
    detail::maybe(s, "lead_max", c.synth.lead_max);
  }
  c.validate();
  return c;
}

struct loaded_config {
  run_config cfg;
  nlohmann::json json;
  std::uint64_t hash = 0;  // over the raw file bytes
  std::string path;
};

inline loaded_config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string raw = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(path + ": " + e.what());
  }
  loaded_config lc;
  lc.cfg = config_from_json(j, raw);
  lc.json = lc.cfg.to_json();
  lc.hash = fnv1a(raw);
  lc.path = path;
  return lc;
}

}  // namespace solarcast

#endif  // SOLARCAST_IO_CONFIG_HPP_
