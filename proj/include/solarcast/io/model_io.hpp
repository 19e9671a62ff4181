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
#ifndef SOLARCAST_IO_MODEL_IO_HPP_
#define SOLARCAST_IO_MODEL_IO_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "solarcast/common.hpp"
#include "solarcast/domain.hpp"
#include "solarcast/io/config.hpp"

namespace solarcast {

struct model_key {
  std::string engine;
  std::string season;
  int lead = 0;
  int fold = 0;
};

inline std::string model_filename(const model_key& k) {
  return k.season + "_L" + std::to_string(k.lead) + "_f" +
         std::to_string(k.fold) + ".json";
}

inline std::string model_path(const std::string& out_dir, const model_key& k) {
  return out_dir + "/models/" + k.engine + "/" + model_filename(k);
}

// Provenance stored with every model; predict refuses on any mismatch.
struct model_stamp {
  std::uint64_t config_hash = 0;
  std::uint64_t data_hash = 0;
  std::uint64_t registry_hash = 0;
  std::uint64_t seed = 0;          // cell-level seed
  std::uint64_t matrix_hash = 0;   // training predictor matrix
  std::string engine_version;
};

inline nlohmann::json wrap_model(const model_key& key, const model_stamp& stamp,
                                 const nlohmann::json& hyper,
                                 nlohmann::json payload) {
  nlohmann::json j;
  j["engine"] = key.engine;
  j["season"] = key.season;
  j["lead_time"] = key.lead;
  j["fold"] = key.fold;
  j["engine_version"] = stamp.engine_version;
  j["config_hash"] = hex64(stamp.config_hash);
  j["data_hash"] = hex64(stamp.data_hash);
  j["registry_hash"] = hex64(stamp.registry_hash);
  j["matrix_hash"] = hex64(stamp.matrix_hash);
  j["seed"] = stamp.seed;
  j["hyper"] = hyper;
  j["payload"] = std::move(payload);
  return j;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path);
  out << j.dump(1, '\t') << '\n';
  out.close();
  if (!out) throw data_error("failed writing " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
}

inline void check_model_stamp(const nlohmann::json& model, const std::string& path,
                              std::uint64_t config_hash, std::uint64_t data_hash,
                              const std::string& engine_version) {
  auto expect = [&](const char* field, const std::string& want) {
    std::string got = model.at(field).get<std::string>();
    if (got != want)
      throw data_error(path + ": " + field + " mismatch (model " + got +
                       ", current " + want + ")");
  };
  expect("config_hash", hex64(config_hash));
  expect("data_hash", hex64(data_hash));
  expect("registry_hash", hex64(registry_hash()));
  std::string v = model.at("engine_version").get<std::string>();
  if (v != engine_version)
    throw data_error(path + ": engine_version mismatch (model " + v +
                     ", current " + engine_version + ")");
}

inline void write_manifest(const std::string& out_dir, const loaded_config& lc,
                           std::uint64_t data_hash,
                           const std::map<std::string, std::string>& engine_versions) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = lc.json;
  j["config_hash"] = hex64(lc.hash);
  j["data_hash"] = hex64(data_hash);
  j["registry_hash"] = hex64(registry_hash());
  j["seed"] = lc.cfg.seed;
  j["levels"] = lc.cfg.levels();
  j["engine_versions"] = engine_versions;
  write_json_file(out_dir + "/models/manifest.json", j);
}

}  // namespace solarcast

#endif  // SOLARCAST_IO_MODEL_IO_HPP_
