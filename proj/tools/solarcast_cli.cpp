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
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "solarcast/harness.hpp"
#include "solarcast/synth.hpp"

namespace {

struct cli_args {
  std::string config;
  std::string data;
  std::string out;
  std::string engines;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

void add_common_flags(CLI::App* sub, cli_args& a) {
  sub->add_option("--config", a.config, "configuration file (JSON)");
  sub->add_option("--data", a.data, "input data directory");
  sub->add_option("--out", a.out, "output directory");
  sub->add_option("--engines", a.engines,
                  "comma-separated engine list, overrides the config");
  sub->add_option("--seed", a.seed, "root seed, overrides the config")
      ->each([&a](const std::string&) { a.seed_set = true; });
  sub->add_option("--jobs", a.jobs, "worker threads for fit/predict")
      ->check(CLI::PositiveNumber);
}

void require(const std::string& value, const char* flag) {
  if (value.empty())
    throw solarcast::usage_error(std::string(flag) + " is required for this command");
}

solarcast::loaded_config effective_config(const cli_args& a) {
  require(a.config, "--config");
  solarcast::loaded_config lc = solarcast::load_config(a.config);
  if (a.seed_set) lc.cfg.seed = a.seed;
  if (!a.engines.empty()) {
    lc.cfg.engines.clear();
    for (const auto& part : solarcast::split(a.engines, ',')) {
      std::string e{solarcast::trim(part)};
      if (!e.empty()) lc.cfg.engines.push_back(e);
    }
  }
  lc.cfg.validate();
  // the hash binds models to the effective configuration, overrides included
  lc.json = lc.cfg.to_json();
  lc.hash = solarcast::fnv1a(lc.json.dump());
  return lc;
}

void log_config(const std::string& out_dir, const solarcast::loaded_config& lc) {
  solarcast::write_json_file(out_dir + "/config_used.json", lc.json);
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int cmd_synth(const cli_args& a) {
  auto lc = effective_config(a);
  require(a.out, "--out");
  log_config(a.out, lc);
  solarcast::synth_result r = solarcast::write_synthetic_dataset(a.out, lc.cfg);
  std::printf("stations: %d\nobservations: %ld rows\nmodel_fields: %ld rows\n",
              lc.cfg.synth.stations, r.observation_rows, r.model_rows);
  return 0;
}

int cmd_fit(const cli_args& a) {
  auto lc = effective_config(a);
  require(a.data, "--data");
  require(a.out, "--out");
  solarcast::dataset data = solarcast::load_dataset(a.data, lc.cfg);
  log_config(a.out, lc);
  solarcast::experiment_plan plan = solarcast::make_slices(data, lc.cfg);
  warn_all(plan.warnings);
  if (plan.slices.empty())
    std::fprintf(stderr, "warning: no eligible fit slices, nothing to fit\n");
  solarcast::fit_summary s =
      solarcast::fit_all(data, lc, plan, lc.cfg.engines, a.jobs, a.out);
  std::printf("slices: %zu\nmodels: %zu written, %zu failed\n", plan.slices.size(),
              s.cells - s.failed, s.failed);
  return 0;
}

int cmd_predict(const cli_args& a) {
  auto lc = effective_config(a);
  require(a.data, "--data");
  require(a.out, "--out");
  solarcast::dataset data = solarcast::load_dataset(a.data, lc.cfg);
  log_config(a.out, lc);
  solarcast::experiment_plan plan = solarcast::make_slices(data, lc.cfg);
  warn_all(plan.warnings);
  std::vector<solarcast::note_row> notes;
  std::vector<solarcast::forecast_row> rows =
      solarcast::predict_all(data, lc, plan, lc.cfg.engines, a.jobs, a.out, notes);
  solarcast::write_forecasts(a.out + "/forecasts.csv", lc.cfg.levels(),
                             lc.cfg.median_index(), rows);
  solarcast::write_notes(a.out + "/reports/predict_errors.csv", notes);
  if (rows.empty()) std::fprintf(stderr, "warning: no forecast rows produced\n");
  std::printf("forecasts: %zu rows, %zu cells with errors\n", rows.size(),
              notes.size());
  return 0;
}

int cmd_verify(const cli_args& a) {
  auto lc = effective_config(a);
  require(a.out, "--out");
  solarcast::forecast_file f = solarcast::read_forecasts(a.out + "/forecasts.csv");
  log_config(a.out, lc);
  solarcast::verify_output v;
  if (f.rows.empty())
    std::fprintf(stderr, "warning: no forecast rows to verify, reports are empty\n");
  else
    v = solarcast::verify_forecasts(f, lc.cfg);
  solarcast::write_metrics(a.out + "/reports/metrics.csv", v.metrics);
  solarcast::write_reliability(a.out + "/reports/reliability.csv", v.reliability_rows);
  solarcast::write_pev(a.out + "/reports/pev.csv", v.pev_rows);
  std::printf("metrics: %zu rows\nreliability: %zu rows\npev: %zu rows\n",
              v.metrics.size(), v.reliability_rows.size(), v.pev_rows.size());
  return 0;
}

int cmd_report(const cli_args& a) {
  require(a.out, "--out");
  if (!std::filesystem::exists(a.out + "/reports/metrics.csv"))
    throw solarcast::data_error(a.out + "/reports/metrics.csv not found; run verify first");
  solarcast::build_report_tables(a.out);
  std::printf("tables written to %s/tables\n", a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic clear-sky-index forecasting toolkit"};
  app.require_subcommand(1);
  cli_args a;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  CLI::App* fit = app.add_subcommand("fit", "fit engines per season/lead/fold");
  CLI::App* predict = app.add_subcommand("predict", "produce quantile forecasts");
  CLI::App* verify = app.add_subcommand("verify", "score forecasts against observations");
  CLI::App* report = app.add_subcommand("report", "build comparison tables");
  for (CLI::App* sub : {synth, fit, predict, verify, report}) add_common_flags(sub, a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(a);
    if (fit->parsed()) return cmd_fit(a);
    if (predict->parsed()) return cmd_predict(a);
    if (verify->parsed()) return cmd_verify(a);
    if (report->parsed()) return cmd_report(a);
    std::fprintf(stderr, "error: no command given\n");
    return 1;
  } catch (const solarcast::usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const solarcast::data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
