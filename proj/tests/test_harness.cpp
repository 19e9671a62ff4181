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
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "solarcast/harness.hpp"
#include "solarcast/synth.hpp"

using namespace solarcast;

namespace {

struct temp_dir {
  std::filesystem::path path;
  explicit temp_dir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() / ("solarcast_harness_" + tag)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~temp_dir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::int64_t utc(const std::string& iso) {
  std::int64_t t = 0;
  REQUIRE(parse_utc(iso, t));
  return t;
}

forecast_case mk_case(std::int64_t valid, int lead, double obs, double cs,
                      const std::string& sid = "S01") {
  forecast_case fc;
  fc.station_id = sid;
  fc.valid_time = valid;
  fc.lead_time = lead;
  fc.observation = obs;
  fc.clearsky_wm2 = cs;
  fc.predictors.assign(predictor_registry().size(), 0.5);
  return fc;
}

double find_metric(const std::vector<metric_row>& rows, const std::string& engine,
                   const std::string& metric) {
  for (const auto& r : rows)
    if (r.engine == engine && r.metric == metric) return r.value;
  FAIL("metric not found: " << engine << " " << metric);
  return 0.0;
}

}  // namespace

TEST_CASE("synthetic dataset has the contracted shape and is seed-stable") {
  temp_dir td("synth");
  run_config cfg;
  cfg.seed = 404;
  cfg.synth.stations = 1;
  cfg.synth.days = 30;
  cfg.synth.lead_min = 8;
  cfg.synth.lead_max = 16;

  std::filesystem::create_directories(td.file("a"));
  auto res = write_synthetic_dataset(td.file("a"), cfg);
  REQUIRE(res.observation_rows == 1 * 30 * 24);
  REQUIRE(res.model_rows == 1 * 30 * 9);

  std::filesystem::create_directories(td.file("b"));
  auto res2 = write_synthetic_dataset(td.file("b"), cfg);
  REQUIRE(res2.observation_rows == res.observation_rows);
  for (const char* f : {"stations.csv", "observations.csv", "model_fields.csv"})
    REQUIRE(slurp(td.file("a") + "/" + std::string(f)) ==
            slurp(td.file("b") + "/" + std::string(f)));

  run_config other = cfg;
  other.seed = 405;
  std::filesystem::create_directories(td.file("c"));
  write_synthetic_dataset(td.file("c"), other);
  REQUIRE(slurp(td.file("a") + "/model_fields.csv") !=
          slurp(td.file("c") + "/model_fields.csv"));
}

TEST_CASE("synthetic dataset loads cleanly with plausible clear-sky indices") {
  temp_dir td("synthload");
  run_config cfg;
  cfg.seed = 7;
  cfg.synth.stations = 2;
  cfg.synth.days = 10;
  cfg.synth.start_date = "2015-06-01";
  cfg.synth.lead_min = 10;
  cfg.synth.lead_max = 14;
  write_synthetic_dataset(td.str(), cfg);

  dataset ds = load_dataset(td.str(), cfg);
  REQUIRE(ds.stations.size() == 2);
  REQUIRE(ds.cases.size() == 2 * 10 * 5);
  REQUIRE(ds.cams_missing_runs == 0);
  long daylight = 0;
  for (const auto& fc : ds.cases) {
    if (fc.clearsky_wm2 <= 0.0) continue;
    ++daylight;
    REQUIRE(fc.observation >= 0.0);
    REQUIRE(fc.observation <= 1.3);
    for (double v : fc.predictors) REQUIRE(std::isfinite(v));
  }
  REQUIRE(daylight > 0);
}

TEST_CASE("slices split eligible dates into consecutive blocks per fold") {
  dataset ds;
  ds.stations.push_back({"S01", 52.1, 5.18, 55.0, 8.0, 120.0});
  const std::int64_t base = utc("2015-06-01T12:00:00Z");
  for (int d = 0; d < 90; ++d)
    ds.cases.push_back(mk_case(base + 86400LL * d, 12, 0.6 + 0.001 * d, 500.0));

  run_config cfg;
  cfg.seasonal_fit = false;
  cfg.folds = 3;
  cfg.min_cases = 5;
  experiment_plan plan = make_slices(ds, cfg);
  REQUIRE(plan.slices.size() == 3);
  REQUIRE(plan.dropped_night == 0);

  std::set<int> all_test;
  for (int fold = 0; fold < 3; ++fold) {
    const fit_slice& s = plan.slices[static_cast<size_t>(fold)];
    REQUIRE(s.season == "annual");
    REQUIRE(s.lead == 12);
    REQUIRE(s.fold == fold);
    REQUIRE(s.test.size() == 30);
    REQUIRE(s.train.size() == 60);

    // thirty consecutive dates per test block, fold blocks in date order
    std::set<std::int64_t> dates;
    for (int i : s.test) dates.insert(ds.cases[static_cast<size_t>(i)].valid_time / 86400);
    REQUIRE(dates.size() == 30);
    REQUIRE(*dates.rbegin() - *dates.begin() == 29);
    REQUIRE(*dates.begin() == base / 86400 + 30LL * fold);

    // train and test partition the group
    std::set<int> ids(s.train.begin(), s.train.end());
    for (int i : s.test) REQUIRE_FALSE(ids.count(i));
    for (int i : s.test) REQUIRE(all_test.insert(i).second);

    // matrices mirror the case table
    REQUIRE(s.x_train.rows() == 60);
    REQUIRE(s.x_train.cols() ==
            static_cast<Eigen::Index>(predictor_registry().size()));
    for (size_t r = 0; r < s.train.size(); ++r) {
      REQUIRE(s.y_train(static_cast<Eigen::Index>(r)) ==
              ds.cases[static_cast<size_t>(s.train[r])].observation);
      REQUIRE(s.x_train(static_cast<Eigen::Index>(r), 0) ==
              ds.cases[static_cast<size_t>(s.train[r])].predictors[0]);
    }
    REQUIRE(s.matrix_hash != 0);
  }
  REQUIRE(all_test.size() == 90);  // folds jointly cover every eligible case
}

TEST_CASE("slicing filters night, missing, and unrequested-lead cases") {
  dataset ds;
  ds.stations.push_back({"S01", 52.1, 5.18, 55.0, 8.0, 120.0});
  const std::int64_t base = utc("2015-06-01T12:00:00Z");
  for (int d = 0; d < 10; ++d)
    ds.cases.push_back(mk_case(base + 86400LL * d, 12, 0.6, 500.0));
  ds.cases.push_back(mk_case(base + 86400LL * 10, 12, 0.6, 19.9));
  ds.cases.push_back(mk_case(base + 86400LL * 11, 12, 0.6, 20.0));  // boundary
  ds.cases.push_back(mk_case(base + 86400LL * 12, 12, 0.6, 20.1));
  ds.cases.push_back(mk_case(base + 86400LL * 13, 12, na_value(), 500.0));
  forecast_case holey = mk_case(base + 86400LL * 14, 12, 0.6, 500.0);
  holey.predictors[5] = na_value();
  ds.cases.push_back(holey);
  ds.cases.push_back(mk_case(base + 86400LL * 15, 13, 0.6, 500.0));  // other lead

  run_config cfg;
  cfg.seasonal_fit = false;
  cfg.folds = 2;
  cfg.min_cases = 1;
  cfg.lead_times = {12};
  experiment_plan plan = make_slices(ds, cfg);
  REQUIRE(plan.dropped_night == 2);
  REQUIRE(plan.dropped_no_observation == 1);
  REQUIRE(plan.dropped_incomplete == 1);
  size_t eligible = 0;
  for (const auto& s : plan.slices) eligible += s.test.size();
  REQUIRE(eligible == 11);  // ten clear days plus the 20.1 boundary case
}

TEST_CASE("slices below the case minimum are skipped with a warning") {
  dataset ds;
  ds.stations.push_back({"S01", 52.1, 5.18, 55.0, 8.0, 120.0});
  const std::int64_t base = utc("2015-06-01T12:00:00Z");
  for (int d = 0; d < 30; ++d)
    ds.cases.push_back(mk_case(base + 86400LL * d, 12, 0.6, 500.0));
  run_config cfg;
  cfg.seasonal_fit = false;
  experiment_plan plan = make_slices(ds, cfg);  // default minimum of 50
  REQUIRE(plan.slices.empty());
  bool mentioned = false;
  for (const auto& w : plan.warnings)
    if (w.find("need 50") != std::string::npos) mentioned = true;
  REQUIRE(mentioned);
}

TEST_CASE("seasonal slicing groups by meteorological season and flags gaps") {
  dataset ds;
  ds.stations.push_back({"S01", 52.1, 5.18, 55.0, 8.0, 120.0});
  const std::int64_t jan = utc("2015-01-05T12:00:00Z");
  for (int d = 0; d < 9; ++d)
    ds.cases.push_back(mk_case(jan + 86400LL * d, 12, 0.6, 500.0));
  run_config cfg;
  cfg.folds = 3;
  cfg.min_cases = 2;
  experiment_plan plan = make_slices(ds, cfg);
  REQUIRE(plan.slices.size() == 3);
  for (const auto& s : plan.slices) REQUIRE(s.season == "winter");
  std::string joined;
  for (const auto& w : plan.warnings) joined += w + "\n";
  for (const char* missing : {"spring", "summer", "autumn"})
    REQUIRE(joined.find("season " + std::string(missing)) != std::string::npos);
}

TEST_CASE("cell seeds depend on every coordinate") {
  std::uint64_t a = cell_seed(1, "qr", "summer", 12, 0);
  REQUIRE(a == cell_seed(1, "qr", "summer", 12, 0));
  REQUIRE(a != cell_seed(2, "qr", "summer", 12, 0));
  REQUIRE(a != cell_seed(1, "ga", "summer", 12, 0));
  REQUIRE(a != cell_seed(1, "qr", "winter", 12, 0));
  REQUIRE(a != cell_seed(1, "qr", "summer", 13, 0));
  REQUIRE(a != cell_seed(1, "qr", "summer", 12, 1));
}

TEST_CASE("matrix hash is sensitive to any predictor change") {
  fit_slice s;
  s.x_train = Eigen::MatrixXd::Constant(3, 2, 1.0);
  s.x_test = Eigen::MatrixXd::Constant(2, 2, 2.0);
  s.y_train = Eigen::VectorXd::Constant(3, 0.5);
  std::uint64_t h = detail::slice_matrix_hash(s);
  fit_slice t = s;
  t.x_train(0, 0) += 1e-12;
  REQUIRE(detail::slice_matrix_hash(t) != h);
  t = s;
  t.y_train(2) = 0.25;
  REQUIRE(detail::slice_matrix_hash(t) != h);
  t = s;
  t.x_test(1, 1) = 0.0;
  REQUIRE(detail::slice_matrix_hash(t) != h);
}

TEST_CASE("verification scores perfect forecasts as perfect") {
  forecast_file f;
  f.levels = {0.25, 0.5, 0.75};
  const std::int64_t base = utc("2015-06-01T12:00:00Z");
  for (int i = 0; i < 60; ++i) {
    double obs = i % 2 == 0 ? 0.3 : 0.7;
    forecast_row r{"qr", "summer", 12, 0, "S01", base + 86400LL * i,
                   obs, 600.0, {obs, obs, obs}};
    f.rows.push_back(r);
  }
  // a row without an observation must not contribute
  f.rows.push_back({"qr", "summer", 12, 0, "S01", base - 86400, na_value(),
                    600.0, {0.5, 0.5, 0.5}});

  run_config cfg;  // thresholds 0.2, 0.5, 0.9
  verify_output out = verify_forecasts(f, cfg);

  REQUIRE(find_metric(out.metrics, "qr", "n") == 60.0);
  REQUIRE(find_metric(out.metrics, "qr", "rmse") == 0.0);
  REQUIRE(find_metric(out.metrics, "qr", "rmse_ss") == 1.0);
  REQUIRE(find_metric(out.metrics, "qr", "crps") == 0.0);
  REQUIRE(find_metric(out.metrics, "qr", "crpss") == 1.0);
  REQUIRE(find_metric(out.metrics, "qr", "bss_0.5") == 1.0);
  REQUIRE(is_na(find_metric(out.metrics, "qr", "bss_0.2")));  // no events
  REQUIRE(is_na(find_metric(out.metrics, "qr", "bss_0.9")));  // all events

  // reliability: per-lead and pooled rows, ten bins each, three thresholds
  REQUIRE(out.reliability_rows.size() == 2 * 3 * 10);
  bool pooled = false;
  for (const auto& r : out.reliability_rows)
    if (r.season == "all" && r.lead == "all") pooled = true;
  REQUIRE(pooled);

  // value curves: per-season and pooled, full cost-loss grid
  REQUIRE(out.pev_rows.size() == 2 * 3 * 99);
  for (const auto& r : out.pev_rows) {
    if (r.threshold == 0.5)
      REQUIRE_THAT(r.value, Catch::Matchers::WithinAbs(1.0, 1e-12));
    else
      REQUIRE(is_na(r.value));  // degenerate base rates at 0.2 and 0.9
  }
}

TEST_CASE("report tables aggregate metrics with case-count weights") {
  temp_dir td("tables");
  std::string run = td.str();
  ensure_dir(run + "/reports");

  std::vector<metric_row> metrics = {
      {"ga", "summer", 12, 0, "crpss", 0.2},  {"ga", "summer", 12, 0, "n", 10},
      {"ga", "summer", 12, 1, "crpss", 0.4},  {"ga", "summer", 12, 1, "n", 30},
      {"ga", "summer", 12, 0, "rmse_ss", 0.1}, {"ga", "summer", 12, 1, "rmse_ss", 0.1},
      {"ga", "summer", 12, 0, "bss_0.5", 0.3}, {"ga", "summer", 12, 1, "bss_0.5", 0.3},
      {"qr", "summer", 12, 0, "crpss", 0.15}, {"qr", "summer", 12, 0, "n", 10},
  };
  write_metrics(run + "/reports/metrics.csv", metrics);
  write_reliability(run + "/reports/reliability.csv",
                    {{"ga", "all", "all", 0.5, 0, 0.05, 0.04, 100},
                     {"ga", "summer", "12", 0.5, 0, 0.05, 0.04, 50}});
  write_pev(run + "/reports/pev.csv",
            {{"ga", "all", "all", 0.5, 0.99, 0.2},
             {"ga", "all", "all", 0.5, 0.2, 0.6},
             {"ga", "summer", "all", 0.5, 0.2, 0.5}});
  write_importance(run + "/reports/importance_stepwise.csv", {"ga"},
                   {{"ga", {{"g", 3.0}}}});

  build_report_tables(run);

  csv_table skill = read_csv(run + "/tables/skill_vs_leadtime.csv");
  REQUIRE(skill.header ==
          std::vector<std::string>{"season", "lead_time", "metric", "ga", "qr"});
  bool found = false;
  for (const auto& row : skill.rows) {
    if (row[0] == "summer" && row[2] == "crpss") {
      REQUIRE(row[3] == "0.35");  // (0.2*10 + 0.4*30) / 40
      REQUIRE(row[4] == "0.15");
      found = true;
    }
    if (row[0] == "all" && row[2] == "crpss") REQUIRE(row[3] == "0.35");
  }
  REQUIRE(found);

  csv_table bss = read_csv(run + "/tables/bss_vs_threshold.csv");
  REQUIRE(bss.header[0] == "season");
  REQUIRE(bss.rows.size() >= 2);  // summer and pooled

  csv_table rel = read_csv(run + "/tables/reliability.csv");
  REQUIRE(rel.rows.size() == 1);  // only pooled rows pass through
  REQUIRE(rel.rows[0][0] == "ga");

  csv_table pev = read_csv(run + "/tables/pev_vs_costloss.csv");
  REQUIRE(pev.header == std::vector<std::string>{"threshold", "cost_loss", "ga", "qr"});
  REQUIRE(pev.rows.size() == 2);
  REQUIRE(pev.rows[0][1] == "0.2");  // numeric ordering
  REQUIRE(pev.rows[1][1] == "0.99");
  REQUIRE(pev.rows[0][3] == "NA");  // engine without rows

  REQUIRE(std::filesystem::exists(run + "/tables/importance_stepwise.csv"));
}

TEST_CASE("fit, predict, and verify chain is deterministic across job counts") {
  temp_dir td("chain");
  run_config cfg;
  cfg.seed = 2025;
  cfg.engines = {"qr"};
  cfg.folds = 2;
  cfg.min_cases = 20;
  cfg.seasonal_fit = false;
  cfg.hyper.steps_quantile = 2;
  cfg.synth.stations = 1;
  cfg.synth.days = 60;
  cfg.synth.start_date = "2015-06-01";
  cfg.synth.lead_min = 12;
  cfg.synth.lead_max = 12;

  std::string data_dir = td.file("data");
  std::filesystem::create_directories(data_dir);
  write_synthetic_dataset(data_dir, cfg);

  loaded_config lc;
  lc.cfg = cfg;
  lc.json = cfg.to_json();
  lc.hash = fnv1a(lc.json.dump());
  lc.path = "inline";

  dataset ds = load_dataset(data_dir, cfg);
  experiment_plan plan = make_slices(ds, cfg);
  REQUIRE(plan.slices.size() == 2);

  auto run_once = [&](const std::string& run, int jobs) {
    fit_summary fs = fit_all(ds, lc, plan, cfg.engines, jobs, run);
    REQUIRE(fs.cells == 2);
    REQUIRE(fs.failed == 0);
    std::vector<note_row> notes;
    auto rows = predict_all(ds, lc, plan, cfg.engines, jobs, run, notes);
    REQUIRE(notes.empty());
    REQUIRE(rows.size() == plan.slices[0].test.size() + plan.slices[1].test.size());
    for (const auto& r : rows) {
      REQUIRE(r.q.size() == cfg.levels().size());
      for (size_t k = 1; k < r.q.size(); ++k) REQUIRE(r.q[k] >= r.q[k - 1]);
      REQUIRE(r.q.front() >= 0.0);
    }
    ensure_dir(run + "/forecasts");
    write_forecasts(run + "/forecasts/forecasts.csv", cfg.levels(),
                    cfg.median_index(), rows);
    auto f = read_forecasts(run + "/forecasts/forecasts.csv");
    auto vo = verify_forecasts(f, cfg);
    write_metrics(run + "/reports/metrics.csv", vo.metrics);
    write_reliability(run + "/reports/reliability.csv", vo.reliability_rows);
    write_pev(run + "/reports/pev.csv", vo.pev_rows);
    build_report_tables(run);
  };

  run_once(td.file("run1"), 1);
  run_once(td.file("run2"), 2);

  for (const char* rel : {"models/qr/annual_L12_f0.json", "models/qr/annual_L12_f1.json",
                          "models/manifest.json", "forecasts/forecasts.csv",
                          "reports/metrics.csv", "reports/pev.csv",
                          "tables/skill_vs_leadtime.csv"})
    REQUIRE(slurp(td.file("run1") + "/" + std::string(rel)) ==
            slurp(td.file("run2") + "/" + std::string(rel)));

  // the sliced matrix is identical for every engine cell, and the stamp
  // pins it: corrupting the stored hash must make predict refuse
  std::string mpath = td.file("run1") + "/models/qr/annual_L12_f0.json";
  nlohmann::json model = read_json_file(mpath);
  model["matrix_hash"] = hex64(0xdeadbeefull);
  write_json_file(mpath, model);
  std::vector<note_row> notes;
  REQUIRE_THROWS_WITH(
      predict_all(ds, lc, plan, cfg.engines, 1, td.file("run1"), notes),
      Catch::Matchers::ContainsSubstring("matrix_hash mismatch"));
}
