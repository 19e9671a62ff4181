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
#ifndef SOLARCAST_HARNESS_HPP_
#define SOLARCAST_HARNESS_HPP_

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "solarcast/engines/factory.hpp"
#include "solarcast/io/dataset.hpp"
#include "solarcast/io/model_io.hpp"
#include "solarcast/io/reports.hpp"
#include "solarcast/verify.hpp"

namespace solarcast {

struct fit_slice {
  std::string season;
  int lead = 0;
  int fold = 0;
  std::vector<int> train;  // indices into dataset.cases
  std::vector<int> test;
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd y_train;
  std::uint64_t matrix_hash = 0;
};

struct experiment_plan {
  long dropped_night = 0;
  long dropped_incomplete = 0;
  long dropped_no_observation = 0;
  std::vector<fit_slice> slices;
  std::vector<std::string> warnings;  // skipped cells, empty seasons
};

namespace detail {

inline std::uint64_t hash_matrix(std::uint64_t h, const Eigen::MatrixXd& m) {
  h = fnv1a_u64(static_cast<std::uint64_t>(m.rows()), h);
  h = fnv1a_u64(static_cast<std::uint64_t>(m.cols()), h);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      h = fnv1a_u64(std::bit_cast<std::uint64_t>(m(r, c)), h);
  return h;
}

inline std::uint64_t slice_matrix_hash(const fit_slice& s) {
  std::uint64_t h = hash_matrix(fnv1a("slice-matrix"), s.x_train);
  h = fnv1a_u64(static_cast<std::uint64_t>(s.y_train.size()), h);
  for (Eigen::Index i = 0; i < s.y_train.size(); ++i)
    h = fnv1a_u64(std::bit_cast<std::uint64_t>(s.y_train(i)), h);
  return hash_matrix(h, s.x_test);
}

inline std::int64_t date_of(std::int64_t t) {
  return t >= 0 ? t / 86400 : (t - 86399) / 86400;
}

}  // namespace detail

// Slicing: daylight filter, completeness filter, then per (season, lead time)
// a cross-validation split whose test folds are blocks of consecutive dates.
inline experiment_plan make_slices(const dataset& data, const run_config& cfg) {
  experiment_plan plan;
  const size_t np = predictor_registry().size();

  std::set<int> lead_filter(cfg.lead_times.begin(), cfg.lead_times.end());
  std::map<std::pair<std::string, int>, std::vector<int>> groups;
  for (size_t i = 0; i < data.cases.size(); ++i) {
    const forecast_case& fc = data.cases[i];
    if (!(fc.clearsky_wm2 > cfg.daylight_threshold_wm2)) {
      ++plan.dropped_night;
      continue;
    }
    if (!lead_filter.empty() && !lead_filter.count(fc.lead_time)) continue;
    if (std::isnan(fc.observation)) {
      ++plan.dropped_no_observation;
      continue;
    }
    bool complete = fc.predictors.size() == np;
    for (size_t j = 0; complete && j < np; ++j)
      if (std::isnan(fc.predictors[j])) complete = false;
    if (!complete) {
      ++plan.dropped_incomplete;
      continue;
    }
    std::string season = cfg.seasonal_fit ? season_name(season_of(fc.valid_time)) : "annual";
    groups[{season, fc.lead_time}].push_back(static_cast<int>(i));
  }

  std::map<std::string, int> emitted_per_season;
  for (const auto& [key, idx] : groups) {
    std::vector<std::int64_t> dates;
    dates.reserve(idx.size());
    for (int i : idx) dates.push_back(detail::date_of(data.cases[static_cast<size_t>(i)].valid_time));
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
    const long nd = static_cast<long>(dates.size());

    for (int fold = 0; fold < cfg.folds; ++fold) {
      long lo = nd * fold / cfg.folds;
      long hi = nd * (fold + 1) / cfg.folds;
      if (lo >= hi) continue;
      std::int64_t d_lo = dates[static_cast<size_t>(lo)];
      std::int64_t d_hi = dates[static_cast<size_t>(hi - 1)];
      fit_slice s;
      s.season = key.first;
      s.lead = key.second;
      s.fold = fold;
      for (int i : idx) {
        std::int64_t d = detail::date_of(data.cases[static_cast<size_t>(i)].valid_time);
        (d >= d_lo && d <= d_hi ? s.test : s.train).push_back(i);
      }
      if (static_cast<int>(s.train.size()) < cfg.min_cases ||
          static_cast<int>(s.test.size()) < cfg.min_cases) {
        plan.warnings.push_back("skipped " + s.season + " L" + std::to_string(s.lead) +
                                " fold " + std::to_string(fold) + ": train " +
                                std::to_string(s.train.size()) + ", test " +
                                std::to_string(s.test.size()) + " (need " +
                                std::to_string(cfg.min_cases) + " each)");
        continue;
      }
      auto fill = [&](const std::vector<int>& rows, Eigen::MatrixXd& x) {
        x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(np));
        for (size_t r = 0; r < rows.size(); ++r)
          for (size_t c = 0; c < np; ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                data.cases[static_cast<size_t>(rows[r])].predictors[c];
      };
      fill(s.train, s.x_train);
      fill(s.test, s.x_test);
      s.y_train.resize(static_cast<Eigen::Index>(s.train.size()));
      for (size_t r = 0; r < s.train.size(); ++r)
        s.y_train(static_cast<Eigen::Index>(r)) =
            data.cases[static_cast<size_t>(s.train[r])].observation;
      s.matrix_hash = detail::slice_matrix_hash(s);
      plan.slices.push_back(std::move(s));
      ++emitted_per_season[key.first];
    }
  }
  if (cfg.seasonal_fit) {
    for (int i = 0; i < 4; ++i) {
      std::string name = season_name(static_cast<season>(i));
      if (!emitted_per_season.count(name))
        plan.warnings.push_back("season " + name + ": no eligible slices");
    }
  } else if (plan.slices.empty()) {
    plan.warnings.push_back("no eligible slices");
  }
  return plan;
}

// Seed for one (engine, slice) cell, independent of execution order.
inline std::uint64_t cell_seed(std::uint64_t root, const std::string& engine,
                               const std::string& season, int lead, int fold) {
  std::uint64_t h = fnv1a(engine);
  h = fnv1a(season, h);
  h = fnv1a_u64(static_cast<std::uint64_t>(lead), h);
  h = fnv1a_u64(static_cast<std::uint64_t>(fold), h);
  return fnv1a_u64(root, h);
}

inline int engine_rank(const std::string& e) {
  const auto names = engine_names();
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == e) return static_cast<int>(i);
  return static_cast<int>(names.size());
}

namespace detail {

template <typename Fn>
void run_cells(size_t count, int jobs, Fn&& work) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  int nt = std::min<int>(jobs, static_cast<int>(count));
  pool.reserve(static_cast<size_t>(nt));
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
    });
  for (auto& th : pool) th.join();
}

inline std::mutex& progress_mutex() {
  static std::mutex m;
  return m;
}

inline void progress(const char* verb, const std::string& engine, const fit_slice& s,
                     const std::string& status, double seconds) {
  std::lock_guard<std::mutex> lk(progress_mutex());
  std::fprintf(stderr, "%s %-6s %-6s L%-2d f%d %s (%.1fs)\n", verb, engine.c_str(),
               s.season.c_str(), s.lead, s.fold, status.c_str(), seconds);
}

}  // namespace detail

struct fit_summary {
  size_t cells = 0;
  size_t failed = 0;
};

// Fits every requested engine on every slice, writing one model file per
// cell plus aggregated predictor-importance tables. Failures are recorded,
// not fatal.
inline fit_summary fit_all(const dataset& data, const loaded_config& lc,
                           const experiment_plan& plan,
                           const std::vector<std::string>& engines, int jobs,
                           const std::string& out_dir) {
  const run_config& cfg = lc.cfg;
  const auto levels = cfg.levels();
  const auto names = predictor_registry();

  struct cell_out {
    bool ok = false;
    std::string error;
    bool stepwise = false;
    std::map<std::string, double> importance;
  };
  const size_t n_cells = engines.size() * plan.slices.size();
  std::vector<cell_out> results(n_cells);

  detail::run_cells(n_cells, jobs, [&](size_t ci) {
    const std::string& ename = engines[ci / plan.slices.size()];
    const fit_slice& s = plan.slices[ci % plan.slices.size()];
    cell_out& out = results[ci];
    auto t_start = std::chrono::steady_clock::now();
    try {
      if (detail::slice_matrix_hash(s) != s.matrix_hash)
        throw internal_error("predictor matrix changed between slicing and fit");
      auto eng = make_engine(ename, cfg.hyper);
      std::uint64_t seed = cell_seed(cfg.seed, ename, s.season, s.lead, s.fold);
      eng->fit(s.x_train, s.y_train, names, levels, seed);
      model_key key{ename, s.season, s.lead, s.fold};
      model_stamp stamp{lc.hash, data.data_hash, registry_hash(), seed,
                        s.matrix_hash, eng->version()};
      write_json_file(model_path(out_dir, key),
                      wrap_model(key, stamp, lc.json.at("hyper"), eng->save()));
      out.ok = true;
      out.stepwise = eng->is_stepwise_family();
      out.importance = eng->importance();
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    detail::progress("fit", ename, s, out.ok ? "ok" : "FAILED", secs);
  });

  std::vector<note_row> errors;
  std::map<std::string, std::map<std::string, double>> step_imp, tree_imp;
  for (size_t ci = 0; ci < n_cells; ++ci) {
    const std::string& ename = engines[ci / plan.slices.size()];
    const fit_slice& s = plan.slices[ci % plan.slices.size()];
    const cell_out& out = results[ci];
    if (!out.ok) {
      errors.push_back({ename, s.season, std::to_string(s.lead), std::to_string(s.fold),
                        out.error});
      continue;
    }
    auto& dst = (out.stepwise ? step_imp : tree_imp)[ename];
    for (const auto& [pred, v] : out.importance) dst[pred] += v;
  }
  // tree improvement sums live on engine-specific scales; normalize each
  // engine to total 1 so the family table is comparable across methods
  for (auto& [ename, imp] : tree_imp) {
    double total = 0.0;
    for (const auto& [pred, v] : imp) total += v;
    if (total > 0.0)
      for (auto& [pred, v] : imp) v /= total;
  }

  write_notes(out_dir + "/models/fit_errors.csv", errors);

  std::vector<std::string> step_engines, tree_engines;
  std::map<std::string, std::string> versions;
  for (const auto& e : engines) {
    auto eng = make_engine(e, cfg.hyper);
    versions[e] = eng->version();
    (eng->is_stepwise_family() ? step_engines : tree_engines).push_back(e);
  }
  write_importance(out_dir + "/reports/importance_stepwise.csv", step_engines, step_imp);
  write_importance(out_dir + "/reports/importance_trees.csv", tree_engines, tree_imp);
  write_manifest(out_dir, lc, data.data_hash, versions);
  return {n_cells, errors.size()};
}

// Loads each cell's model file and produces the 49-quantile forecasts for
// that slice's test cases. Missing model files (failed fits) become gaps;
// stamp mismatches are refusals.
inline std::vector<forecast_row> predict_all(const dataset& data, const loaded_config& lc,
                                             const experiment_plan& plan,
                                             const std::vector<std::string>& engines,
                                             int jobs, const std::string& out_dir,
                                             std::vector<note_row>& notes) {
  const run_config& cfg = lc.cfg;
  const auto levels = cfg.levels();
  const auto names = predictor_registry();

  struct cell_out {
    std::vector<forecast_row> rows;
    std::string error;
    bool missing = false;
    std::string refusal;  // stamp mismatch, aborts the whole command
  };
  const size_t n_cells = engines.size() * plan.slices.size();
  std::vector<cell_out> results(n_cells);

  detail::run_cells(n_cells, jobs, [&](size_t ci) {
    const std::string& ename = engines[ci / plan.slices.size()];
    const fit_slice& s = plan.slices[ci % plan.slices.size()];
    cell_out& out = results[ci];
    auto t_start = std::chrono::steady_clock::now();
    std::string status = "ok";
    try {
      model_key key{ename, s.season, s.lead, s.fold};
      std::string path = model_path(out_dir, key);
      if (!std::filesystem::exists(path)) {
        out.missing = true;
        out.error = "model file missing: " + path;
        status = "missing";
      } else {
        nlohmann::json model = read_json_file(path);
        auto eng = make_engine(ename, cfg.hyper);
        try {
          check_model_stamp(model, path, lc.hash, data.data_hash, eng->version());
        } catch (const data_error& e) {
          out.refusal = e.what();
          throw;
        }
        std::uint64_t want_matrix = 0;
        {
          std::string hx = model.at("matrix_hash").get<std::string>();
          want_matrix = std::stoull(hx, nullptr, 16);
        }
        if (want_matrix != s.matrix_hash) {
          out.refusal = path + ": matrix_hash mismatch (model " + hex64(want_matrix) +
                        ", current " + hex64(s.matrix_hash) + ")";
          throw data_error(out.refusal);
        }
        eng->load(model.at("payload"));
        Eigen::MatrixXd q = eng->predict(s.x_test);
        if (q.rows() != static_cast<Eigen::Index>(s.test.size()) ||
            q.cols() != static_cast<Eigen::Index>(levels.size()))
          throw internal_error("prediction shape mismatch");
        out.rows.reserve(s.test.size());
        for (size_t r = 0; r < s.test.size(); ++r) {
          const forecast_case& fc = data.cases[static_cast<size_t>(s.test[r])];
          forecast_row row;
          row.engine = ename;
          row.season = s.season;
          row.lead = s.lead;
          row.fold = s.fold;
          row.station = fc.station_id;
          row.valid = fc.valid_time;
          row.obs = fc.observation;
          row.clearsky = fc.clearsky_wm2;
          row.q.resize(levels.size());
          for (size_t c = 0; c < levels.size(); ++c)
            row.q[c] = q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
          out.rows.push_back(std::move(row));
        }
      }
    } catch (const std::exception& e) {
      if (out.error.empty()) out.error = e.what();
      if (status == "ok") status = "FAILED";
      out.rows.clear();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    detail::progress("predict", ename, s, status, secs);
  });

  for (const auto& out : results)
    if (!out.refusal.empty()) throw data_error(out.refusal);

  std::vector<forecast_row> rows;
  for (size_t ci = 0; ci < n_cells; ++ci) {
    const std::string& ename = engines[ci / plan.slices.size()];
    const fit_slice& s = plan.slices[ci % plan.slices.size()];
    cell_out& out = results[ci];
    if (!out.error.empty())
      notes.push_back({ename, s.season, std::to_string(s.lead), std::to_string(s.fold),
                       out.error});
    for (auto& r : out.rows) rows.push_back(std::move(r));
  }
  return rows;
}

struct verify_output {
  std::vector<metric_row> metrics;
  std::vector<reliability_row> reliability_rows;
  std::vector<pev_row> pev_rows;
};

namespace detail {

struct group_key {
  int erank;
  std::string engine;
  int season_order;  // winter..autumn, then anything else
  std::string season;
  int lead;
  int fold;
  bool operator<(const group_key& o) const {
    if (erank != o.erank) return erank < o.erank;
    if (engine != o.engine) return engine < o.engine;
    if (season_order != o.season_order) return season_order < o.season_order;
    if (season != o.season) return season < o.season;
    if (lead != o.lead) return lead < o.lead;
    return fold < o.fold;
  }
};

inline int season_order_of(const std::string& s) {
  season sv;
  if (season_from_name(s, sv)) return static_cast<int>(sv);
  return 4;
}

// weighted mean that skips NA values; NA when nothing contributes
struct na_mean {
  double num = 0.0, den = 0.0;
  void add(double v, double w) {
    if (!is_na(v) && w > 0.0) {
      num += v * w;
      den += w;
    }
  }
  double value() const { return den > 0.0 ? num / den : na_value(); }
};

}  // namespace detail

// Scores forecasts per (engine, season, lead, fold) and pools reliability
// and value diagnostics across folds.
inline verify_output verify_forecasts(const forecast_file& f, const run_config& cfg) {
  verify_output out;
  const auto thresholds = cfg.thresholds;
  const auto triggers = default_pev_triggers(f.levels);
  const auto cl_grid = default_cost_loss_grid();
  const int median_idx = [&] {
    int best = 0;
    for (size_t i = 1; i < f.levels.size(); ++i)
      if (std::fabs(f.levels[i] - 0.5) < std::fabs(f.levels[static_cast<size_t>(best)] - 0.5))
        best = static_cast<int>(i);
    return best;
  }();

  std::map<detail::group_key, std::vector<const forecast_row*>> groups;
  for (const auto& r : f.rows) {
    if (std::isnan(r.obs)) continue;  // nothing to verify against
    detail::group_key k{engine_rank(r.engine), r.engine,
                        detail::season_order_of(r.season), r.season, r.lead, r.fold};
    groups[k].push_back(&r);
  }

  for (const auto& [key, rows] : groups) {
    const size_t n = rows.size();
    std::vector<double> obs(n), med(n);
    for (size_t i = 0; i < n; ++i) {
      obs[i] = rows[i]->obs;
      med[i] = rows[i]->q[static_cast<size_t>(median_idx)];
    }
    auto push = [&](const std::string& metric, double v) {
      out.metrics.push_back({key.engine, key.season, key.lead, key.fold, metric, v});
    };

    rmse_skill_result rs = rmse_skill(med, obs);
    push("rmse", rs.rmse_fc);
    push("rmse_clim", rs.rmse_clim);
    push("rmse_ss", rs.skill);

    std::vector<double> clim(f.levels.size());
    {
      std::vector<double> sorted_obs = obs;
      std::sort(sorted_obs.begin(), sorted_obs.end());
      for (size_t j = 0; j < f.levels.size(); ++j)
        clim[j] = empirical_quantile(sorted_obs, f.levels[j]);
    }
    double crps_f = 0.0, crps_c = 0.0;
    for (size_t i = 0; i < n; ++i) {
      crps_f += crps_ensemble(rows[i]->q, obs[i]);
      crps_c += crps_ensemble(clim, obs[i]);
    }
    crps_f /= static_cast<double>(n);
    crps_c /= static_cast<double>(n);
    push("crps", crps_f);
    push("crps_clim", crps_c);
    push("crpss", crps_c > 0.0 ? 1.0 - crps_f / crps_c : na_value());

    for (double thr : thresholds) {
      std::vector<double> prob(n);
      std::vector<int> event(n);
      for (size_t i = 0; i < n; ++i) {
        prob[i] = event_probability(rows[i]->q, thr);
        event[i] = obs[i] <= thr ? 1 : 0;
      }
      brier_result br = brier(prob, event);
      std::string suffix = "_" + fmt_double(thr);
      push("bs" + suffix, br.bs);
      push("bs_clim" + suffix, br.bs_clim);
      push("bss" + suffix, br.bss);
    }
    push("n", static_cast<double>(n));
  }

  // pooled (over folds) probability/event samples for reliability and value
  struct pool {
    std::vector<double> prob;
    std::vector<int> event;
  };
  std::map<std::tuple<int, std::string, int, std::string, int, int>, pool> rel2;
  std::map<std::tuple<int, std::string, int, std::string, int>, pool> pev2;
  std::map<std::tuple<int, std::string, int>, pool> all2;
  for (const auto& [key, rows] : groups) {
    for (size_t ti = 0; ti < thresholds.size(); ++ti) {
      double thr = thresholds[ti];
      for (const auto* r : rows) {
        double p = event_probability(r->q, thr);
        int ev = r->obs <= thr ? 1 : 0;
        auto& a = rel2[{key.erank, key.engine, key.season_order, key.season, key.lead,
                        static_cast<int>(ti)}];
        a.prob.push_back(p);
        a.event.push_back(ev);
        auto& b = pev2[{key.erank, key.engine, key.season_order, key.season,
                        static_cast<int>(ti)}];
        b.prob.push_back(p);
        b.event.push_back(ev);
        auto& c = all2[{key.erank, key.engine, static_cast<int>(ti)}];
        c.prob.push_back(p);
        c.event.push_back(ev);
      }
    }
  }

  auto emit_reliability = [&](const std::string& engine, const std::string& season,
                              const std::string& lead, double thr, const pool& p) {
    auto bins = reliability(p.prob, p.event, 10);
    for (size_t b = 0; b < bins.size(); ++b)
      out.reliability_rows.push_back({engine, season, lead, thr, static_cast<int>(b),
                                      bins[b].prob_mean, bins[b].obs_freq,
                                      bins[b].count});
  };
  auto emit_pev = [&](const std::string& engine, const std::string& season,
                      const std::string& lead, double thr, const pool& p) {
    auto curve = pev_curve(p.prob, p.event, triggers, cl_grid);
    for (size_t i = 0; i < cl_grid.size(); ++i)
      out.pev_rows.push_back({engine, season, lead, thr, cl_grid[i], curve[i]});
  };

  for (const auto& [k, p] : rel2)
    emit_reliability(std::get<1>(k), std::get<3>(k), std::to_string(std::get<4>(k)),
                     thresholds[static_cast<size_t>(std::get<5>(k))], p);
  for (const auto& [k, p] : all2)
    emit_reliability(std::get<1>(k), "all", "all",
                     thresholds[static_cast<size_t>(std::get<2>(k))], p);
  for (const auto& [k, p] : pev2)
    emit_pev(std::get<1>(k), std::get<3>(k), "all",
             thresholds[static_cast<size_t>(std::get<4>(k))], p);
  for (const auto& [k, p] : all2)
    emit_pev(std::get<1>(k), "all", "all",
             thresholds[static_cast<size_t>(std::get<2>(k))], p);
  return out;
}

// Figure-ready comparison tables distilled from the long-format reports.
inline void build_report_tables(const std::string& run_dir) {
  const std::string reports = run_dir + "/reports";
  const std::string tables = run_dir + "/tables";
  ensure_dir(tables);

  auto metrics = read_metrics(reports + "/metrics.csv");
  std::vector<std::string> engines;
  for (const auto& m : metrics)
    if (std::find(engines.begin(), engines.end(), m.engine) == engines.end())
      engines.push_back(m.engine);
  std::sort(engines.begin(), engines.end(), [](const std::string& a, const std::string& b) {
    int ra = engine_rank(a), rb = engine_rank(b);
    return ra != rb ? ra < rb : a < b;
  });

  // weights: verified case counts per (engine, season, lead, fold)
  std::map<std::tuple<std::string, std::string, int, int>, double> weight;
  for (const auto& m : metrics)
    if (m.metric == "n") weight[{m.engine, m.season, m.lead, m.fold}] = m.value;
  auto w_of = [&](const metric_row& m) {
    auto it = weight.find({m.engine, m.season, m.lead, m.fold});
    return it == weight.end() ? 0.0 : it->second;
  };

  {  // skill vs lead time, per season plus an all-season pool
    std::map<std::tuple<int, std::string, int, std::string, std::string>, detail::na_mean>
        agg;  // (season_order, season, lead, metric, engine)
    std::set<std::pair<int, std::string>> seasons;
    std::set<int> leads;
    for (const auto& m : metrics) {
      if (m.metric != "rmse_ss" && m.metric != "crpss") continue;
      double w = w_of(m);
      agg[{detail::season_order_of(m.season), m.season, m.lead, m.metric, m.engine}].add(
          m.value, w);
      agg[{9, "all", m.lead, m.metric, m.engine}].add(m.value, w);
      seasons.insert({detail::season_order_of(m.season), m.season});
      leads.insert(m.lead);
    }
    seasons.insert({9, "all"});
    csv_writer w(tables + "/skill_vs_leadtime.csv");
    std::vector<std::string> head = {"season", "lead_time", "metric"};
    for (const auto& e : engines) head.push_back(e);
    w.row(head);
    for (const auto& [so, sname] : seasons)
      for (int lead : leads)
        for (const std::string metric : {"crpss", "rmse_ss"}) {
          std::vector<std::string> cells = {sname, std::to_string(lead), metric};
          bool any = false;
          for (const auto& e : engines) {
            auto it = agg.find({so, sname, lead, metric, e});
            double v = it == agg.end() ? na_value() : it->second.value();
            if (!is_na(v)) any = true;
            cells.push_back(metric_str(v));
          }
          if (any) w.row(cells);
        }
    w.close();
  }

  {  // BSS vs threshold, pooled over lead times and folds
    std::map<std::tuple<int, std::string, std::string, std::string>, detail::na_mean> agg;
    std::set<std::pair<int, std::string>> seasons;
    std::set<std::string> thrs;
    for (const auto& m : metrics) {
      if (m.metric.rfind("bss_", 0) != 0) continue;
      std::string thr = m.metric.substr(4);
      double w = w_of(m);
      agg[{detail::season_order_of(m.season), m.season, thr, m.engine}].add(m.value, w);
      agg[{9, "all", thr, m.engine}].add(m.value, w);
      seasons.insert({detail::season_order_of(m.season), m.season});
      thrs.insert(thr);
    }
    seasons.insert({9, "all"});
    csv_writer w(tables + "/bss_vs_threshold.csv");
    std::vector<std::string> head = {"season", "threshold"};
    for (const auto& e : engines) head.push_back(e);
    w.row(head);
    for (const auto& [so, sname] : seasons)
      for (const auto& thr : thrs) {
        std::vector<std::string> cells = {sname, thr};
        bool any = false;
        for (const auto& e : engines) {
          auto it = agg.find({so, sname, thr, e});
          double v = it == agg.end() ? na_value() : it->second.value();
          if (!is_na(v)) any = true;
          cells.push_back(metric_str(v));
        }
        if (any) w.row(cells);
      }
    w.close();
  }

  {  // pooled reliability rows, one file ready for diagonal plots
    csv_table t = read_csv(reports + "/reliability.csv");
    int c_eng = t.col_required("engine"), c_sea = t.col_required("season");
    int c_lead = t.col_required("lead_time"), c_thr = t.col_required("threshold");
    int c_bin = t.col_required("bin"), c_pm = t.col_required("prob_mean");
    int c_of = t.col_required("obs_freq"), c_n = t.col_required("count");
    csv_writer w(tables + "/reliability.csv");
    w.row({"engine", "threshold", "bin", "prob_mean", "obs_freq", "count"});
    for (size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r][static_cast<size_t>(c_sea)] != "all" ||
          t.rows[r][static_cast<size_t>(c_lead)] != "all")
        continue;
      w.row({t.rows[r][static_cast<size_t>(c_eng)], t.rows[r][static_cast<size_t>(c_thr)],
             t.rows[r][static_cast<size_t>(c_bin)], t.rows[r][static_cast<size_t>(c_pm)],
             t.rows[r][static_cast<size_t>(c_of)], t.rows[r][static_cast<size_t>(c_n)]});
    }
    w.close();
  }

  {  // PEV vs cost-loss ratio, engines as columns
    csv_table t = read_csv(reports + "/pev.csv");
    int c_eng = t.col_required("engine"), c_sea = t.col_required("season");
    int c_lead = t.col_required("lead_time"), c_thr = t.col_required("threshold");
    int c_cl = t.col_required("cost_loss"), c_v = t.col_required("pev");
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> rows;
    for (size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r][static_cast<size_t>(c_sea)] != "all" ||
          t.rows[r][static_cast<size_t>(c_lead)] != "all")
        continue;
      rows[{t.rows[r][static_cast<size_t>(c_thr)], t.rows[r][static_cast<size_t>(c_cl)]}]
          [t.rows[r][static_cast<size_t>(c_eng)]] = t.rows[r][static_cast<size_t>(c_v)];
    }
    csv_writer w(tables + "/pev_vs_costloss.csv");
    std::vector<std::string> head = {"threshold", "cost_loss"};
    for (const auto& e : engines) head.push_back(e);
    w.row(head);
    // numeric ordering of the cost-loss column within each threshold
    std::map<std::pair<std::string, double>, const std::map<std::string, std::string>*> ordered;
    for (const auto& [k, by_engine] : rows) {
      double cl = 0.0;
      parse_double(k.second, cl);
      ordered[{k.first, cl}] = &by_engine;
    }
    for (const auto& [k, by_engine] : ordered) {
      std::vector<std::string> cells = {k.first, fmt_double(k.second)};
      for (const auto& e : engines) {
        auto it = by_engine->find(e);
        cells.push_back(it == by_engine->end() ? "NA" : it->second);
      }
      w.row(cells);
    }
    w.close();
  }

  for (const char* f : {"importance_stepwise.csv", "importance_trees.csv"}) {
    std::string src = reports + "/" + f;
    if (std::filesystem::exists(src))
      std::filesystem::copy_file(src, tables + "/" + f,
                                 std::filesystem::copy_options::overwrite_existing);
  }
}

}  // namespace solarcast

#endif  // SOLARCAST_HARNESS_HPP_
