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
#ifndef SOLARCAST_VERIFY_HPP_
#define SOLARCAST_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "solarcast/common.hpp"
#include "solarcast/math/stats.hpp"

namespace solarcast {

// Undefined skill is an explicit non-value, never 0 or an infinity.
inline double na_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_na(double v) { return std::isnan(v); }
inline std::string metric_str(double v) { return is_na(v) ? "NA" : fmt_double(v); }

inline double rmse(const std::vector<double>& forecast,
                   const std::vector<double>& obs) {
  if (forecast.size() != obs.size() || obs.empty())
    throw usage_error("rmse needs equal-length nonempty series");
  double acc = 0.0;
  for (size_t i = 0; i < obs.size(); ++i) {
    double d = forecast[i] - obs[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(obs.size()));
}

struct rmse_skill_result {
  double rmse_fc = 0.0;
  double rmse_clim = 0.0;
  double skill = 0.0;  // 1 - rmse/rmse_clim, clim = mean of the sample obs
};

inline rmse_skill_result rmse_skill(const std::vector<double>& median_fc,
                                    const std::vector<double>& obs) {
  rmse_skill_result r;
  r.rmse_fc = rmse(median_fc, obs);
  double m = mean(obs);
  std::vector<double> clim(obs.size(), m);
  r.rmse_clim = rmse(clim, obs);
  r.skill = r.rmse_clim > 0.0 ? 1.0 - r.rmse_fc / r.rmse_clim : na_value();
  return r;
}

// Ensemble CRPS over the Q quantile members:
//   (1/Q) sum |f_k - y|  -  (1/2Q^2) sum_kl |f_k - f_l|,
// the cross term evaluated in O(Q log Q) from the sorted members.
inline double crps_ensemble(std::vector<double> members, double y) {
  const size_t q = members.size();
  if (q == 0) throw usage_error("crps needs at least one member");
  std::sort(members.begin(), members.end());
  double term1 = 0.0, term2 = 0.0;
  for (size_t i = 0; i < q; ++i) {
    term1 += std::abs(members[i] - y);
    term2 += members[i] * (2.0 * static_cast<double>(i) -
                           static_cast<double>(q) + 1.0);
  }
  double qd = static_cast<double>(q);
  return term1 / qd - term2 / (qd * qd);
}

struct crps_skill_result {
  double crps = 0.0;
  double crps_clim = 0.0;
  double skill = 0.0;
};

// Climatology reference: one fixed quantile vector used for every case.
inline crps_skill_result crps_skill(const std::vector<std::vector<double>>& forecasts,
                                    const std::vector<double>& obs,
                                    const std::vector<double>& clim_quantiles) {
  if (forecasts.size() != obs.size() || obs.empty())
    throw usage_error("crps_skill needs equal-length nonempty series");
  crps_skill_result r;
  for (size_t i = 0; i < obs.size(); ++i) {
    r.crps += crps_ensemble(forecasts[i], obs[i]);
    r.crps_clim += crps_ensemble(clim_quantiles, obs[i]);
  }
  r.crps /= static_cast<double>(obs.size());
  r.crps_clim /= static_cast<double>(obs.size());
  r.skill = r.crps_clim > 0.0 ? 1.0 - r.crps / r.crps_clim : na_value();
  return r;
}

// Forecast probability of the event "value not exceeding threshold".
inline double event_probability(const std::vector<double>& members, double threshold) {
  if (members.empty()) throw usage_error("event probability needs members");
  size_t hits = 0;
  for (double m : members)
    if (m <= threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(members.size());
}

struct brier_result {
  double bs = 0.0;
  double bs_clim = 0.0;
  double bss = 0.0;
  double orf = 0.0;  // observed relative frequency of the event
};

inline brier_result brier(const std::vector<double>& prob,
                          const std::vector<int>& event) {
  if (prob.size() != event.size() || prob.empty())
    throw usage_error("brier needs equal-length nonempty series");
  brier_result r;
  const double n = static_cast<double>(prob.size());
  for (size_t i = 0; i < prob.size(); ++i) {
    double d = prob[i] - event[i];
    r.bs += d * d;
    r.orf += event[i];
  }
  r.bs /= n;
  r.orf /= n;
  for (size_t i = 0; i < prob.size(); ++i) {
    double d = r.orf - event[i];
    r.bs_clim += d * d;
  }
  r.bs_clim /= n;
  r.bss = r.bs_clim > 0.0 ? 1.0 - r.bs / r.bs_clim : na_value();
  return r;
}

struct reliability_bin {
  double prob_mean = 0.0;  // mean forecast probability in the bin
  double obs_freq = 0.0;   // conditional observed relative frequency
  long count = 0;
  bool empty = true;
};

// Ten equal-width right-closed bins on [0,1]; an exact-zero probability
// falls in the first bin.
inline int reliability_bin_index(double p, int bins = 10) {
  if (p < 0.0 || p > 1.0) throw usage_error("probability outside [0,1]");
  if (p == 0.0) return 0;
  int b = static_cast<int>(std::ceil(p * bins)) - 1;
  return std::min(std::max(b, 0), bins - 1);
}

inline std::vector<reliability_bin> reliability(const std::vector<double>& prob,
                                                const std::vector<int>& event,
                                                int bins = 10) {
  if (prob.size() != event.size())
    throw usage_error("reliability needs equal-length series");
  if (bins < 2) throw usage_error("reliability needs at least 2 bins");
  std::vector<reliability_bin> out(bins);
  for (size_t i = 0; i < prob.size(); ++i) {
    reliability_bin& b = out[reliability_bin_index(prob[i], bins)];
    b.prob_mean += prob[i];
    b.obs_freq += event[i];
    b.count += 1;
  }
  for (auto& b : out) {
    if (b.count > 0) {
      b.prob_mean /= static_cast<double>(b.count);
      b.obs_freq /= static_cast<double>(b.count);
      b.empty = false;
    }
  }
  return out;
}

struct brier_decomposition_result {
  double reliability = 0.0;
  double resolution = 0.0;
  double uncertainty = 0.0;
};

// Classic three-term split; matches the direct score exactly when every
// forecast probability in a bin is constant (bin mean), otherwise differs by
// the within-bin forecast variance.
inline brier_decomposition_result brier_decomposition(
    const std::vector<reliability_bin>& diagram, long n, double orf) {
  brier_decomposition_result d;
  for (const auto& b : diagram) {
    if (b.empty) continue;
    double w = static_cast<double>(b.count) / static_cast<double>(n);
    d.reliability += w * (b.prob_mean - b.obs_freq) * (b.prob_mean - b.obs_freq);
    d.resolution += w * (b.obs_freq - orf) * (b.obs_freq - orf);
  }
  d.uncertainty = orf * (1.0 - orf);
  return d;
}

struct contingency {
  double hit = 0.0;   // event forecast and observed, fraction of n
  double fa = 0.0;    // event forecast, not observed
  double miss = 0.0;  // event observed, not forecast
  double orf = 0.0;   // hit + miss
};

// Action rule: act when forecast probability >= trigger.
inline contingency count_contingency(const std::vector<double>& prob,
                                     const std::vector<int>& event,
                                     double trigger) {
  if (prob.size() != event.size() || prob.empty())
    throw usage_error("contingency needs equal-length nonempty series");
  contingency c;
  for (size_t i = 0; i < prob.size(); ++i) {
    bool act = prob[i] >= trigger;
    if (act && event[i]) c.hit += 1.0;
    if (act && !event[i]) c.fa += 1.0;
    if (!act && event[i]) c.miss += 1.0;
  }
  double n = static_cast<double>(prob.size());
  c.hit /= n;
  c.fa /= n;
  c.miss /= n;
  c.orf = c.hit + c.miss;
  return c;
}

// Economic value for one cost-loss ratio and one contingency table. Branches
// split at the cost-loss ratio against the observed relative frequency; the
// equality case uses the second branch (both agree in the limit).
inline double pev_value(double cost_loss, const contingency& c) {
  if (cost_loss <= 0.0 || cost_loss >= 1.0)
    throw usage_error("cost-loss ratio outside (0,1)");
  if (c.orf <= 0.0 || c.orf >= 1.0) return na_value();
  if (cost_loss < c.orf)
    return (cost_loss * (c.hit + c.fa - 1.0) + c.miss) /
           (cost_loss * (c.orf - 1.0));
  return (cost_loss * (c.hit + c.fa) + c.miss - c.orf) /
         ((cost_loss - 1.0) * c.orf);
}

inline std::vector<double> default_cost_loss_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 99; ++k) g.push_back(k / 100.0);
  return g;
}

// "Potential" value: the best achievable over probability triggers, by
// default the forecast levels plus the always-act and certain-only triggers.
inline std::vector<double> pev_curve(const std::vector<double>& prob,
                                     const std::vector<int>& event,
                                     const std::vector<double>& triggers,
                                     const std::vector<double>& cost_loss_grid) {
  std::vector<contingency> tables;
  tables.reserve(triggers.size());
  for (double t : triggers) tables.push_back(count_contingency(prob, event, t));
  std::vector<double> out;
  out.reserve(cost_loss_grid.size());
  for (double cl : cost_loss_grid) {
    double best = na_value();
    for (const auto& c : tables) {
      double v = pev_value(cl, c);
      if (is_na(v)) continue;
      if (is_na(best) || v > best) best = v;
    }
    out.push_back(best);
  }
  return out;
}

inline std::vector<double> default_pev_triggers(const std::vector<double>& levels) {
  std::vector<double> t;
  t.push_back(0.0);
  for (double q : levels) t.push_back(q);
  t.push_back(1.0);
  return t;
}

}  // namespace solarcast

#endif  // SOLARCAST_VERIFY_HPP_
