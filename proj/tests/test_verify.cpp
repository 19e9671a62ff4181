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

#include <algorithm>
#include <cmath>
#include <vector>

#include "solarcast/common.hpp"
#include "solarcast/math/rng.hpp"
#include "solarcast/math/stats.hpp"
#include "solarcast/verify.hpp"

using namespace solarcast;
using Catch::Matchers::WithinAbs;

namespace {

// Direct quadratic-time evaluation of the ensemble score, used as an
// independent oracle for the sorted linear-time form.
double crps_brute(const std::vector<double>& members, double y) {
  double term1 = 0.0, cross = 0.0;
  for (double a : members) {
    term1 += std::abs(a - y);
    for (double b : members) cross += std::abs(a - b);
  }
  double q = static_cast<double>(members.size());
  return term1 / q - cross / (2.0 * q * q);
}

// Economic value written as expense ratios, an independent rearrangement:
// (clim - forecast) / (clim - perfect) with clim = min(cl, orf).
double pev_expense_form(double cl, const contingency& c) {
  double e_clim = std::min(cl, c.orf);
  double e_fc = (c.hit + c.fa) * cl + c.miss;
  double e_perf = c.orf * cl;
  return (e_clim - e_fc) / (e_clim - e_perf);
}

}  // namespace

TEST_CASE("metric NA sentinel and formatting") {
  REQUIRE(is_na(na_value()));
  REQUIRE_FALSE(is_na(0.0));
  REQUIRE(metric_str(na_value()) == "NA");
  REQUIRE(metric_str(0.25) == "0.25");
}

TEST_CASE("rmse hand values and input checks") {
  REQUIRE(rmse({1.0, 2.0}, {0.0, 0.0}) == std::sqrt(2.5));
  REQUIRE(rmse({3.0, 3.0}, {3.0, 3.0}) == 0.0);
  REQUIRE_THROWS_AS(rmse({1.0}, {1.0, 2.0}), usage_error);
  REQUIRE_THROWS_AS(rmse({}, {}), usage_error);
}

TEST_CASE("rmse skill against the sample-mean climatology") {
  std::vector<double> obs{0.3, 0.8, 0.5, 1.1};

  auto perfect = rmse_skill(obs, obs);
  REQUIRE(perfect.rmse_fc == 0.0);
  REQUIRE(perfect.skill == 1.0);

  double m = mean(obs);
  auto clim = rmse_skill(std::vector<double>(obs.size(), m), obs);
  REQUIRE(clim.skill == 0.0);

  // obs (0,1) with both medians 0.5: forecast error equals climatology error
  auto tied = rmse_skill({0.5, 0.5}, {0.0, 1.0});
  REQUIRE(tied.rmse_fc == tied.rmse_clim);
  REQUIRE(tied.skill == 0.0);

  // constant observations make the reference degenerate
  auto flat = rmse_skill({0.7, 0.7}, {0.7, 0.7});
  REQUIRE(is_na(flat.skill));
}

TEST_CASE("ensemble crps hand values") {
  REQUIRE(crps_ensemble({0.0, 1.0}, 0.5) == 0.25);
  // one member degenerates to absolute error
  rng g(substream(11, "crps-degenerate"));
  for (int i = 0; i < 50; ++i) {
    double f = g.uniform(-3.0, 3.0), y = g.uniform(-3.0, 3.0);
    REQUIRE(crps_ensemble({f}, y) == std::abs(f - y));
  }
  REQUIRE_THAT(crps_ensemble({0.4, 0.4, 0.4}, 0.4), WithinAbs(0.0, 1e-15));
  REQUIRE_THROWS_AS(crps_ensemble({}, 0.0), usage_error);
}

TEST_CASE("ensemble crps matches quadratic-time evaluation") {
  rng g(substream(11, "crps-brute"));
  for (int rep = 0; rep < 1000; ++rep) {
    size_t q = 1 + g.below(5);
    std::vector<double> members(q);
    for (auto& m : members) m = g.uniform(-2.0, 2.0);
    double y = g.uniform(-2.0, 2.0);
    double fast = crps_ensemble(members, y);
    double brute = crps_brute(members, y);
    REQUIRE(std::abs(fast - brute) <=
            1e-12 * std::max(1.0, std::abs(brute)));
    REQUIRE(fast >= -1e-12);
  }
}

TEST_CASE("constant quantile vector scoring is minimized at sample quantiles") {
  rng g(substream(11, "crps-min"));
  std::vector<double> sample(15);
  for (auto& y : sample) y = g.uniform(0.0, 2.0);

  auto mean_score = [&](const std::vector<double>& v) {
    double acc = 0.0;
    for (double y : sample) acc += crps_ensemble(v, y);
    return acc / static_cast<double>(sample.size());
  };

  // three members: the optimum pins each sorted member to the empirical
  // quantile at the member's midpoint level (2k-1)/(2Q)
  std::vector<double> best{empirical_quantile(sample, 1.0 / 6.0),
                           empirical_quantile(sample, 3.0 / 6.0),
                           empirical_quantile(sample, 5.0 / 6.0)};
  double best_score = mean_score(best);

  // brute-force search over all sorted triples of sample values; the
  // piecewise-linear objective attains its minimum on such a triple
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  double grid_min = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < s.size(); ++a)
    for (size_t b = a; b < s.size(); ++b)
      for (size_t c = b; c < s.size(); ++c)
        grid_min = std::min(grid_min, mean_score({s[a], s[b], s[c]}));

  REQUIRE(best_score <= grid_min + 1e-12);
}

TEST_CASE("crps skill against a fixed climatological quantile vector") {
  std::vector<double> obs{0.2, 0.9, 0.4, 0.7, 0.55};
  std::vector<double> clim{0.3, 0.5, 0.8};

  // forecasting the climatology itself is zero skill by construction
  std::vector<std::vector<double>> self(obs.size(), clim);
  auto r0 = crps_skill(self, obs, clim);
  REQUIRE(r0.crps == r0.crps_clim);
  REQUIRE(r0.skill == 0.0);

  // collapsing every quantile onto the outcome is full skill
  std::vector<std::vector<double>> perfect;
  for (double y : obs) perfect.push_back({y, y, y});
  auto r1 = crps_skill(perfect, obs, clim);
  REQUIRE_THAT(r1.crps, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(r1.skill, WithinAbs(1.0, 1e-12));

  // constant observations equal to the climatology vector leave no spread
  auto flat = crps_skill({{0.5}, {0.5}}, {0.5, 0.5}, {0.5});
  REQUIRE(is_na(flat.skill));

  REQUIRE_THROWS_AS(crps_skill({}, {}, clim), usage_error);
}

TEST_CASE("event probability counts members not exceeding the threshold") {
  REQUIRE(event_probability({0.1, 0.2, 0.3, 0.4}, 0.25) == 0.5);
  REQUIRE(event_probability({1.0, 2.0, 3.0}, 2.0) == 2.0 / 3.0);
  REQUIRE(event_probability({0.5, 0.6}, 0.1) == 0.0);
  REQUIRE_THROWS_AS(event_probability({}, 0.5), usage_error);
}

TEST_CASE("brier score hand values and skill reference") {
  auto hand = brier({0.5, 0.5}, {1, 0});
  REQUIRE(hand.bs == 0.25);
  REQUIRE(hand.orf == 0.5);

  auto perfect = brier({1.0, 0.0, 1.0}, {1, 0, 1});
  REQUIRE(perfect.bs == 0.0);
  REQUIRE(perfect.bss == 1.0);

  // forecasting the base rate is exactly zero skill
  std::vector<int> ev{1, 0, 0, 1};
  auto base = brier(std::vector<double>(4, 0.5), ev);
  REQUIRE(base.bs == base.bs_clim);
  REQUIRE(base.bss == 0.0);

  auto mixed = brier({0.2, 0.7, 0.5}, {0, 1, 1});
  REQUIRE_THAT(mixed.bs, WithinAbs(0.38 / 3.0, 1e-15));

  // identical outcomes leave the reference score degenerate
  auto flat = brier({0.2, 0.3}, {0, 0});
  REQUIRE(is_na(flat.bss));

  REQUIRE_THROWS_AS(brier({0.5}, {1, 0}), usage_error);
}

TEST_CASE("reliability bin index is right-closed with zero in the first bin") {
  REQUIRE(reliability_bin_index(0.0) == 0);
  REQUIRE(reliability_bin_index(0.05) == 0);
  REQUIRE(reliability_bin_index(0.1) == 0);
  REQUIRE(reliability_bin_index(0.15) == 1);
  REQUIRE(reliability_bin_index(0.5) == 4);
  REQUIRE(reliability_bin_index(0.55) == 5);
  REQUIRE(reliability_bin_index(0.9) == 8);
  REQUIRE(reliability_bin_index(0.95) == 9);
  REQUIRE(reliability_bin_index(1.0) == 9);
  REQUIRE(reliability_bin_index(0.5, 2) == 0);
  REQUIRE(reliability_bin_index(0.51, 2) == 1);
  REQUIRE_THROWS_AS(reliability_bin_index(-0.1), usage_error);
  REQUIRE_THROWS_AS(reliability_bin_index(1.1), usage_error);
}

TEST_CASE("reliability diagram structure") {
  // a constant-zero forecast populates only the first bin, whose observed
  // frequency is the base rate
  std::vector<double> prob(10, 0.0);
  std::vector<int> ev{1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
  auto diagram = reliability(prob, ev);
  REQUIRE(diagram.size() == 10);
  REQUIRE_FALSE(diagram[0].empty);
  REQUIRE(diagram[0].count == 10);
  REQUIRE(diagram[0].prob_mean == 0.0);
  REQUIRE(diagram[0].obs_freq == 0.3);
  for (size_t b = 1; b < diagram.size(); ++b) REQUIRE(diagram[b].empty);

  REQUIRE_THROWS_AS(reliability({0.5}, {1}, 1), usage_error);
  REQUIRE_THROWS_AS(reliability({0.5}, {1, 0}), usage_error);
}

TEST_CASE("reliability diagram counts partition the sample") {
  rng g(substream(11, "reliability-partition"));
  std::vector<double> prob;
  std::vector<int> ev;
  for (int i = 0; i < 500; ++i) {
    prob.push_back(g.u01());
    ev.push_back(g.u01() < 0.4 ? 1 : 0);
  }
  auto diagram = reliability(prob, ev);
  long total = 0;
  for (int b = 0; b < 10; ++b) {
    const auto& bin = diagram[b];
    total += bin.count;
    if (bin.empty) continue;
    REQUIRE(bin.prob_mean >= b / 10.0 - 1e-12);
    REQUIRE(bin.prob_mean <= (b + 1) / 10.0 + 1e-12);
    REQUIRE(bin.obs_freq >= 0.0);
    REQUIRE(bin.obs_freq <= 1.0);
  }
  REQUIRE(total == 500);
}

TEST_CASE("calibrated probabilities land near the diagonal") {
  rng g(substream(11, "reliability-calibrated"));
  std::vector<double> prob;
  std::vector<int> ev;
  for (int i = 0; i < 20000; ++i) {
    double p = g.u01();
    prob.push_back(p);
    ev.push_back(g.u01() < p ? 1 : 0);
  }
  auto diagram = reliability(prob, ev);
  for (const auto& bin : diagram) {
    if (bin.count < 50) continue;
    double se = std::sqrt(bin.prob_mean * (1.0 - bin.prob_mean) /
                          static_cast<double>(bin.count));
    REQUIRE(std::abs(bin.obs_freq - bin.prob_mean) <= 3.0 * se);
  }
}

TEST_CASE("brier decomposition matches the direct score for binned forecasts") {
  // with one constant probability per bin, the three-term split is exact
  rng g(substream(11, "brier-decomposition"));
  std::vector<double> values{0.05, 0.25, 0.65, 0.95};
  std::vector<double> prob;
  std::vector<int> ev;
  for (int i = 0; i < 400; ++i) {
    double p = values[g.below(values.size())];
    prob.push_back(p);
    ev.push_back(g.u01() < p ? 1 : 0);
  }
  auto score = brier(prob, ev);
  auto diagram = reliability(prob, ev);
  auto d = brier_decomposition(diagram, static_cast<long>(prob.size()),
                               score.orf);
  REQUIRE(d.reliability >= 0.0);
  REQUIRE(d.resolution >= 0.0);
  REQUIRE_THAT(d.reliability - d.resolution + d.uncertainty,
               WithinAbs(score.bs, 1e-12));
}

TEST_CASE("contingency table hand values") {
  std::vector<double> prob{0.9, 0.2, 0.6, 0.1};
  std::vector<int> ev{1, 0, 1, 1};
  auto c = count_contingency(prob, ev, 0.5);
  REQUIRE(c.hit == 0.5);
  REQUIRE(c.fa == 0.0);
  REQUIRE(c.miss == 0.25);
  REQUIRE(c.orf == 0.75);

  // trigger zero always acts
  auto all = count_contingency(prob, ev, 0.0);
  REQUIRE(all.hit == all.orf);
  REQUIRE(all.fa == 1.0 - all.orf);
  REQUIRE(all.miss == 0.0);

  // only certainty passes a unit trigger
  auto certain = count_contingency({1.0, 0.3}, {1, 1}, 1.0);
  REQUIRE(certain.hit == 0.5);
  REQUIRE(certain.miss == 0.5);

  REQUIRE_THROWS_AS(count_contingency({}, {}, 0.5), usage_error);
}

TEST_CASE("economic value of the perfect forecast is one on both branches") {
  contingency perfect;
  perfect.hit = 0.37;
  perfect.fa = 0.0;
  perfect.miss = 0.0;
  perfect.orf = 0.37;
  for (double cl : default_cost_loss_grid())
    REQUIRE_THAT(pev_value(cl, perfect), WithinAbs(1.0, 1e-12));
}

TEST_CASE("economic value of trivial action policies") {
  // 64 cases so every count fraction is dyadic and the algebra is exact
  rng g(substream(11, "pev-trivial"));
  std::vector<double> prob;
  std::vector<int> ev;
  for (int i = 0; i < 64; ++i) {
    prob.push_back(g.uniform(0.05, 0.95));
    ev.push_back(i % 3 == 0 ? 1 : 0);
  }
  auto always = count_contingency(prob, ev, 0.0);
  auto never = count_contingency(prob, ev, 2.0);
  for (double cl : default_cost_loss_grid()) {
    if (cl < always.orf) {
      REQUIRE(pev_value(cl, always) == 0.0);
      REQUIRE(pev_value(cl, never) < 0.0);
    } else {
      REQUIRE(pev_value(cl, never) == 0.0);
      REQUIRE(pev_value(cl, always) <= 0.0);
    }
  }
}

TEST_CASE("economic value matches the expense-ratio form") {
  rng g(substream(11, "pev-oracle"));
  auto grid = default_cost_loss_grid();
  for (int rep = 0; rep < 1000; ++rep) {
    size_t n = 3 + g.below(40);
    std::vector<double> prob;
    std::vector<int> ev;
    for (size_t i = 0; i < n; ++i) {
      prob.push_back(g.u01());
      ev.push_back(g.u01() < 0.5 ? 1 : 0);
    }
    auto c = count_contingency(prob, ev, g.u01());
    double cl = grid[g.below(grid.size())];
    double got = pev_value(cl, c);
    if (c.orf <= 0.0 || c.orf >= 1.0) {
      REQUIRE(is_na(got));
      continue;
    }
    double want = pev_expense_form(cl, c);
    REQUIRE(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    REQUIRE(got <= 1.0 + 1e-12);
  }
}

TEST_CASE("economic value rejects bad ratios and degenerate base rates") {
  contingency c;
  c.hit = 0.2;
  c.fa = 0.1;
  c.miss = 0.1;
  c.orf = 0.3;
  REQUIRE_THROWS_AS(pev_value(0.0, c), usage_error);
  REQUIRE_THROWS_AS(pev_value(1.0, c), usage_error);
  REQUIRE_THROWS_AS(pev_value(-0.2, c), usage_error);
  REQUIRE_THROWS_AS(pev_value(1.3, c), usage_error);

  contingency none;  // event never observed
  none.orf = 0.0;
  REQUIRE(is_na(pev_value(0.5, none)));
  contingency all;  // event always observed
  all.hit = 1.0;
  all.orf = 1.0;
  REQUIRE(is_na(pev_value(0.5, all)));
}

TEST_CASE("value curve takes the best trigger per cost-loss ratio") {
  REQUIRE(default_cost_loss_grid().size() == 99);
  REQUIRE(default_cost_loss_grid().front() == 0.01);
  REQUIRE(default_cost_loss_grid().back() == 0.99);
  auto triggers = default_pev_triggers({0.25, 0.5, 0.75});
  REQUIRE(triggers == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

  rng g(substream(11, "pev-curve"));
  std::vector<double> prob;
  std::vector<int> ev;
  for (int i = 0; i < 300; ++i) {
    double p = g.uniform(0.05, 0.95);
    prob.push_back(p);
    ev.push_back(g.u01() < p ? 1 : 0);
  }
  auto grid = default_cost_loss_grid();
  auto curve = pev_curve(prob, ev, triggers, grid);
  REQUIRE(curve.size() == grid.size());

  // the maximum dominates any single trigger and, with the always-act and
  // never-act policies available, never drops below zero
  auto single = count_contingency(prob, ev, 0.5);
  for (size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(curve[i] >= pev_value(grid[i], single) - 1e-12);
    REQUIRE(curve[i] >= -1e-12);
    REQUIRE(curve[i] <= 1.0 + 1e-12);
  }

  // binary certainty at the truth realizes full value everywhere
  std::vector<double> sure;
  for (int e : ev) sure.push_back(e ? 1.0 : 0.0);
  auto best = pev_curve(sure, ev, triggers, grid);
  for (double v : best) REQUIRE_THAT(v, WithinAbs(1.0, 1e-12));

  // no observed events leaves the whole curve undefined
  auto blank = pev_curve({0.2, 0.8}, {0, 0}, triggers, grid);
  for (double v : blank) REQUIRE(is_na(v));
}
