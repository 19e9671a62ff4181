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
#ifndef SOLARCAST_ENGINES_ENGINE_HPP_
#define SOLARCAST_ENGINES_ENGINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "solarcast/common.hpp"
#include "solarcast/domain.hpp"

namespace solarcast {

struct engine_hyper {
  int steps_mu = 5;
  int steps_sigma = 1;
  int steps_quantile = 5;  // QR and MCQRNN share the budget from the same table row

  int mcqrnn_hidden_layers = 1;
  int mcqrnn_iterations = 10;
  double mcqrnn_penalty = 0.0;

  int qrf_trees = 500;
  int grf_trees = 500;
  int gbdt_trees = 100;
  int min_leaf = 5;
  double case_fraction = 0.5;
  double predictor_fraction = 1.0 / 3.0;
  int gbdt_depth = 1;
  double learning_rate = 0.1;

  void validate() const {
    if (steps_mu < 0 || steps_sigma < 0 || steps_quantile < 0)
      throw usage_error("stepwise budgets must be >= 0");
    if (mcqrnn_hidden_layers != 1)
      throw usage_error("only one hidden layer is supported");
    if (mcqrnn_iterations < 0 || mcqrnn_penalty < 0.0)
      throw usage_error("bad mcqrnn settings");
    if (qrf_trees < 1 || grf_trees < 1 || gbdt_trees < 0)
      throw usage_error("tree counts must be positive");
    if (min_leaf < 1) throw usage_error("min leaf must be >= 1");
    if (case_fraction <= 0.0 || case_fraction > 1.0)
      throw usage_error("case fraction outside (0,1]");
    if (predictor_fraction <= 0.0 || predictor_fraction > 1.0)
      throw usage_error("predictor fraction outside (0,1]");
    if (gbdt_depth != 1) throw usage_error("only depth-1 boosting trees are supported");
    if (learning_rate < 0.0 || learning_rate > 1.0)
      throw usage_error("learning rate outside [0,1]");
  }
};

// A fitted probabilistic engine: rows of predict() are the per-case
// quantile vectors at the levels given to fit(), already non-decreasing and
// nonnegative.
class quantile_engine {
 public:
  virtual ~quantile_engine() = default;
  virtual std::string name() const = 0;
  virtual std::string version() const = 0;
  virtual void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const std::vector<std::string>& names,
                   const std::vector<double>& levels, std::uint64_t seed) = 0;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const = 0;
  virtual nlohmann::json save() const = 0;
  virtual void load(const nlohmann::json& j) = 0;
  // stepwise engines report selection counts, tree engines split-improvement
  // sums; keyed by predictor name, missing means zero
  virtual std::map<std::string, double> importance() const = 0;
  virtual bool is_stepwise_family() const = 0;
};

// Generic forward/backward stepwise driver. score(subset) returns the AIC
// of the model fitted on that predictor subset; the driver memoizes, spends
// at most `budget` accepted moves and only accepts strict improvements.
struct stepwise_outcome {
  std::vector<int> selected;
  double aic = 0.0;
  int moves = 0;
};

inline stepwise_outcome stepwise_select(
    int p, int budget, const std::function<double(const std::vector<int>&)>& score) {
  stepwise_outcome out;
  std::map<std::vector<int>, double> cache;
  auto eval = [&](const std::vector<int>& subset) {
    auto it = cache.find(subset);
    if (it != cache.end()) return it->second;
    double v = score(subset);
    cache.emplace(subset, v);
    return v;
  };
  out.aic = eval({});
  while (out.moves < budget) {
    std::vector<int> best;
    double best_aic = out.aic;
    for (int j = 0; j < p; ++j) {  // forward
      bool in = false;
      for (int s : out.selected)
        if (s == j) {
          in = true;
          break;
        }
      if (in) continue;
      std::vector<int> cand = out.selected;
      cand.push_back(j);
      std::sort(cand.begin(), cand.end());
      double a = eval(cand);
      if (a < best_aic - 1e-9) {
        best_aic = a;
        best = cand;
      }
    }
    for (size_t r = 0; r < out.selected.size(); ++r) {  // backward
      std::vector<int> cand = out.selected;
      cand.erase(cand.begin() + static_cast<long>(r));
      double a = eval(cand);
      if (a < best_aic - 1e-9) {
        best_aic = a;
        best = cand;
      }
    }
    if (best_aic >= out.aic - 1e-9) break;
    out.selected = best;
    out.aic = best_aic;
    ++out.moves;
  }
  return out;
}

// Column standardization used by several engines; constant columns get unit
// scale so they pass through as zeros.
struct column_scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  void fit(const Eigen::MatrixXd& x) {
    mean = x.colwise().mean();
    scale.resize(x.cols());
    for (int j = 0; j < x.cols(); ++j) {
      double var = (x.col(j).array() - mean[j]).square().sum() /
                   std::max<double>(1.0, static_cast<double>(x.rows() - 1));
      double sd = std::sqrt(var);
      scale[j] = sd > 1e-12 ? sd : 1.0;
    }
  }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
  }
};

std::unique_ptr<quantile_engine> make_engine(std::string_view name,
                                             const engine_hyper& hp);

inline const std::vector<std::string>& engine_names() {
  static const std::vector<std::string> names = {"ga",  "notr", "qr",  "mcqrnn",
                                                 "qrf", "grf",  "gbdt"};
  return names;
}

}  // namespace solarcast

#endif  // SOLARCAST_ENGINES_ENGINE_HPP_
