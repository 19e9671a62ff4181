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
#ifndef SOLARCAST_ENGINES_QUANTILE_NET_HPP_
#define SOLARCAST_ENGINES_QUANTILE_NET_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "solarcast/engines/engine.hpp"
#include "solarcast/math/bfgs.hpp"
#include "solarcast/math/rng.hpp"
#include "solarcast/math/stats.hpp"

namespace solarcast {

// Composite quantile regression network, monotone in the quantile level.
// The level enters as an extra input whose first-layer weights, together
// with the hidden-to-output weights, are exp-reparameterized so every path
// from the level input to the output has positive weight product. With a
// monotone activation this makes the output nondecreasing in the level, so
// all quantiles come from one net without crossing.
//
// Trained on the Huber-smoothed pinball loss averaged over all
// (case, level) pairs; several warm-started quasi-Newton passes, each pass
// restarting the curvature estimate.
class mcqrnn_engine : public quantile_engine {
 public:
  explicit mcqrnn_engine(const engine_hyper& hp) : hp_(hp) {}

  std::string name() const override { return "mcqrnn"; }
  std::string version() const override { return "mcqrnn/1"; }
  bool is_stepwise_family() const override { return true; }

  // theta layout: [w1 (h*p), log tau weights (h), b1 (h), log w2 (h), b2]
  static int param_count(int hidden, int p) { return hidden * (p + 3) + 1; }
  static int hidden_for(int p) { return std::min(std::max(p, 1), 16); }

  static double forward(const Eigen::VectorXd& theta, int hidden, int p,
                        const double* x_row, double tau) {
    double out = theta[hidden * p + 3 * hidden];  // b2
    for (int h = 0; h < hidden; ++h) {
      double z = theta[hidden * p + hidden + h];  // b1
      for (int j = 0; j < p; ++j) z += theta[h * p + j] * x_row[j];
      z += std::exp(theta[hidden * p + h]) * tau;
      double s = 1.0 / (1.0 + std::exp(-z));
      out += std::exp(theta[hidden * p + 2 * hidden + h]) * s;
    }
    return out;
  }

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const std::vector<std::string>& names, const std::vector<double>& levels,
           std::uint64_t seed) override {
    names_ = names;
    levels_ = levels;
    scaler_.fit(x);
    Eigen::MatrixXd xs = scaler_.apply(x);
    const int p = static_cast<int>(x.cols());
    const int n = static_cast<int>(x.rows());

    constant_ = (y.maxCoeff() - y.minCoeff() <= 0.0);
    if (constant_) {
      constant_value_ = n > 0 ? y[0] : 0.0;
      subset_.clear();
      hidden_ = 0;
      return;
    }

    // subset search scored on a thinned level grid with a short fit;
    // complexity term counts every network parameter
    std::vector<double> thin;
    for (size_t k = 0; k < levels_.size(); k += 6) thin.push_back(levels_[k]);
    auto score = [&](const std::vector<int>& subset) {
      std::uint64_t s = seed;
      for (int j : subset) s = fnv1a_u64(s, static_cast<std::uint64_t>(j) + 1);
      Eigen::VectorXd theta = train(xs, y, subset, thin,
                                    std::min(hp_.mcqrnn_iterations, 3),
                                    substream(s, "mcqrnn-step"));
      double mp = grid_pinball(theta, xs, y, subset, thin);
      double k = static_cast<double>(param_count(
          hidden_for(static_cast<int>(subset.size())), static_cast<int>(subset.size())));
      return 2.0 * k + 2.0 * n * std::log(std::max(mp, 1e-300));
    };
    stepwise_outcome sel = stepwise_select(p, hp_.steps_quantile, score);
    subset_ = sel.selected;

    hidden_ = hidden_for(static_cast<int>(subset_.size()));
    theta_ = train(xs, y, subset_, levels_, hp_.mcqrnn_iterations,
                   substream(seed, "mcqrnn-init"));
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd xs = scaler_.apply(x);
    const int psub = static_cast<int>(subset_.size());
    Eigen::MatrixXd out(x.rows(), static_cast<long>(levels_.size()));
    std::vector<double> row_in(std::max(psub, 1));
    for (int i = 0; i < x.rows(); ++i) {
      if (constant_) {
        for (size_t k = 0; k < levels_.size(); ++k)
          out(i, static_cast<long>(k)) = constant_value_;
      } else {
        for (int j = 0; j < psub; ++j) row_in[j] = xs(i, subset_[j]);
        for (size_t k = 0; k < levels_.size(); ++k)
          out(i, static_cast<long>(k)) =
              forward(theta_, hidden_, psub, row_in.data(), levels_[k]);
      }
      std::vector<double> row(out.cols());
      for (int k = 0; k < out.cols(); ++k) row[k] = out(i, k);
      row = sanitize_quantiles(std::move(row), levels_.size());
      for (int k = 0; k < out.cols(); ++k) out(i, k) = row[k];
    }
    return out;
  }

  std::map<std::string, double> importance() const override {
    std::map<std::string, double> imp;
    for (int j : subset_) imp[names_[j]] += 1.0;
    return imp;
  }

  nlohmann::json save() const override {
    nlohmann::json j;
    j["levels"] = levels_;
    j["names"] = names_;
    j["subset"] = subset_;
    j["hidden"] = hidden_;
    j["constant"] = constant_;
    j["constant_value"] = constant_value_;
    j["theta"] = std::vector<double>(theta_.data(), theta_.data() + theta_.size());
    j["scale_mean"] = std::vector<double>(scaler_.mean.data(),
                                          scaler_.mean.data() + scaler_.mean.size());
    j["scale_sd"] = std::vector<double>(scaler_.scale.data(),
                                        scaler_.scale.data() + scaler_.scale.size());
    return j;
  }

  void load(const nlohmann::json& j) override {
    levels_ = j.at("levels").get<std::vector<double>>();
    names_ = j.at("names").get<std::vector<std::string>>();
    subset_ = j.at("subset").get<std::vector<int>>();
    hidden_ = j.at("hidden").get<int>();
    constant_ = j.at("constant").get<bool>();
    constant_value_ = j.at("constant_value").get<double>();
    auto th = j.at("theta").get<std::vector<double>>();
    theta_ = Eigen::Map<Eigen::VectorXd>(th.data(), static_cast<long>(th.size()));
    auto sm = j.at("scale_mean").get<std::vector<double>>();
    scaler_.mean = Eigen::Map<Eigen::VectorXd>(sm.data(), static_cast<long>(sm.size()));
    auto ss = j.at("scale_sd").get<std::vector<double>>();
    scaler_.scale = Eigen::Map<Eigen::VectorXd>(ss.data(), static_cast<long>(ss.size()));
  }

  const std::vector<int>& subset() const { return subset_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  int hidden() const { return hidden_; }

 private:
  // smoothed pinball: quadratic within eps of the kink, C1 everywhere
  static double smooth_pinball(double q, double r, double eps, double* dslope) {
    double t = r >= 0.0 ? r : -r;
    double w = r >= 0.0 ? q : (1.0 - q);
    double hub, dh;
    if (t <= eps) {
      hub = t * t / (2.0 * eps);
      dh = t / eps;
    } else {
      hub = t - eps / 2.0;
      dh = 1.0;
    }
    *dslope = (r >= 0.0 ? w * dh : -w * dh);  // d/dr
    return w * hub;
  }

  Eigen::VectorXd train(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                        const std::vector<int>& subset,
                        const std::vector<double>& grid, int passes,
                        std::uint64_t init_seed) const {
    const int psub = static_cast<int>(subset.size());
    const int hidden = hidden_for(psub);
    const int np = param_count(hidden, psub);
    const int n = static_cast<int>(xs.rows());
    const double eps = 1e-4;

    Eigen::MatrixXd xsub(n, std::max(psub, 1));
    for (int j = 0; j < psub; ++j) xsub.col(j) = xs.col(subset[j]);

    rng gen(init_seed);
    Eigen::VectorXd theta(np);
    for (int i = 0; i < np; ++i) theta[i] = gen.normal(0.0, 0.1);
    double w2_sum = 0.0;
    for (int h = 0; h < hidden; ++h)
      w2_sum += std::exp(theta[hidden * psub + 2 * hidden + h]);
    std::vector<double> ys(y.data(), y.data() + n);
    double med = empirical_quantile(ys, 0.5);
    theta[hidden * psub + 3 * hidden] = med - w2_sum / 2.0;

    const double denom = static_cast<double>(n) * static_cast<double>(grid.size());
    auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
      grad.setZero(np);
      double loss = 0.0;
      std::vector<double> sig(hidden), w2(hidden), wt(hidden);
      for (int h = 0; h < hidden; ++h) {
        w2[h] = std::exp(th[hidden * psub + 2 * hidden + h]);
        wt[h] = std::exp(th[hidden * psub + h]);
      }
      for (int i = 0; i < n; ++i) {
        const double* xr = xsub.row(i).data();
        for (double q : grid) {
          double f = th[hidden * psub + 3 * hidden];
          for (int h = 0; h < hidden; ++h) {
            double z = th[hidden * psub + hidden + h];
            for (int j = 0; j < psub; ++j) z += th[h * psub + j] * xr[j];
            z += wt[h] * q;
            sig[h] = 1.0 / (1.0 + std::exp(-z));
            f += w2[h] * sig[h];
          }
          double dr;
          loss += smooth_pinball(q, y[i] - f, eps, &dr);
          double g = -dr;  // d loss / d f
          grad[hidden * psub + 3 * hidden] += g;
          for (int h = 0; h < hidden; ++h) {
            double s = sig[h];
            grad[hidden * psub + 2 * hidden + h] += g * w2[h] * s;
            double c = g * w2[h] * s * (1.0 - s);
            grad[hidden * psub + hidden + h] += c;
            grad[hidden * psub + h] += c * wt[h] * q;
            for (int j = 0; j < psub; ++j) grad[h * psub + j] += c * xr[j];
          }
        }
      }
      loss /= denom;
      grad /= denom;
      if (hp_.mcqrnn_penalty > 0.0) {
        for (int h = 0; h < hidden; ++h)
          for (int j = 0; j < psub; ++j) {
            loss += hp_.mcqrnn_penalty * th[h * psub + j] * th[h * psub + j];
            grad[h * psub + j] += 2.0 * hp_.mcqrnn_penalty * th[h * psub + j];
          }
      }
      return loss;
    };

    for (int pass = 0; pass < passes; ++pass) {
      bfgs_result res = bfgs_minimize(objective, theta, 40, 1e-8);
      theta = res.x;
      if (res.converged && res.iterations <= 1) break;
    }
    return theta;
  }

  double grid_pinball(const Eigen::VectorXd& theta, const Eigen::MatrixXd& xs,
                      const Eigen::VectorXd& y, const std::vector<int>& subset,
                      const std::vector<double>& grid) const {
    const int psub = static_cast<int>(subset.size());
    const int hidden = hidden_for(psub);
    const int n = static_cast<int>(xs.rows());
    std::vector<double> row(std::max(psub, 1));
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < psub; ++j) row[j] = xs(i, subset[j]);
      for (double q : grid)
        acc += pinball_loss(q, y[i], forward(theta, hidden, psub, row.data(), q));
    }
    return acc / (static_cast<double>(n) * static_cast<double>(grid.size()));
  }

  engine_hyper hp_;
  std::vector<std::string> names_;
  std::vector<double> levels_;
  std::vector<int> subset_;
  int hidden_ = 0;
  bool constant_ = false;
  double constant_value_ = 0.0;
  Eigen::VectorXd theta_;
  column_scaler scaler_;
};

}  // namespace solarcast

#endif  // SOLARCAST_ENGINES_QUANTILE_NET_HPP_
