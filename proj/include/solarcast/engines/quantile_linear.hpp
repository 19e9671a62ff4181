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
#ifndef SOLARCAST_ENGINES_QUANTILE_LINEAR_HPP_
#define SOLARCAST_ENGINES_QUANTILE_LINEAR_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "solarcast/engines/engine.hpp"
#include "solarcast/math/rng.hpp"
#include "solarcast/math/stats.hpp"

namespace solarcast {

// Exact linear quantile regression via a primal-dual interior point method
// on the LP
//     min q 1'u + (1-q) 1'v   s.t.  X b + u - v = y,  u, v >= 0,
// with dual variable a (w = q - a and z = (1-q) + a are the bound slacks).
// Terminates on duality gap below `tol`.
inline Eigen::VectorXd qr_fit_single(const Eigen::MatrixXd& x_design,
                                     const Eigen::VectorXd& y, double q,
                                     double tol = 1e-8, int max_iter = 200) {
  const int n = static_cast<int>(y.size());
  const int p = static_cast<int>(x_design.cols());
  if (q <= 0.0 || q >= 1.0) throw usage_error("quantile level outside (0,1)");

  // degenerate constant target: every quantile is that constant
  double y_spread = y.maxCoeff() - y.minCoeff();
  if (y_spread <= 0.0) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta[0] = y[0];
    return beta;
  }

  Eigen::VectorXd beta =
      x_design.colPivHouseholderQr().solve(y);  // least-squares start
  Eigen::VectorXd r = y - x_design * beta;
  double eps = 0.1 * r.cwiseAbs().mean() + 1e-4;
  Eigen::VectorXd u = r.cwiseMax(0.0).array() + eps;
  Eigen::VectorXd v = (-r).cwiseMax(0.0).array() + eps;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);  // in (-(1-q), q)

  double mu_ip = 0.1;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::ArrayXd w = q - a.array();          // > 0
    Eigen::ArrayXd z = (1.0 - q) + a.array();  // > 0

    double gap = q * u.sum() + (1.0 - q) * v.sum() - a.dot(y);
    double obj = q * u.sum() + (1.0 - q) * v.sum();
    if (gap < tol * (1.0 + std::abs(obj)) && iter > 0) break;
    mu_ip = 0.1 * gap / (2.0 * n);
    if (mu_ip < 0.0) mu_ip = 1e-14;

    Eigen::ArrayXd wgt = u.array() / w + v.array() / z;  // diag of W
    Eigen::VectorXd rhs =
        (y - x_design * beta).array() - mu_ip / w + mu_ip / z;

    Eigen::MatrixXd xtwx = x_design.transpose() *
                           (x_design.array().colwise() / wgt).matrix();
    Eigen::VectorXd xtrhs =
        x_design.transpose() * (rhs.array() / wgt).matrix() -
        x_design.transpose() * a;
    Eigen::VectorXd dbeta = xtwx.ldlt().solve(xtrhs);

    Eigen::ArrayXd da = (rhs - x_design * dbeta).array() / wgt;
    Eigen::ArrayXd du = (mu_ip - u.array() * w + u.array() * da) / w;
    Eigen::ArrayXd dv = (mu_ip - v.array() * z - v.array() * da) / z;

    double step = 1.0;
    for (int i = 0; i < n; ++i) {
      if (du[i] < 0.0) step = std::min(step, -u[i] / du[i]);
      if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
      if (da[i] > 0.0) step = std::min(step, w[i] / da[i]);   // keep q - a > 0
      if (da[i] < 0.0) step = std::min(step, -z[i] / da[i]);  // keep (1-q)+a > 0
    }
    step = std::min(1.0, 0.9995 * step);

    beta += step * dbeta;
    u.array() += step * du;
    v.array() += step * dv;
    a.array() += step * da;
  }
  return beta;
}

inline double mean_pinball(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted,
                           double q) {
  double acc = 0.0;
  for (int i = 0; i < y.size(); ++i) acc += pinball_loss(q, y[i], fitted[i]);
  return acc / static_cast<double>(y.size());
}

// Zero-mean noise with variance `var` added to every predictor cell.
inline Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& x, std::uint64_t seed,
                                    double var = 0.001) {
  rng gen(seed);
  double sd = std::sqrt(var);
  Eigen::MatrixXd out = x;
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) += gen.normal(0.0, sd);
  return out;
}

// One coefficient vector per level over a shared stepwise-selected subset.
class qr_engine : public quantile_engine {
 public:
  explicit qr_engine(const engine_hyper& hp) : hp_(hp) {}

  std::string name() const override { return "qr"; }
  std::string version() const override { return "qr/1"; }
  bool is_stepwise_family() const override { return true; }

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const std::vector<std::string>& names, const std::vector<double>& levels,
           std::uint64_t seed) override {
    names_ = names;
    levels_ = levels;
    const int p = static_cast<int>(x.cols());
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd xn = inject_noise(x, substream(seed, "qr-noise"));

    // average over levels of AIC_q = 2k + 2n log(mean pinball), the
    // asymmetric-Laplace correspondence
    auto score = [&](const std::vector<int>& subset) {
      double acc = 0.0;
      Eigen::MatrixXd design = build_design(xn, subset);
      for (double q : levels_) {
        Eigen::VectorXd beta = qr_fit_single(design, y, q);
        double mp = mean_pinball(y, design * beta, q);
        double k = static_cast<double>(subset.size()) + 1.0;
        acc += 2.0 * k + 2.0 * n * std::log(std::max(mp, 1e-300));
      }
      return acc / static_cast<double>(levels_.size());
    };
    stepwise_outcome sel = stepwise_select(p, hp_.steps_quantile, score);
    subset_ = sel.selected;

    Eigen::MatrixXd design = build_design(xn, subset_);
    coef_.resize(levels_.size());
    for (size_t k = 0; k < levels_.size(); ++k)
      coef_[k] = qr_fit_single(design, y, levels_[k]);
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd design = build_design(x, subset_);
    Eigen::MatrixXd out(x.rows(), static_cast<long>(levels_.size()));
    for (size_t k = 0; k < levels_.size(); ++k)
      out.col(static_cast<long>(k)) = design * coef_[k];
    for (int i = 0; i < out.rows(); ++i) {
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
    std::vector<std::vector<double>> cs;
    for (const auto& c : coef_)
      cs.emplace_back(c.data(), c.data() + c.size());
    j["coef"] = cs;
    return j;
  }

  void load(const nlohmann::json& j) override {
    levels_ = j.at("levels").get<std::vector<double>>();
    names_ = j.at("names").get<std::vector<std::string>>();
    subset_ = j.at("subset").get<std::vector<int>>();
    auto cs = j.at("coef").get<std::vector<std::vector<double>>>();
    coef_.clear();
    for (auto& c : cs)
      coef_.push_back(Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<long>(c.size())));
  }

  const std::vector<int>& subset() const { return subset_; }
  const std::vector<Eigen::VectorXd>& coefficients() const { return coef_; }

 private:
  static Eigen::MatrixXd build_design(const Eigen::MatrixXd& x,
                                      const std::vector<int>& subset) {
    Eigen::MatrixXd d(x.rows(), static_cast<long>(subset.size()) + 1);
    d.col(0).setOnes();
    for (size_t k = 0; k < subset.size(); ++k)
      d.col(static_cast<long>(k) + 1) = x.col(subset[k]);
    return d;
  }

  engine_hyper hp_;
  std::vector<std::string> names_;
  std::vector<double> levels_;
  std::vector<int> subset_;
  std::vector<Eigen::VectorXd> coef_;
};

}  // namespace solarcast

#endif  // SOLARCAST_ENGINES_QUANTILE_LINEAR_HPP_
