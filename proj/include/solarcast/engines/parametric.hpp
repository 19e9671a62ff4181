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
#ifndef SOLARCAST_ENGINES_PARAMETRIC_HPP_
#define SOLARCAST_ENGINES_PARAMETRIC_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "solarcast/engines/engine.hpp"
#include "solarcast/math/bfgs.hpp"
#include "solarcast/math/stats.hpp"

// Distributional regression with a location and a scale parameter, each a
// linear function of a stepwise-selected predictor subset. Two families:
//
//   gamma: mean mu (log link), dispersion sigma (log link); shape = 1/sigma^2,
//          scale = sigma^2 * mu, so Var = (sigma * mu)^2.
//   zero-truncated normal: pre-truncation location mu (identity link) and
//          scale sigma (log link) of a normal restricted to (0, inf).
//
// The two parameters are fitted sequentially: mu by stepwise AIC with the
// scale intercept co-estimated, then the scale by stepwise AIC holding the
// mu coefficients fixed.

namespace solarcast {

enum class param_family { gamma_family, truncnorm_family };

namespace detail {

// Mills-type hazard phi(m)/Phi(m); switches to the asymptotic form deep in
// the left tail where Phi underflows.
inline double normal_hazard_ratio(double m) {
  if (m < -30.0) return -m - 1.0 / m;
  return normal_pdf(m) / normal_cdf(m);
}

inline double gamma_nll_point(double y, double mu, double sigma) {
  double k = 1.0 / (sigma * sigma);
  double theta = sigma * sigma * mu;
  return -(k - 1.0) * std::log(y) + y / theta + lgamma_fn(k) + k * std::log(theta);
}

inline double truncnorm_nll_point(double y, double mu, double sigma) {
  double z = (y - mu) / sigma;
  double c = normal_cdf(mu / sigma);
  double log_norm = std::log(c > 1e-300 ? c : 1e-300);
  return std::log(sigma) + 0.5 * z * z + 0.9189385332046727418 + log_norm;
}

}  // namespace detail

// Negative log likelihood of a family over a case set with per-case mu and
// sigma. Observations must be inside the support.
inline double negloglik(param_family fam, const Eigen::VectorXd& mu,
                        const Eigen::VectorXd& sigma, const Eigen::VectorXd& y) {
  double acc = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    if (fam == param_family::gamma_family) {
      if (y[i] <= 0.0) throw fit_error("gamma likelihood at nonpositive observation");
      acc += detail::gamma_nll_point(y[i], mu[i], sigma[i]);
    } else {
      if (y[i] < 0.0) throw fit_error("truncated-normal likelihood at negative observation");
      acc += detail::truncnorm_nll_point(y[i], mu[i], sigma[i]);
    }
  }
  return acc;
}

inline double parametric_quantile(param_family fam, double mu, double sigma, double q) {
  if (fam == param_family::gamma_family) {
    double k = 1.0 / (sigma * sigma);
    double theta = sigma * sigma * mu;
    return gamma_quantile(q, k, theta);
  }
  double alpha_cdf = normal_cdf(-mu / sigma);
  double target = alpha_cdf + q * (1.0 - alpha_cdf);
  return mu + sigma * normal_quantile(target);
}

class parametric_engine : public quantile_engine {
 public:
  parametric_engine(param_family fam, const engine_hyper& hp) : fam_(fam), hp_(hp) {}

  std::string name() const override {
    return fam_ == param_family::gamma_family ? "ga" : "notr";
  }
  std::string version() const override { return name() + std::string("/1"); }
  bool is_stepwise_family() const override { return true; }

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_in,
           const std::vector<std::string>& names, const std::vector<double>& levels,
           std::uint64_t /*seed*/) override {
    names_ = names;
    levels_ = levels;
    const int p = static_cast<int>(x.cols());

    Eigen::VectorXd y = y_in;
    if (fam_ == param_family::gamma_family)
      for (int i = 0; i < y.size(); ++i)
        if (y[i] <= 0.0) y[i] = 1e-6;  // support excludes zero

    scaler_.fit(x);
    Eigen::MatrixXd xs = scaler_.apply(x);

    double y_mean = y.mean();
    double y_sd = std::sqrt((y.array() - y_mean).square().sum() /
                            std::max<double>(1.0, static_cast<double>(y.size() - 1)));
    y_sd = std::max(y_sd, 1e-6);

    // stage 1: mu subset, sigma intercept co-estimated
    std::vector<Eigen::VectorXd> mu_coef_cache;
    auto fit_mu = [&](const std::vector<int>& subset, Eigen::VectorXd& coef_out,
                      double& sigma_icept_out) -> double {
      int m = static_cast<int>(subset.size());
      Eigen::VectorXd x0(m + 2);
      x0.setZero();
      x0[0] = fam_ == param_family::gamma_family ? std::log(y_mean) : y_mean;
      x0[m + 1] = fam_ == param_family::gamma_family
                      ? std::log(std::max(y_sd / y_mean, 1e-3))
                      : std::log(y_sd);
      auto obj = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return mu_stage_objective(xs, y, subset, theta, grad);
      };
      bfgs_result r = bfgs_minimize(obj, x0, 200, 1e-8);
      coef_out = r.x.head(m + 1);
      sigma_icept_out = r.x[m + 1];
      return r.f;
    };

    auto mu_score = [&](const std::vector<int>& subset) {
      Eigen::VectorXd coef;
      double sig;
      double nll = fit_mu(subset, coef, sig);
      double k = static_cast<double>(subset.size()) + 2.0;
      return 2.0 * k + 2.0 * nll;
    };
    stepwise_outcome mu_sel = stepwise_select(p, hp_.steps_mu, mu_score);
    mu_subset_ = mu_sel.selected;
    double sigma_icept0;
    intercept_nll_ = 0.0;
    {
      Eigen::VectorXd c0;
      double s0;
      intercept_nll_ = fit_mu({}, c0, s0);
    }
    fit_mu(mu_subset_, mu_coef_, sigma_icept0);

    // stage 2: sigma subset, mu frozen
    Eigen::VectorXd mu_lin = linear_predictor(xs, mu_subset_, mu_coef_);
    auto fit_sigma = [&](const std::vector<int>& subset, Eigen::VectorXd& coef_out) {
      int m = static_cast<int>(subset.size());
      Eigen::VectorXd x0(m + 1);
      x0.setZero();
      x0[0] = sigma_icept0;
      auto obj = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return sigma_stage_objective(xs, y, mu_lin, subset, theta, grad);
      };
      bfgs_result r = bfgs_minimize(obj, x0, 200, 1e-8);
      coef_out = r.x;
      return r.f;
    };
    auto sigma_score = [&](const std::vector<int>& subset) {
      Eigen::VectorXd coef;
      double nll = fit_sigma(subset, coef);
      double k = static_cast<double>(subset.size()) + 1.0;
      return 2.0 * k + 2.0 * nll;
    };
    stepwise_outcome sig_sel = stepwise_select(p, hp_.steps_sigma, sigma_score);
    sigma_subset_ = sig_sel.selected;
    final_nll_ = fit_sigma(sigma_subset_, sigma_coef_);
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd xs = scaler_.apply(x);
    Eigen::VectorXd mu_lin = linear_predictor(xs, mu_subset_, mu_coef_);
    Eigen::VectorXd sig_lin = linear_predictor(xs, sigma_subset_, sigma_coef_);
    Eigen::MatrixXd out(x.rows(), static_cast<long>(levels_.size()));
    for (int i = 0; i < x.rows(); ++i) {
      double mu = fam_ == param_family::gamma_family ? std::exp(mu_lin[i]) : mu_lin[i];
      double sigma = std::exp(sig_lin[i]);
      if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0 ||
          (fam_ == param_family::gamma_family && mu <= 0.0))
        throw fit_error("parameter out of domain at prediction");
      for (size_t k = 0; k < levels_.size(); ++k)
        out(i, static_cast<long>(k)) = parametric_quantile(fam_, mu, sigma, levels_[k]);
    }
    return out;
  }

  std::map<std::string, double> importance() const override {
    std::map<std::string, double> imp;
    for (int j : mu_subset_) imp[names_[j]] += 1.0;
    for (int j : sigma_subset_) imp[names_[j]] += 1.0;
    return imp;
  }

  nlohmann::json save() const override {
    nlohmann::json j;
    j["family"] = fam_ == param_family::gamma_family ? "gamma" : "truncnorm";
    j["levels"] = levels_;
    j["names"] = names_;
    j["mu_subset"] = mu_subset_;
    j["sigma_subset"] = sigma_subset_;
    j["mu_coef"] = std::vector<double>(mu_coef_.data(), mu_coef_.data() + mu_coef_.size());
    j["sigma_coef"] =
        std::vector<double>(sigma_coef_.data(), sigma_coef_.data() + sigma_coef_.size());
    j["scaler_mean"] = std::vector<double>(scaler_.mean.data(),
                                           scaler_.mean.data() + scaler_.mean.size());
    j["scaler_scale"] = std::vector<double>(scaler_.scale.data(),
                                            scaler_.scale.data() + scaler_.scale.size());
    j["final_nll"] = final_nll_;
    j["intercept_nll"] = intercept_nll_;
    return j;
  }

  void load(const nlohmann::json& j) override {
    std::string fam = j.at("family").get<std::string>();
    fam_ = fam == "gamma" ? param_family::gamma_family : param_family::truncnorm_family;
    levels_ = j.at("levels").get<std::vector<double>>();
    names_ = j.at("names").get<std::vector<std::string>>();
    mu_subset_ = j.at("mu_subset").get<std::vector<int>>();
    sigma_subset_ = j.at("sigma_subset").get<std::vector<int>>();
    auto mv = j.at("mu_coef").get<std::vector<double>>();
    mu_coef_ = Eigen::Map<Eigen::VectorXd>(mv.data(), static_cast<long>(mv.size()));
    auto sv = j.at("sigma_coef").get<std::vector<double>>();
    sigma_coef_ = Eigen::Map<Eigen::VectorXd>(sv.data(), static_cast<long>(sv.size()));
    auto mm = j.at("scaler_mean").get<std::vector<double>>();
    scaler_.mean = Eigen::Map<Eigen::VectorXd>(mm.data(), static_cast<long>(mm.size()));
    auto ms = j.at("scaler_scale").get<std::vector<double>>();
    scaler_.scale = Eigen::Map<Eigen::VectorXd>(ms.data(), static_cast<long>(ms.size()));
    final_nll_ = j.value("final_nll", 0.0);
    intercept_nll_ = j.value("intercept_nll", 0.0);
  }

  // unstandardized mu-model coefficients over the registry columns
  // (intercept first), for the recovery tests
  std::vector<double> mu_coefficients_raw() const {
    std::vector<double> out(names_.size() + 1, 0.0);
    out[0] = mu_coef_[0];
    for (size_t k = 0; k < mu_subset_.size(); ++k) {
      int j = mu_subset_[k];
      double b = mu_coef_[static_cast<long>(k) + 1] / scaler_.scale[j];
      out[static_cast<size_t>(j) + 1] = b;
      out[0] -= b * scaler_.mean[j];
    }
    return out;
  }
  const std::vector<int>& mu_subset() const { return mu_subset_; }
  double final_nll() const { return final_nll_; }
  double intercept_only_nll() const { return intercept_nll_; }

 private:
  static Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& xs,
                                          const std::vector<int>& subset,
                                          const Eigen::VectorXd& coef) {
    Eigen::VectorXd lin = Eigen::VectorXd::Constant(xs.rows(), coef[0]);
    for (size_t k = 0; k < subset.size(); ++k)
      lin += coef[static_cast<long>(k) + 1] * xs.col(subset[k]);
    return lin;
  }

  // theta = [mu coefs (m+1), sigma intercept]; returns NLL, fills gradient.
  double mu_stage_objective(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                            const std::vector<int>& subset, const Eigen::VectorXd& theta,
                            Eigen::VectorXd& grad) const {
    int m = static_cast<int>(subset.size());
    Eigen::VectorXd mu_coef = theta.head(m + 1);
    double sig_icept = theta[m + 1];
    Eigen::VectorXd mu_lin = linear_predictor(xs, subset, mu_coef);
    grad.setZero(theta.size());
    double nll = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double dmu_lin, dsig_lin;
      nll += point_nll_grads(y[i], mu_lin[i], sig_icept, dmu_lin, dsig_lin);
      grad[0] += dmu_lin;
      for (int k = 0; k < m; ++k) grad[k + 1] += dmu_lin * xs(i, subset[k]);
      grad[m + 1] += dsig_lin;
    }
    return nll;
  }

  double sigma_stage_objective(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& mu_lin, const std::vector<int>& subset,
                               const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    int m = static_cast<int>(subset.size());
    Eigen::VectorXd sig_lin = linear_predictor(xs, subset, theta);
    grad.setZero(theta.size());
    double nll = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double dmu_lin, dsig_lin;
      nll += point_nll_grads(y[i], mu_lin[i], sig_lin[i], dmu_lin, dsig_lin);
      grad[0] += dsig_lin;
      for (int k = 0; k < m; ++k) grad[k + 1] += dsig_lin * xs(i, subset[k]);
    }
    return nll;
  }

  // NLL of one case plus derivatives w.r.t. the linked parameters
  // (eta_mu is log mu for gamma, mu itself for truncnorm; eta_sigma is
  // log sigma for both). The links are clamped to +-30 so that line-search
  // probes far outside any plausible optimum stay finite (digamma and
  // lgamma blow up as the gamma shape 1/sigma^2 degenerates).
  double point_nll_grads(double y, double mu_lin, double sig_lin, double& d_eta_mu,
                         double& d_eta_sigma) const {
    sig_lin = std::clamp(sig_lin, -30.0, 30.0);
    double sigma = std::exp(sig_lin);
    if (fam_ == param_family::gamma_family) {
      double mu = std::exp(std::clamp(mu_lin, -30.0, 30.0));
      double k = 1.0 / (sigma * sigma);
      double theta = sigma * sigma * mu;
      double nll = -(k - 1.0) * std::log(y) + y / theta + lgamma_fn(k) +
                   k * std::log(theta);
      d_eta_mu = (mu - y) / (sigma * sigma * mu);
      d_eta_sigma = (2.0 / (sigma * sigma)) *
                    (std::log(y) - digamma(k) - std::log(theta) - y / mu + 1.0);
      return nll;
    }
    double mu = mu_lin;
    double z = (y - mu) / sigma;
    double hazard = detail::normal_hazard_ratio(mu / sigma);
    double nll = detail::truncnorm_nll_point(y, mu, sigma);
    d_eta_mu = (mu - y) / (sigma * sigma) + hazard / sigma;
    d_eta_sigma = 1.0 - z * z - hazard * mu / sigma;
    return nll;
  }

  param_family fam_;
  engine_hyper hp_;
  std::vector<std::string> names_;
  std::vector<double> levels_;
  std::vector<int> mu_subset_, sigma_subset_;
  Eigen::VectorXd mu_coef_, sigma_coef_;
  column_scaler scaler_;
  double final_nll_ = 0.0;
  double intercept_nll_ = 0.0;
};

}  // namespace solarcast

#endif  // SOLARCAST_ENGINES_PARAMETRIC_HPP_
