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
#ifndef SOLARCAST_MATH_BFGS_HPP_
#define SOLARCAST_MATH_BFGS_HPP_

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "solarcast/common.hpp"

namespace solarcast {

struct bfgs_result {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Quasi-Newton minimizer with inverse-Hessian BFGS updates and Armijo
// backtracking. objective(x, grad) returns f and fills grad. Convergence on
// relative objective change below rel_tol, matching the fitting contract.
inline bfgs_result bfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& objective,
    Eigen::VectorXd x0, int max_iter = 200, double rel_tol = 1e-8) {
  const int n = static_cast<int>(x0.size());
  bfgs_result res;
  res.x = std::move(x0);

  Eigen::VectorXd g(n), g_new(n);
  double f = objective(res.x, g);
  if (!std::isfinite(f)) throw fit_error("objective not finite at start point");

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    Eigen::VectorXd dir = -(h_inv * g);
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // not a descent direction; reset curvature
      h_inv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) {
      res.converged = true;
      break;
    }

    double step = 1.0;
    double f_new = f;
    Eigen::VectorXd x_new = res.x;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * dir;
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no progress possible at machine scale
      break;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd yv = g_new - g;
    double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm() && sy > 0.0) {
      double rho = 1.0 / sy;
      Eigen::MatrixXd outer = s * yv.transpose() * rho;
      h_inv = (Eigen::MatrixXd::Identity(n, n) - outer) * h_inv *
                  (Eigen::MatrixXd::Identity(n, n) - outer.transpose()) +
              rho * s * s.transpose();
    }

    double df = f - f_new;
    res.x = std::move(x_new);
    g = g_new;
    f = f_new;
    if (df <= rel_tol * (std::abs(f) + 1e-12)) {
      res.converged = true;
      break;
    }
  }
  res.f = f;
  return res;
}

}  // namespace solarcast

#endif  // SOLARCAST_MATH_BFGS_HPP_
