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
#ifndef SOLARCAST_MATH_STATS_HPP_
#define SOLARCAST_MATH_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "solarcast/common.hpp"

namespace solarcast {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

// q-th value of a sample under the step-function convention: smallest
// sorted value whose cumulative weight reaches q * total. Shared by the
// forest pooling and the climatology reference so the two agree by
// definition.
inline double weighted_quantile(std::vector<std::pair<double, double>>& value_weight,
                                double q) {
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (auto& vw : value_weight) total += vw.second;
  double target = q * total;
  double cum = 0.0;
  for (auto& vw : value_weight) {
    cum += vw.second;
    if (cum >= target && vw.second > 0.0) return vw.first;
  }
  return value_weight.back().first;
}

inline double empirical_quantile(std::vector<double> sorted_or_not, double q) {
  std::sort(sorted_or_not.begin(), sorted_or_not.end());
  size_t n = sorted_or_not.size();
  double target = q * static_cast<double>(n);
  size_t idx = static_cast<size_t>(std::ceil(target));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  return sorted_or_not[idx - 1];
}

inline double pinball_loss(double q, double y, double f) {
  if (q <= 0.0 || q >= 1.0) throw usage_error("quantile level outside (0,1)");
  double r = y - f;
  return r >= 0.0 ? q * r : (q - 1.0) * r;
}

inline double normal_pdf(double x) {
  return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

inline double normal_quantile(double p) {
  return -1.4142135623730950488 * boost::math::erfc_inv(2.0 * p);
}

// quantile of Gamma(shape, scale)
inline double gamma_quantile(double p, double shape, double scale) {
  return boost::math::gamma_p_inv(shape, p) * scale;
}

inline double digamma(double x) { return boost::math::digamma(x); }

inline double lgamma_fn(double x) { return std::lgamma(x); }

}  // namespace solarcast

#endif  // SOLARCAST_MATH_STATS_HPP_
