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
#include <vector>

#include "solarcast/engines/factory.hpp"
#include "solarcast/math/rng.hpp"

using namespace solarcast;

namespace {

// least absolute deviations by iteratively reweighted least squares, as an
// independent cross-check of the median LP fit
Eigen::VectorXd lad_irls(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
  for (int it = 0; it < 400; ++it) {
    Eigen::ArrayXd r = (y - design * beta).array();
    Eigen::ArrayXd w = 1.0 / r.abs().max(1e-8);
    Eigen::MatrixXd xtwx =
        design.transpose() * (design.array().colwise() * w).matrix();
    Eigen::VectorXd xtwy = design.transpose() * (y.array() * w).matrix();
    Eigen::VectorXd next = xtwx.ldlt().solve(xtwy);
    if ((next - beta).lpNorm<Eigen::Infinity>() < 1e-12) {
      beta = next;
      break;
    }
    beta = next;
  }
  return beta;
}

double coverage(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted) {
  int below = 0;
  for (int i = 0; i < y.size(); ++i)
    if (y[i] <= fitted[i]) ++below;
  return static_cast<double>(below) / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("pinball loss weight rule") {
  REQUIRE(pinball_loss(0.9, 1.0, 0.5) == Catch::Approx(0.45));
  REQUIRE(pinball_loss(0.3, 0.7, 0.7) == 0.0);
  REQUIRE(pinball_loss(0.5, 0.0, 2.0) == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(pinball_loss(0.0, 1.0, 0.5), usage_error);
  REQUIRE_THROWS_AS(pinball_loss(1.0, 1.0, 0.5), usage_error);
}

TEST_CASE("quantile regression collapses on noise-free data") {
  rng g(3);
  const int n = 400;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double x = g.uniform(0.0, 1.0);
    design(i, 0) = 1.0;
    design(i, 1) = x;
    y[i] = 2.0 * x;
  }
  for (double q : {0.1, 0.5, 0.9}) {
    Eigen::VectorXd beta = qr_fit_single(design, y, q);
    REQUIRE(beta[0] == Catch::Approx(0.0).margin(1e-6));
    REQUIRE(beta[1] == Catch::Approx(2.0).margin(1e-6));
  }
}

TEST_CASE("quantile regression recovers analytic conditional quantiles") {
  rng g(substream(4, "qr-uniform"));
  const int n = 10000;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double x = g.uniform(0.0, 1.0);
    design(i, 0) = 1.0;
    design(i, 1) = x;
    y[i] = 2.0 * x + g.u01();
  }
  std::vector<double> ys(y.data(), y.data() + n);
  const double slack = 2.0 / std::sqrt(static_cast<double>(n));
  for (const double q : default_quantile_levels()) {
    Eigen::VectorXd beta = qr_fit_single(design, y, q);
    Eigen::VectorXd fitted = design * beta;
    // conditional q-quantile of y given x is exactly q + 2x
    if (q == 0.1 || q == 0.5 || q == 0.9) {
      REQUIRE(beta[0] == Catch::Approx(q).margin(0.05));
      REQUIRE(beta[1] == Catch::Approx(2.0).margin(0.05));
    }
    // optimality: never worse than the best constant model
    double fit_loss = mean_pinball(y, fitted, q);
    double const_loss =
        mean_pinball(y, Eigen::VectorXd::Constant(n, empirical_quantile(ys, q)), q);
    REQUIRE(fit_loss <= const_loss + 1e-8 * (1.0 + const_loss));
    // training coverage within the sampling band
    REQUIRE(coverage(y, fitted) == Catch::Approx(q).margin(slack));
  }
}

TEST_CASE("median regression agrees with least absolute deviations") {
  rng g(substream(5, "qr-lad"));
  const int n = 2001;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double x = g.uniform(-1.0, 1.0);
    design(i, 0) = 1.0;
    design(i, 1) = x;
    y[i] = 0.5 + 1.5 * x + g.normal(0.0, 0.3);
  }
  Eigen::VectorXd lp = qr_fit_single(design, y, 0.5);
  Eigen::VectorXd irls = lad_irls(design, y);
  REQUIRE(lp[0] == Catch::Approx(irls[0]).margin(5e-3));
  REQUIRE(lp[1] == Catch::Approx(irls[1]).margin(5e-3));
}

TEST_CASE("constant target gives an intercept-only fit at that constant") {
  Eigen::MatrixXd design(5, 2);
  design << 1, 0.1, 1, 0.4, 1, 0.2, 1, 0.9, 1, 0.5;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 0.77);
  Eigen::VectorXd beta = qr_fit_single(design, y, 0.3);
  REQUIRE(beta[0] == 0.77);
  REQUIRE(beta[1] == 0.0);
}

TEST_CASE("noise injection is seeded and calibrated") {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(10000, 3);
  Eigen::MatrixXd a = inject_noise(zero, 42);
  Eigen::MatrixXd b = inject_noise(zero, 42);
  REQUIRE(a == b);
  Eigen::MatrixXd c = inject_noise(zero, 43);
  REQUIRE(a != c);
  for (int j = 0; j < 3; ++j) {
    double m = a.col(j).mean();
    double var = (a.col(j).array() - m).square().sum() / (a.rows() - 1.0);
    REQUIRE(std::abs(m) < 0.002);
    REQUIRE(var == Catch::Approx(0.001).epsilon(0.2));
  }
}

TEST_CASE("qr engine selects the informative predictor and stays calibrated") {
  rng g(substream(6, "qr-engine"));
  const int n = 3000;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = g.uniform(0.0, 1.0);
    x(i, 1) = g.uniform(0.0, 1.0);
    x(i, 2) = g.uniform(0.0, 1.0);
    y[i] = 2.0 * x(i, 0) + g.u01();
  }
  qr_engine eng((engine_hyper()));
  eng.fit(x, y, {"a", "b", "c"}, {0.1, 0.25, 0.5, 0.75, 0.9}, 17);
  bool has_informative = false;
  for (int j : eng.subset()) has_informative |= (j == 0);
  REQUIRE(has_informative);
  Eigen::MatrixXd q = eng.predict(x);
  for (int i = 0; i < q.rows(); ++i)
    for (int k = 1; k < q.cols(); ++k) REQUIRE(q(i, k) >= q(i, k - 1));
  REQUIRE(coverage(y, q.col(2)) == Catch::Approx(0.5).margin(0.04));
}

TEST_CASE("qr engine with zero step budget forecasts one distribution") {
  rng g(7);
  const int n = 300;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = g.uniform(0.0, 1.0);
    x(i, 1) = g.uniform(0.0, 1.0);
    y[i] = 0.5 + 0.2 * g.normal();
  }
  engine_hyper hp;
  hp.steps_quantile = 0;
  qr_engine eng(hp);
  eng.fit(x, y, {"a", "b"}, {0.25, 0.5, 0.75}, 17);
  REQUIRE(eng.subset().empty());
  Eigen::MatrixXd q = eng.predict(x.topRows(4));
  REQUIRE(q.row(0) == q.row(1));
  REQUIRE(q.row(2) == q.row(3));
}

TEST_CASE("qr predictions are sanitized") {
  // craft a model whose raw output crosses and dips negative
  qr_engine eng((engine_hyper()));
  nlohmann::json j;
  j["levels"] = std::vector<double>{0.25, 0.5, 0.75};
  j["names"] = std::vector<std::string>{"a"};
  j["subset"] = std::vector<int>{0};
  j["coef"] = std::vector<std::vector<double>>{{0.5, 0.0}, {0.3, 0.0}, {-0.1, 0.0}};
  eng.load(j);
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  Eigen::MatrixXd q = eng.predict(x);
  REQUIRE(q(0, 0) == 0.0);
  REQUIRE(q(0, 1) == Catch::Approx(0.3));
  REQUIRE(q(0, 2) == Catch::Approx(0.5));
}

TEST_CASE("qr engine save load and determinism") {
  rng g(8);
  const int n = 500;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = g.uniform(0.0, 1.0);
    x(i, 1) = g.uniform(0.0, 1.0);
    y[i] = x(i, 0) + 0.3 * g.u01();
  }
  auto a = make_engine("qr", engine_hyper{});
  auto b = make_engine("qr", engine_hyper{});
  a->fit(x, y, {"a", "b"}, {0.1, 0.5, 0.9}, 99);
  b->fit(x, y, {"a", "b"}, {0.1, 0.5, 0.9}, 99);
  REQUIRE(a->save().dump() == b->save().dump());
  auto fresh = make_engine("qr", engine_hyper{});
  fresh->load(a->save());
  REQUIRE(fresh->predict(x.topRows(10)) == a->predict(x.topRows(10)));
  REQUIRE(a->name() == "qr");
  REQUIRE(a->is_stepwise_family());
}

TEST_CASE("monotone net output is structurally non-decreasing in level") {
  rng g(11);
  const int p = 3, hidden = mcqrnn_engine::hidden_for(p);
  const int np = mcqrnn_engine::param_count(hidden, p);
  for (int rep = 0; rep < 1000; ++rep) {
    Eigen::VectorXd theta(np);
    for (int i = 0; i < np; ++i) theta[i] = g.normal(0.0, 1.0);
    double xr[3] = {g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-2, 2)};
    double t1 = g.uniform(0.02, 0.5), t2 = g.uniform(0.5, 0.98);
    double f1 = mcqrnn_engine::forward(theta, hidden, p, xr, t1);
    double f2 = mcqrnn_engine::forward(theta, hidden, p, xr, t2);
    REQUIRE(f2 >= f1);
  }
}

TEST_CASE("zeroed level path collapses the net to one quantile") {
  const int p = 2, hidden = mcqrnn_engine::hidden_for(p);
  const int np = mcqrnn_engine::param_count(hidden, p);
  rng g(12);
  Eigen::VectorXd theta(np);
  for (int i = 0; i < np; ++i) theta[i] = g.normal(0.0, 0.5);
  for (int h = 0; h < hidden; ++h) theta[hidden * p + h] = -50.0;  // log level weight
  double xr[2] = {0.3, -0.7};
  double lo = mcqrnn_engine::forward(theta, hidden, p, xr, 0.02);
  double hi = mcqrnn_engine::forward(theta, hidden, p, xr, 0.98);
  REQUIRE(hi - lo < 1e-10);
}

TEST_CASE("monotone net learns a constant target exactly") {
  rng g(13);
  const int n = 200;
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = g.uniform(0.0, 1.0);
    x(i, 1) = g.uniform(0.0, 1.0);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 0.8);
  auto eng = make_engine("mcqrnn", engine_hyper{});
  eng->fit(x, y, {"a", "b"}, {0.1, 0.5, 0.9}, 5);
  Eigen::MatrixXd q = eng->predict(x.topRows(5));
  REQUIRE((q.array() == 0.8).all());
}

TEST_CASE("monotone net tracks a linear signal") {
  rng g(substream(14, "mcqrnn-linear"));
  const int n = 1200;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = g.uniform(0.0, 1.0);
    x(i, 1) = g.uniform(0.0, 1.0);
    y[i] = 0.4 + 0.5 * x(i, 0) + g.normal(0.0, 0.08);
  }
  engine_hyper hp;
  auto eng = make_engine("mcqrnn", hp);
  eng->fit(x, y, {"a", "b"}, {0.1, 0.25, 0.5, 0.75, 0.9}, 21);
  Eigen::MatrixXd probe(2, 2);
  probe << 0.2, 0.5, 0.8, 0.5;
  Eigen::MatrixXd q = eng->predict(probe);
  // median near the conditional mean at both probes
  REQUIRE(q(0, 2) == Catch::Approx(0.5).margin(0.1));
  REQUIRE(q(1, 2) == Catch::Approx(0.8).margin(0.1));
  // rows non-decreasing across levels
  for (int i = 0; i < q.rows(); ++i)
    for (int k = 1; k < q.cols(); ++k) REQUIRE(q(i, k) >= q(i, k - 1));
  // interval brackets the noise spread
  REQUIRE(q(0, 4) - q(0, 0) > 0.05);
  REQUIRE(q(0, 4) - q(0, 0) < 0.6);
}

TEST_CASE("monotone net train twice same seed gives identical weights") {
  rng g(15);
  const int n = 300;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = g.uniform(0.0, 1.0);
    x(i, 1) = g.uniform(0.0, 1.0);
    y[i] = x(i, 0) + 0.1 * g.normal();
  }
  auto a = make_engine("mcqrnn", engine_hyper{});
  auto b = make_engine("mcqrnn", engine_hyper{});
  a->fit(x, y, {"a", "b"}, {0.25, 0.5, 0.75}, 123);
  b->fit(x, y, {"a", "b"}, {0.25, 0.5, 0.75}, 123);
  REQUIRE(a->save().dump() == b->save().dump());
  auto fresh = make_engine("mcqrnn", engine_hyper{});
  fresh->load(a->save());
  REQUIRE(fresh->predict(x.topRows(10)) == a->predict(x.topRows(10)));
  REQUIRE(fresh->name() == "mcqrnn");
  REQUIRE(fresh->version() == "mcqrnn/1");
}
