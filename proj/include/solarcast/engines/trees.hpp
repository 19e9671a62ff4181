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
#ifndef SOLARCAST_ENGINES_TREES_HPP_
#define SOLARCAST_ENGINES_TREES_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "solarcast/engines/engine.hpp"
#include "solarcast/math/rng.hpp"
#include "solarcast/math/stats.hpp"

namespace solarcast {

// feature < 0 marks a leaf; [begin, end) is the leaf's span in the tree's
// case-index buffer. Routing goes left when x[feature] < threshold.
struct tree_node {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int begin = 0;
  int end = 0;
};

struct grown_tree {
  std::vector<tree_node> nodes;
  std::vector<int> idx;  // training-case indices, partitioned by the leaves
};

inline int tree_leaf_of(const grown_tree& t, const double* xrow) {
  int node = 0;
  while (t.nodes[node].feature >= 0)
    node = xrow[t.nodes[node].feature] < t.nodes[node].threshold
               ? t.nodes[node].left
               : t.nodes[node].right;
  return node;
}

namespace detail {

enum class split_rule { variance, distribution };

// Greedy recursive partitioner shared by QRF and GRF. Split thresholds are
// midpoints between consecutive distinct values; ties on the criterion go to
// the lexicographically smallest predictor name, then the smallest threshold
// (candidates are scanned in that order and only strict improvements win).
class tree_grower {
 public:
  tree_grower(const Eigen::MatrixXd& x, const std::vector<double>& y,
              const std::vector<std::string>& names, split_rule rule,
              int min_leaf, int mtry, std::map<int, double>* importance)
      : x_(x), y_(y), names_(names), rule_(rule), min_leaf_(min_leaf),
        mtry_(mtry), importance_(importance) {}

  grown_tree grow(std::vector<int> bag, rng& gen) {
    grown_tree t;
    t.idx = std::move(bag);
    t.nodes.reserve(2 * t.idx.size() / std::max(min_leaf_, 1) + 1);
    build(t, 0, static_cast<int>(t.idx.size()), gen);
    return t;
  }

 private:
  struct choice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  std::vector<int> sample_features(rng& gen) {
    const int p = static_cast<int>(x_.cols());
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    int m = std::min(mtry_, p);
    for (int k = 0; k < m; ++k)
      std::swap(pool[k], pool[k + static_cast<int>(gen.below(
                                      static_cast<std::uint64_t>(p - k)))]);
    pool.resize(m);
    std::sort(pool.begin(), pool.end(),
              [&](int a, int b) { return names_[a] < names_[b]; });
    return pool;
  }

  choice best_split(const grown_tree& t, int begin, int end, rng& gen) {
    const int n = end - begin;
    choice best;

    std::vector<double> pseudo[3];
    if (rule_ == split_rule::distribution) {
      std::vector<double> node_y(n);
      for (int k = 0; k < n; ++k) node_y[k] = y_[t.idx[begin + k]];
      const double pilots_q[3] = {0.1, 0.5, 0.9};
      double pilot[3];
      for (int g = 0; g < 3; ++g)
        pilot[g] = empirical_quantile(node_y, pilots_q[g]);
      for (int g = 0; g < 3; ++g) {
        pseudo[g].resize(n);
        for (int k = 0; k < n; ++k)
          pseudo[g][k] = node_y[k] > pilot[g] ? 1.0 : 0.0;
      }
    }

    std::vector<std::pair<double, int>> order(n);  // (x value, local pos)
    for (int j : sample_features(gen)) {
      for (int k = 0; k < n; ++k)
        order[k] = {x_(t.idx[begin + k], j), k};
      std::sort(order.begin(), order.end());

      if (rule_ == split_rule::variance) {
        double total = 0.0, total2 = 0.0;
        for (int k = 0; k < n; ++k) {
          double yv = y_[t.idx[begin + order[k].second]];
          total += yv;
          total2 += yv * yv;
        }
        double parent_sse = total2 - total * total / n;
        double sl = 0.0, sl2 = 0.0;
        for (int k = 0; k < n - 1; ++k) {
          double yv = y_[t.idx[begin + order[k].second]];
          sl += yv;
          sl2 += yv * yv;
          int nl = k + 1, nr = n - nl;
          if (nl < min_leaf_ || nr < min_leaf_) continue;
          if (!(order[k].first < order[k + 1].first)) continue;
          double sse_l = sl2 - sl * sl / nl;
          double sr = total - sl, sr2 = total2 - sl2;
          double sse_r = sr2 - sr * sr / nr;
          double gain = parent_sse - sse_l - sse_r;
          if (gain > best.gain + 1e-12 ||
              (best.feature < 0 && gain > 1e-12)) {
            best = {j, (order[k].first + order[k + 1].first) / 2.0, gain};
          }
        }
      } else {
        double tot[3] = {0, 0, 0};
        for (int g = 0; g < 3; ++g)
          for (int k = 0; k < n; ++k) tot[g] += pseudo[g][k];
        double sl[3] = {0, 0, 0};
        for (int k = 0; k < n - 1; ++k) {
          for (int g = 0; g < 3; ++g) sl[g] += pseudo[g][order[k].second];
          int nl = k + 1, nr = n - nl;
          if (nl < min_leaf_ || nr < min_leaf_) continue;
          if (!(order[k].first < order[k + 1].first)) continue;
          double crit = 0.0;
          for (int g = 0; g < 3; ++g) {
            double dm = sl[g] / nl - (tot[g] - sl[g]) / nr;
            crit += static_cast<double>(nl) * nr / n * dm * dm;
          }
          if (crit > best.gain + 1e-12 ||
              (best.feature < 0 && crit > 1e-12)) {
            best = {j, (order[k].first + order[k + 1].first) / 2.0, crit};
          }
        }
      }
    }
    return best;
  }

  void build(grown_tree& t, int begin, int end, rng& gen) {
    int me = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[me].begin = begin;
    t.nodes[me].end = end;
    if (end - begin < 2 * min_leaf_) return;

    choice c = best_split(t, begin, end, gen);
    if (c.feature < 0) return;
    if (importance_) (*importance_)[c.feature] += c.gain;

    auto mid = std::partition(t.idx.begin() + begin, t.idx.begin() + end,
                              [&](int i) { return x_(i, c.feature) < c.threshold; });
    int pos = static_cast<int>(mid - (t.idx.begin() + begin));

    t.nodes[me].feature = c.feature;
    t.nodes[me].threshold = c.threshold;
    t.nodes[me].left = static_cast<int>(t.nodes.size());
    build(t, begin, begin + pos, gen);
    t.nodes[me].right = static_cast<int>(t.nodes.size());
    build(t, begin + pos, end, gen);
  }

  const Eigen::MatrixXd& x_;
  const std::vector<double>& y_;
  const std::vector<std::string>& names_;
  split_rule rule_;
  int min_leaf_;
  int mtry_;
  std::map<int, double>* importance_;
};

}  // namespace detail

// Pools every tree's terminal leaf with per-occurrence weight
// 1/(tree count x leaf size), then reads weighted empirical quantiles
// (smallest pooled value whose cumulative weight reaches q x total).
inline std::vector<double> forest_quantiles(const std::vector<grown_tree>& trees,
                                            const std::vector<double>& train_y,
                                            const double* xrow,
                                            const std::vector<double>& levels) {
  std::vector<double> acc(train_y.size(), 0.0);
  const double tcount = static_cast<double>(trees.size());
  for (const auto& t : trees) {
    const tree_node& leaf = t.nodes[tree_leaf_of(t, xrow)];
    double w = 1.0 / (tcount * static_cast<double>(leaf.end - leaf.begin));
    for (int k = leaf.begin; k < leaf.end; ++k) acc[t.idx[k]] += w;
  }
  std::vector<std::pair<double, double>> pool;
  pool.reserve(acc.size());
  for (size_t i = 0; i < acc.size(); ++i)
    if (acc[i] > 0.0) pool.emplace_back(train_y[i], acc[i]);
  if (pool.empty()) throw internal_error("forest produced an empty pooled leaf set");
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  std::vector<double> cum(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) {
    total += pool[i].second;
    cum[i] = total;
  }
  std::vector<double> out(levels.size());
  for (size_t k = 0; k < levels.size(); ++k) {
    auto it = std::lower_bound(cum.begin(), cum.end(), levels[k] * total);
    if (it == cum.end()) --it;
    out[k] = pool[static_cast<size_t>(it - cum.begin())].first;
  }
  return out;
}

class forest_engine : public quantile_engine {
 public:
  forest_engine(const engine_hyper& hp, bool grf) : hp_(hp), grf_(grf) {}

  std::string name() const override { return grf_ ? "grf" : "qrf"; }
  std::string version() const override { return grf_ ? "grf/1" : "qrf/1"; }
  bool is_stepwise_family() const override { return false; }

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const std::vector<std::string>& names, const std::vector<double>& levels,
           std::uint64_t seed) override {
    names_ = names;
    levels_ = levels;
    train_y_.assign(y.data(), y.data() + y.size());
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    const int trees = grf_ ? hp_.grf_trees : hp_.qrf_trees;
    const int bag_n = std::max(
        1, static_cast<int>(std::floor(hp_.case_fraction * n)));
    const int mtry = std::max(
        1, static_cast<int>(std::floor(hp_.predictor_fraction * p)));

    importance_raw_.clear();
    detail::tree_grower grower(x, train_y_, names,
                               grf_ ? detail::split_rule::distribution
                                    : detail::split_rule::variance,
                               hp_.min_leaf, mtry, &importance_raw_);
    trees_.clear();
    trees_.reserve(trees);
    for (int t = 0; t < trees; ++t) {
      rng gen(substream(seed, "tree", {static_cast<std::uint64_t>(t)}));
      std::vector<int> bag;
      bag.reserve(bag_n);
      if (grf_) {
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        int m = std::min(bag_n, n);
        for (int k = 0; k < m; ++k)
          std::swap(pool[k], pool[k + static_cast<int>(gen.below(
                                          static_cast<std::uint64_t>(n - k)))]);
        bag.assign(pool.begin(), pool.begin() + m);
      } else {
        for (int k = 0; k < bag_n; ++k)
          bag.push_back(static_cast<int>(gen.below(static_cast<std::uint64_t>(n))));
      }
      trees_.push_back(grower.grow(std::move(bag), gen));
    }
    tree_count_fitted_ = trees;
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd out(x.rows(), static_cast<long>(levels_.size()));
    std::vector<double> row(x.cols());
    for (int i = 0; i < x.rows(); ++i) {
      for (int j = 0; j < x.cols(); ++j) row[j] = x(i, j);
      std::vector<double> q = forest_quantiles(trees_, train_y_, row.data(), levels_);
      q = sanitize_quantiles(std::move(q), levels_.size());
      for (size_t k = 0; k < q.size(); ++k) out(i, static_cast<long>(k)) = q[k];
    }
    return out;
  }

  std::map<std::string, double> importance() const override {
    std::map<std::string, double> imp;
    for (const auto& [j, v] : importance_raw_)
      imp[names_[j]] += v / std::max(tree_count_fitted_, 1);
    return imp;
  }

  nlohmann::json save() const override {
    nlohmann::json j;
    j["levels"] = levels_;
    j["names"] = names_;
    j["train_y"] = train_y_;
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& t : trees_) {
      nlohmann::json n;
      std::vector<double> flat;
      flat.reserve(t.nodes.size() * 6);
      for (const auto& nd : t.nodes) {
        flat.push_back(nd.feature);
        flat.push_back(nd.threshold);
        flat.push_back(nd.left);
        flat.push_back(nd.right);
        flat.push_back(nd.begin);
        flat.push_back(nd.end);
      }
      n["nodes"] = flat;
      n["idx"] = t.idx;
      jt.push_back(std::move(n));
    }
    j["trees"] = std::move(jt);
    nlohmann::json ji;
    for (const auto& [k, v] : importance_raw_) ji[std::to_string(k)] = v;
    j["importance_raw"] = ji;
    j["tree_count_fitted"] = tree_count_fitted_;
    return j;
  }

  void load(const nlohmann::json& j) override {
    levels_ = j.at("levels").get<std::vector<double>>();
    names_ = j.at("names").get<std::vector<std::string>>();
    train_y_ = j.at("train_y").get<std::vector<double>>();
    trees_.clear();
    for (const auto& n : j.at("trees")) {
      grown_tree t;
      auto flat = n.at("nodes").get<std::vector<double>>();
      for (size_t k = 0; k + 5 < flat.size(); k += 6) {
        tree_node nd;
        nd.feature = static_cast<int>(flat[k]);
        nd.threshold = flat[k + 1];
        nd.left = static_cast<int>(flat[k + 2]);
        nd.right = static_cast<int>(flat[k + 3]);
        nd.begin = static_cast<int>(flat[k + 4]);
        nd.end = static_cast<int>(flat[k + 5]);
        t.nodes.push_back(nd);
      }
      t.idx = n.at("idx").get<std::vector<int>>();
      trees_.push_back(std::move(t));
    }
    importance_raw_.clear();
    for (const auto& [k, v] : j.at("importance_raw").items())
      importance_raw_[std::stoi(k)] = v.get<double>();
    tree_count_fitted_ = j.at("tree_count_fitted").get<int>();
  }

  const std::vector<grown_tree>& trees() const { return trees_; }
  const std::vector<double>& train_y() const { return train_y_; }

 private:
  engine_hyper hp_;
  bool grf_;
  std::vector<std::string> names_;
  std::vector<double> levels_;
  std::vector<double> train_y_;
  std::vector<grown_tree> trees_;
  std::map<int, double> importance_raw_;
  int tree_count_fitted_ = 0;
};

// Gradient boosting on the pinball loss with depth-1 stumps. Each round fits
// a stump to the negative subgradient (q above the fit, q-1 below, q at
// equality) on a half subsample drawn without replacement; leaf increments
// are the within-leaf empirical level-quantile of the raw residuals scaled
// by the learning rate. Levels are boosted independently and any crossings
// are repaired by the shared sort-and-clamp step.
class gbdt_engine : public quantile_engine {
 public:
  struct stump {
    int feature = -1;  // -1: skipped round (no improving split)
    double threshold = 0.0;
    double left_inc = 0.0;
    double right_inc = 0.0;
  };

  explicit gbdt_engine(const engine_hyper& hp) : hp_(hp) {
    if (hp_.gbdt_depth != 1)
      throw usage_error("boosted trees support depth 1 only");
  }

  std::string name() const override { return "gbdt"; }
  std::string version() const override { return "gbdt/1"; }
  bool is_stepwise_family() const override { return false; }

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const std::vector<std::string>& names, const std::vector<double>& levels,
           std::uint64_t seed) override {
    names_ = names;
    levels_ = levels;
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 10) throw fit_error("boosted fit needs at least 10 cases");
    std::vector<double> ys(y.data(), y.data() + n);

    init_.resize(levels_.size());
    stumps_.assign(levels_.size(), {});
    importance_raw_.clear();

    for (size_t lk = 0; lk < levels_.size(); ++lk) {
      const double q = levels_[lk];
      std::vector<double> f(n, empirical_quantile(ys, q));
      init_[lk] = f[0];
      double checked_loss = mean_pinball_vec(q, ys, f);

      for (int iter = 0; iter < hp_.gbdt_trees; ++iter) {
        rng gen(substream(seed, "gbdt",
                          {static_cast<std::uint64_t>(lk),
                           static_cast<std::uint64_t>(iter)}));
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        int m = std::max(1, n / 2);
        for (int k = 0; k < m; ++k)
          std::swap(pool[k], pool[k + static_cast<int>(gen.below(
                                          static_cast<std::uint64_t>(n - k)))]);
        pool.resize(m);

        std::vector<double> grad(m);
        for (int k = 0; k < m; ++k)
          grad[k] = y[pool[k]] >= f[pool[k]] ? q : q - 1.0;

        stump st = best_stump(x, pool, grad, p);
        if (st.feature >= 0) {
          std::vector<double> res_l, res_r;
          for (int k = 0; k < m; ++k) {
            double r = y[pool[k]] - f[pool[k]];
            if (x(pool[k], st.feature) < st.threshold)
              res_l.push_back(r);
            else
              res_r.push_back(r);
          }
          st.left_inc = hp_.learning_rate *
                        (res_l.empty() ? 0.0 : empirical_quantile(res_l, q));
          st.right_inc = hp_.learning_rate *
                         (res_r.empty() ? 0.0 : empirical_quantile(res_r, q));
          double before = mean_pinball_vec(q, ys, f);
          for (int i = 0; i < n; ++i)
            f[i] += x(i, st.feature) < st.threshold ? st.left_inc : st.right_inc;
          importance_raw_[st.feature] += before - mean_pinball_vec(q, ys, f);
        }
        stumps_[lk].push_back(st);

        if ((iter + 1) % 10 == 0) {
          double now = mean_pinball_vec(q, ys, f);
          if (now > checked_loss + 1e-3)
            throw internal_error("boosted training loss increased");
          checked_loss = now;
        }
      }
    }
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd out(x.rows(), static_cast<long>(levels_.size()));
    for (int i = 0; i < x.rows(); ++i) {
      std::vector<double> row(levels_.size());
      for (size_t lk = 0; lk < levels_.size(); ++lk) {
        double f = init_[lk];
        for (const stump& st : stumps_[lk]) {
          if (st.feature < 0) continue;
          f += x(i, st.feature) < st.threshold ? st.left_inc : st.right_inc;
        }
        row[lk] = f;
      }
      row = sanitize_quantiles(std::move(row), levels_.size());
      for (size_t k = 0; k < row.size(); ++k) out(i, static_cast<long>(k)) = row[k];
    }
    return out;
  }

  std::map<std::string, double> importance() const override {
    std::map<std::string, double> imp;
    double per_fit = static_cast<double>(std::max<size_t>(levels_.size(), 1));
    for (const auto& [j, v] : importance_raw_) imp[names_[j]] += v / per_fit;
    return imp;
  }

  nlohmann::json save() const override {
    nlohmann::json j;
    j["levels"] = levels_;
    j["names"] = names_;
    j["init"] = init_;
    nlohmann::json jl = nlohmann::json::array();
    for (const auto& seq : stumps_) {
      std::vector<double> flat;
      flat.reserve(seq.size() * 4);
      for (const stump& st : seq) {
        flat.push_back(st.feature);
        flat.push_back(st.threshold);
        flat.push_back(st.left_inc);
        flat.push_back(st.right_inc);
      }
      jl.push_back(flat);
    }
    j["stumps"] = std::move(jl);
    nlohmann::json ji;
    for (const auto& [k, v] : importance_raw_) ji[std::to_string(k)] = v;
    j["importance_raw"] = ji;
    return j;
  }

  void load(const nlohmann::json& j) override {
    levels_ = j.at("levels").get<std::vector<double>>();
    names_ = j.at("names").get<std::vector<std::string>>();
    init_ = j.at("init").get<std::vector<double>>();
    stumps_.clear();
    for (const auto& seq : j.at("stumps")) {
      auto flat = seq.get<std::vector<double>>();
      std::vector<stump> s;
      for (size_t k = 0; k + 3 < flat.size(); k += 4)
        s.push_back({static_cast<int>(flat[k]), flat[k + 1], flat[k + 2],
                     flat[k + 3]});
      stumps_.push_back(std::move(s));
    }
    importance_raw_.clear();
    for (const auto& [k, v] : j.at("importance_raw").items())
      importance_raw_[std::stoi(k)] = v.get<double>();
  }

  const std::vector<std::vector<stump>>& stumps() const { return stumps_; }

 private:
  static double mean_pinball_vec(double q, const std::vector<double>& y,
                                 const std::vector<double>& f) {
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) acc += pinball_loss(q, y[i], f[i]);
    return acc / static_cast<double>(y.size());
  }

  stump best_stump(const Eigen::MatrixXd& x, const std::vector<int>& pool,
                   const std::vector<double>& grad, int p) const {
    const int m = static_cast<int>(pool.size());
    stump best;
    double best_gain = 0.0;

    std::vector<int> feats(p);
    std::iota(feats.begin(), feats.end(), 0);
    std::sort(feats.begin(), feats.end(),
              [&](int a, int b) { return names_[a] < names_[b]; });

    double total = 0.0, total2 = 0.0;
    for (double g : grad) {
      total += g;
      total2 += g * g;
    }
    double parent_sse = total2 - total * total / m;

    std::vector<std::pair<double, int>> order(m);
    for (int j : feats) {
      for (int k = 0; k < m; ++k) order[k] = {x(pool[k], j), k};
      std::sort(order.begin(), order.end());
      double sl = 0.0, sl2 = 0.0;
      for (int k = 0; k < m - 1; ++k) {
        double g = grad[order[k].second];
        sl += g;
        sl2 += g * g;
        int nl = k + 1, nr = m - nl;
        if (nl < hp_.min_leaf || nr < hp_.min_leaf) continue;
        if (!(order[k].first < order[k + 1].first)) continue;
        double sse_l = sl2 - sl * sl / nl;
        double sr = total - sl, sr2 = total2 - sl2;
        double sse_r = sr2 - sr * sr / nr;
        double gain = parent_sse - sse_l - sse_r;
        if (gain > best_gain + 1e-12 || (best.feature < 0 && gain > 1e-12)) {
          best.feature = j;
          best.threshold = (order[k].first + order[k + 1].first) / 2.0;
          best_gain = gain;
        }
      }
    }
    return best;
  }

  engine_hyper hp_;
  std::vector<std::string> names_;
  std::vector<double> levels_;
  std::vector<double> init_;
  std::vector<std::vector<stump>> stumps_;
  std::map<int, double> importance_raw_;
};

}  // namespace solarcast

#endif  // SOLARCAST_ENGINES_TREES_HPP_
