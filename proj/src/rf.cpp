#include "harbench/rf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "harbench/rng.hpp"
#include "harbench/util.hpp"

namespace harbench {

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<int>& y;
  size_t n_classes;
  size_t n_features;
  size_t mtry;  // features examined per split
  int min_leaf;
  std::mt19937_64& gen;
  std::vector<TreeNode> nodes;

  int majority(const std::vector<size_t>& idx) const {
    std::vector<size_t> counts(n_classes, 0);
    for (size_t i : idx) counts[static_cast<size_t>(y[i])]++;
    size_t best = 0;
    for (size_t k = 1; k < n_classes; ++k) {
      if (counts[k] > counts[best]) best = k;
    }
    return static_cast<int>(best);
  }

  bool pure(const std::vector<size_t>& idx) const {
    for (size_t i = 1; i < idx.size(); ++i) {
      if (y[idx[i]] != y[idx[0]]) return false;
    }
    return true;
  }

  static double gini(const std::vector<size_t>& counts, size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (size_t c : counts) {
      double p = static_cast<double>(c) / static_cast<double>(total);
      g -= p * p;
    }
    return g;
  }

  // best (feature, threshold) over a seeded sqrt-subset; returns false when
  // no split separates the node
  bool best_split(const std::vector<size_t>& idx, int& out_feature, double& out_threshold) {
    std::vector<size_t> features(n_features);
    std::iota(features.begin(), features.end(), 0);
    shuffle_deterministic(features, gen);
    features.resize(mtry);

    double best_score = std::numeric_limits<double>::infinity();
    bool found = false;
    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (size_t f : features) {
      vals.clear();
      for (size_t i : idx) vals.emplace_back(x[i][f], y[i]);
      std::sort(vals.begin(), vals.end());
      if (vals.front().first == vals.back().first) continue;

      std::vector<size_t> left_counts(n_classes, 0), right_counts(n_classes, 0);
      for (const auto& [v, label] : vals) right_counts[static_cast<size_t>(label)]++;
      size_t n_left = 0, n_right = vals.size();
      for (size_t i = 0; i + 1 < vals.size(); ++i) {
        left_counts[static_cast<size_t>(vals[i].second)]++;
        right_counts[static_cast<size_t>(vals[i].second)]--;
        ++n_left;
        --n_right;
        if (vals[i].first == vals[i + 1].first) continue;
        if (n_left < static_cast<size_t>(min_leaf) || n_right < static_cast<size_t>(min_leaf)) {
          continue;
        }
        double score = (static_cast<double>(n_left) * gini(left_counts, n_left) +
                        static_cast<double>(n_right) * gini(right_counts, n_right)) /
                       static_cast<double>(vals.size());
        if (score < best_score - 1e-15) {
          best_score = score;
          out_feature = static_cast<int>(f);
          out_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
          found = true;
        }
      }
    }
    return found;
  }

  int build(const std::vector<size_t>& idx) {
    int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (pure(idx) || idx.size() <= static_cast<size_t>(min_leaf)) {
      nodes[node_id].label = majority(idx);
      return node_id;
    }
    int feature = -1;
    double threshold = 0.0;
    if (!best_split(idx, feature, threshold)) {
      nodes[node_id].label = majority(idx);
      return node_id;
    }
    std::vector<size_t> left, right;
    for (size_t i : idx) {
      (x[i][static_cast<size_t>(feature)] <= threshold ? left : right).push_back(i);
    }
    nodes[node_id].feature = feature;
    nodes[node_id].threshold = threshold;
    int l = build(left);
    int r = build(right);
    nodes[node_id].left = l;
    nodes[node_id].right = r;
    return node_id;
  }
};

int tree_predict(const std::vector<TreeNode>& nodes, const std::vector<double>& v) {
  int cur = 0;
  while (nodes[static_cast<size_t>(cur)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<size_t>(cur)];
    cur = v[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(cur)].label;
}

}  // namespace

void RandomForest::fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       size_t n_classes, const RfConfig& config) {
  if (x.empty() || x.size() != y.size()) fail("rf: bad training set");
  if (config.n_trees < 1) fail("rf: n_trees must be positive");
  {
    std::vector<size_t> counts(n_classes, 0);
    for (int label : y) counts[static_cast<size_t>(label)]++;
    size_t present = 0;
    for (size_t c : counts) present += c > 0 ? 1 : 0;
    if (present < 2) fail("rf: training set has a single class");
  }
  n_classes_ = n_classes;
  n_features_ = x.front().size();
  size_t mtry = std::max<size_t>(
      1, static_cast<size_t>(std::llround(std::sqrt(static_cast<double>(n_features_)))));

  // inverse-frequency draw weights (uniform when disabled)
  std::vector<double> cumulative;
  if (config.class_weights) {
    std::vector<size_t> counts(n_classes, 0);
    for (int label : y) counts[static_cast<size_t>(label)]++;
    cumulative.resize(x.size());
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      acc += 1.0 / static_cast<double>(counts[static_cast<size_t>(y[i])]);
      cumulative[i] = acc;
    }
    for (double& v : cumulative) v /= acc;
  }

  trees_.clear();
  trees_.reserve(static_cast<size_t>(config.n_trees));
  for (int t = 0; t < config.n_trees; ++t) {
    std::mt19937_64 gen(seed_for(config.seed, "rf-tree-" + std::to_string(t)));
    std::vector<size_t> idx(x.size());
    if (config.bootstrap) {
      for (size_t i = 0; i < x.size(); ++i) {
        if (cumulative.empty()) {
          idx[i] = uniform_index(gen, x.size());
        } else {
          double u = uniform01(gen);
          idx[i] = static_cast<size_t>(
              std::lower_bound(cumulative.begin(), cumulative.end(), u) -
              cumulative.begin());
          if (idx[i] >= x.size()) idx[i] = x.size() - 1;
        }
      }
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeBuilder builder{x, y, n_classes, n_features_, mtry, config.min_leaf, gen, {}};
    builder.build(idx);
    trees_.push_back(std::move(builder.nodes));
  }
}

std::pair<int, std::vector<double>> RandomForest::predict(const std::vector<double>& v) const {
  if (trees_.empty()) fail("rf: model not trained");
  if (v.size() != n_features_) {
    fail("rf: input dimension " + std::to_string(v.size()) + " does not match model (" +
         std::to_string(n_features_) + ")");
  }
  std::vector<double> votes(n_classes_, 0.0);
  for (const auto& tree : trees_) {
    votes[static_cast<size_t>(tree_predict(tree, v))] += 1.0;
  }
  for (double& x : votes) x /= static_cast<double>(trees_.size());
  size_t best = 0;
  for (size_t k = 1; k < votes.size(); ++k) {
    if (votes[k] > votes[best]) best = k;
  }
  return {static_cast<int>(best), votes};
}

void RandomForest::set_trees(std::vector<std::vector<TreeNode>> t, size_t classes,
                             size_t features) {
  trees_ = std::move(t);
  n_classes_ = classes;
  n_features_ = features;
}

}  // namespace harbench
