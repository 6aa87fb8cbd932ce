#pragma once

#include <cstdint>
#include <vector>

#include "harbench/features.hpp"

namespace harbench {

struct RfConfig {
  uint64_t seed = 1;
  int n_trees = 100;
  int min_leaf = 1;
  bool bootstrap = true;
  bool class_weights = false;  // inverse-frequency weighting of bootstrap draws
};

struct TreeNode {
  int feature = -1;       // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;         // leaf majority class
};

/// CART ensemble: Gini splits, sqrt(D) features per split, bootstrap
/// sampling, grown to purity (or min_leaf); majority vote prediction.
class RandomForest {
 public:
  void fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           size_t n_classes, const RfConfig& config);

  /// (argmax label, vote fractions).
  std::pair<int, std::vector<double>> predict(const std::vector<double>& v) const;

  size_t n_trees() const { return trees_.size(); }
  size_t n_classes() const { return n_classes_; }
  size_t n_features() const { return n_features_; }
  const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }
  void set_trees(std::vector<std::vector<TreeNode>> t, size_t classes, size_t features);

 private:
  std::vector<std::vector<TreeNode>> trees_;
  size_t n_classes_ = 0;
  size_t n_features_ = 0;
};

}  // namespace harbench
