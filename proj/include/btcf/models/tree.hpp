#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include <json.hpp>

#include "btcf/rng.hpp"

namespace btcf {

enum class SplitCriterion { squared_error, friedman_mse, poisson };

std::string to_string(SplitCriterion c);
SplitCriterion criterion_from_string(std::string_view name);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1, right = -1;
  double value = 0;  // leaf prediction (mean of leaf targets)
};

struct TreeGrowthConfig {
  SplitCriterion criterion = SplitCriterion::squared_error;
  int max_depth = -1;       // -1: unlimited
  int max_leaf_nodes = -1;  // -1: unlimited (depth-first growth)
  int min_samples_leaf = 1;
  int max_features = -1;    // features drawn per split; -1: all
};

/// A CART regression tree. Splits are chosen by exhaustive threshold search
/// under the configured criterion; ties go to the first candidate in feature
/// then threshold order. With max_leaf_nodes set, leaves are expanded
/// best-first by impurity improvement; otherwise growth is depth-first.
class RegressionTree {
 public:
  static RegressionTree grow(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::span<const int> samples, const TreeGrowthConfig& config,
                             Rng& rng);

  /// Wrap pre-built nodes (used by boosters with their own split criteria).
  static RegressionTree from_nodes(std::vector<TreeNode> nodes);

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  int leaf_count() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);

 private:
  std::vector<TreeNode> nodes_;  // nodes_[0] is the root
};

}  // namespace btcf
