#pragma once

#include <memory>
#include <vector>

#include "btcf/models/model.hpp"
#include "btcf/models/tree.hpp"

namespace btcf {

struct GradientBoostingParams {
  SplitCriterion criterion = SplitCriterion::friedman_mse;
  double learning_rate = 0.1;
  int max_depth = 3;
  int max_leaf_nodes = -1;  // -1: unlimited ("None")
  int min_samples_leaf = 1;
  int n_estimators = 150;
};

class GradientBoostingModel : public Model {
 public:
  GradientBoostingModel(double init, double learning_rate, std::vector<RegressionTree> stages)
      : init_(init), learning_rate_(learning_rate), stages_(std::move(stages)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  nlohmann::json learned_json() const override;
  static std::unique_ptr<GradientBoostingModel> from_json(const nlohmann::json& j);

  /// Prediction truncated to the first `n_stages` trees (stage 0 = mean only).
  Eigen::VectorXd predict_staged(const Eigen::MatrixXd& X, int n_stages) const;
  int n_stages() const { return static_cast<int>(stages_.size()); }

 private:
  double init_;
  double learning_rate_;
  std::vector<RegressionTree> stages_;
};

/// Least-squares boosting: stage 0 predicts mean(y); every later stage fits a
/// depth/leaf-limited tree to the current residuals and is added with the
/// configured shrinkage.
std::unique_ptr<GradientBoostingModel> fit_gradient_boosting(const Eigen::MatrixXd& X,
                                                             const Eigen::VectorXd& y,
                                                             const GradientBoostingParams& params,
                                                             std::uint64_t seed);

}  // namespace btcf
