#include "btcf/models/gradient_boosting.hpp"

#include <numeric>

#include "btcf/errors.hpp"

namespace btcf {

std::unique_ptr<GradientBoostingModel> fit_gradient_boosting(const Eigen::MatrixXd& X,
                                                             const Eigen::VectorXd& y,
                                                             const GradientBoostingParams& params,
                                                             std::uint64_t seed) {
  if (params.learning_rate <= 0) throw InputError("gradient_boosting: learning_rate must be > 0");
  if (params.n_estimators < 0) throw InputError("gradient_boosting: n_estimators must be >= 0");
  const Eigen::Index n = X.rows();
  if (n < 1) throw InputError("gradient_boosting: empty training set");

  TreeGrowthConfig tree_config;
  tree_config.criterion = params.criterion;
  tree_config.max_depth = params.max_depth;
  tree_config.max_leaf_nodes = params.max_leaf_nodes;
  tree_config.min_samples_leaf = params.min_samples_leaf;

  const double init = y.mean();
  Eigen::VectorXd residual = y.array() - init;
  std::vector<int> samples(n);
  std::iota(samples.begin(), samples.end(), 0);

  std::vector<RegressionTree> stages;
  stages.reserve(params.n_estimators);
  Rng rng(seed);
  for (int m = 0; m < params.n_estimators; ++m) {
    RegressionTree tree = RegressionTree::grow(X, residual, samples, tree_config, rng);
    residual -= params.learning_rate * tree.predict(X);
    stages.push_back(std::move(tree));
  }
  return std::make_unique<GradientBoostingModel>(init, params.learning_rate, std::move(stages));
}

Eigen::VectorXd GradientBoostingModel::predict(const Eigen::MatrixXd& X) const {
  return predict_staged(X, n_stages());
}

Eigen::VectorXd GradientBoostingModel::predict_staged(const Eigen::MatrixXd& X,
                                                      int n_stages) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), init_);
  for (int m = 0; m < n_stages && m < static_cast<int>(stages_.size()); ++m)
    out += learning_rate_ * stages_[m].predict(X);
  return out;
}

nlohmann::json GradientBoostingModel::learned_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : stages_) trees.push_back(t.to_json());
  return {{"init", init_}, {"learning_rate", learning_rate_}, {"stages", trees}};
}

std::unique_ptr<GradientBoostingModel> GradientBoostingModel::from_json(const nlohmann::json& j) {
  std::vector<RegressionTree> stages;
  for (const auto& t : j.at("stages")) stages.push_back(RegressionTree::from_json(t));
  return std::make_unique<GradientBoostingModel>(j.at("init").get<double>(),
                                                 j.at("learning_rate").get<double>(),
                                                 std::move(stages));
}

}  // namespace btcf
