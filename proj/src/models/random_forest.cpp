#include "btcf/models/random_forest.hpp"

#include <cmath>
#include <numeric>

#include "btcf/errors.hpp"

namespace btcf {

std::unique_ptr<RandomForestModel> fit_random_forest(const Eigen::MatrixXd& X,
                                                     const Eigen::VectorXd& y,
                                                     const RandomForestParams& params,
                                                     std::uint64_t seed) {
  if (params.n_estimators < 1) throw InputError("random_forest: n_estimators must be >= 1");
  const Eigen::Index n = X.rows();
  if (n < 1) throw InputError("random_forest: empty training set");
  if (params.criterion == SplitCriterion::poisson && (y.array() < 0).any())
    throw InputError("random_forest: poisson criterion requires nonnegative targets");

  TreeGrowthConfig tree_config;
  tree_config.criterion = params.criterion;
  tree_config.max_leaf_nodes = params.max_leaf_nodes;
  tree_config.min_samples_leaf = params.min_samples_leaf;
  tree_config.max_features = static_cast<int>(std::ceil(static_cast<double>(X.cols()) / 3.0));

  std::vector<RegressionTree> trees;
  trees.reserve(params.n_estimators);
  std::vector<int> samples(n);
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng rng(seed_mix(seed, static_cast<std::uint64_t>(t)));
    if (params.bootstrap) {
      for (Eigen::Index i = 0; i < n; ++i)
        samples[i] = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    trees.push_back(RegressionTree::grow(X, y, samples, tree_config, rng));
  }
  return std::make_unique<RandomForestModel>(std::move(trees));
}

Eigen::VectorXd RandomForestModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
  for (const auto& tree : trees_) sum += tree.predict(X);
  return sum / static_cast<double>(trees_.size());
}

nlohmann::json RandomForestModel::learned_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"trees", trees}};
}

std::unique_ptr<RandomForestModel> RandomForestModel::from_json(const nlohmann::json& j) {
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(RegressionTree::from_json(t));
  return std::make_unique<RandomForestModel>(std::move(trees));
}

}  // namespace btcf
