#pragma once

#include <memory>
#include <vector>

#include "btcf/models/model.hpp"
#include "btcf/models/tree.hpp"

namespace btcf {

struct RandomForestParams {
  SplitCriterion criterion = SplitCriterion::squared_error;  // squared_error | poisson
  int n_estimators = 150;
  int max_leaf_nodes = -1;  // -1: unlimited ("None")
  int min_samples_leaf = 1;
  bool bootstrap = true;  // test hook; production fits always bootstrap
};

class RandomForestModel : public Model {
 public:
  explicit RandomForestModel(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  nlohmann::json learned_json() const override;
  static std::unique_ptr<RandomForestModel> from_json(const nlohmann::json& j);

  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

/// Bagged CART forest: one seeded bootstrap sample per tree, ceil(d/3) features
/// drawn per split, prediction = mean over trees. The poisson criterion
/// requires nonnegative targets and throws otherwise.
std::unique_ptr<RandomForestModel> fit_random_forest(const Eigen::MatrixXd& X,
                                                     const Eigen::VectorXd& y,
                                                     const RandomForestParams& params,
                                                     std::uint64_t seed);

}  // namespace btcf
