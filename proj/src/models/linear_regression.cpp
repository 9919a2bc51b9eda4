#include "btcf/models/linear_regression.hpp"

namespace btcf {

std::unique_ptr<LinearRegressionModel> fit_linear_regression(const Eigen::MatrixXd& X,
                                                             const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows(), d = X.cols();
  Eigen::MatrixXd design(n, d + 1);
  design.leftCols(d) = X;
  design.col(d).setOnes();
  // Rank-revealing; yields the minimum-norm solution when X is deficient.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  Eigen::VectorXd theta = cod.solve(y);
  return std::make_unique<LinearRegressionModel>(theta.head(d), theta[d]);
}

nlohmann::json LinearRegressionModel::learned_json() const {
  nlohmann::json j;
  j["coef"] = std::vector<double>(coef_.data(), coef_.data() + coef_.size());
  j["intercept"] = intercept_;
  return j;
}

std::unique_ptr<LinearRegressionModel> LinearRegressionModel::from_json(const nlohmann::json& j) {
  const auto coef = j.at("coef").get<std::vector<double>>();
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coef.data(), coef.size());
  return std::make_unique<LinearRegressionModel>(std::move(c), j.at("intercept").get<double>());
}

}  // namespace btcf
