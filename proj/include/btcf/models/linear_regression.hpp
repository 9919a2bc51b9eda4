#pragma once

#include <Eigen/Dense>
#include <memory>

#include "btcf/models/model.hpp"

namespace btcf {

class LinearRegressionModel : public Model {
 public:
  LinearRegressionModel(Eigen::VectorXd coef, double intercept)
      : coef_(std::move(coef)), intercept_(intercept) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override {
    return (X * coef_).array() + intercept_;
  }
  nlohmann::json learned_json() const override;
  static std::unique_ptr<LinearRegressionModel> from_json(const nlohmann::json& j);

  const Eigen::VectorXd& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }

 private:
  Eigen::VectorXd coef_;
  double intercept_;
};

/// Ordinary least squares with intercept, solved via a rank-revealing
/// orthogonal decomposition; rank-deficient systems get the minimum-norm fit.
std::unique_ptr<LinearRegressionModel> fit_linear_regression(const Eigen::MatrixXd& X,
                                                             const Eigen::VectorXd& y);

}  // namespace btcf
