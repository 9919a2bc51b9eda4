#pragma once

#include <memory>
#include <vector>

#include "btcf/models/model.hpp"
#include "btcf/models/tree.hpp"

namespace btcf {

enum class XgbBooster { gbtree, gblinear, dart };

std::string to_string(XgbBooster b);
XgbBooster booster_from_string(std::string_view name);

struct XgbParams {
  XgbBooster booster = XgbBooster::gbtree;
  double lambda = 1.0;          // L2 on leaf weights (trees) / coefficients (linear)
  double max_delta_step = 0.0;  // 0: no clamp on leaf weights
  int rounds = 100;
  double learning_rate = 0.3;
  int max_depth = 6;            // tree boosters
  double dart_drop_rate = 0.1;  // per-tree dropout probability per round
  double base_score = 0.5;
};

/// Second-order boosting for squared loss (g = yhat - y, h = 1).
/// gbtree: leaf weight -G/(H+lambda) (|w| clamped by max_delta_step when set),
/// split gain 0.5*[GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)], splits with
/// nonpositive gain rejected. dart adds seeded uniform tree dropout with the
/// dropped-tree rescaling (new tree scaled 1/(k+1), dropped by k/(k+1)).
/// gblinear is cyclic coordinate descent on an L2-regularized linear model.
class XgbModel : public Model {
 public:
  // tree boosters
  XgbModel(XgbBooster booster, double base_score, std::vector<RegressionTree> trees,
           std::vector<double> tree_weights)
      : booster_(booster), base_score_(base_score), trees_(std::move(trees)),
        tree_weights_(std::move(tree_weights)) {}
  // gblinear
  XgbModel(double base_score, Eigen::VectorXd coef, double bias)
      : booster_(XgbBooster::gblinear), base_score_(base_score), coef_(std::move(coef)),
        bias_(bias) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  nlohmann::json learned_json() const override;
  static std::unique_ptr<XgbModel> from_json(const nlohmann::json& j);

  const std::vector<RegressionTree>& trees() const { return trees_; }
  const std::vector<double>& tree_weights() const { return tree_weights_; }

 private:
  XgbBooster booster_;
  double base_score_;
  std::vector<RegressionTree> trees_;
  std::vector<double> tree_weights_;
  Eigen::VectorXd coef_;
  double bias_ = 0;
};

std::unique_ptr<XgbModel> fit_xgb_variant(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const XgbParams& params, std::uint64_t seed);

/// Closed-form leaf weight -sum_g/(sum_h + lambda) with the max_delta_step
/// clamp; exposed because it pins the solver's leaf arithmetic.
double xgb_leaf_weight(double sum_grad, double sum_hess, double lambda, double max_delta_step);

/// Split gain for the stated second-order formula (gamma = 0).
double xgb_split_gain(double g_left, double h_left, double g_right, double h_right, double lambda);

}  // namespace btcf
