#include "btcf/models/xgb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btcf/errors.hpp"

namespace btcf {

std::string to_string(XgbBooster b) {
  switch (b) {
    case XgbBooster::gbtree: return "gbtree";
    case XgbBooster::gblinear: return "gblinear";
    case XgbBooster::dart: return "dart";
  }
  return "?";
}

XgbBooster booster_from_string(std::string_view name) {
  if (name == "gbtree") return XgbBooster::gbtree;
  if (name == "gblinear") return XgbBooster::gblinear;
  if (name == "dart") return XgbBooster::dart;
  throw InputError("unknown booster: " + std::string(name));
}

double xgb_leaf_weight(double sum_grad, double sum_hess, double lambda, double max_delta_step) {
  double w = -sum_grad / (sum_hess + lambda);
  if (max_delta_step > 0) w = std::clamp(w, -max_delta_step, max_delta_step);
  return w;
}

double xgb_split_gain(double g_left, double h_left, double g_right, double h_right,
                      double lambda) {
  const double g = g_left + g_right, h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g * g / (h + lambda));
}

namespace {

/// Depth-wise exact greedy tree on second-order stats. Leaves carry the
/// regularized weight, not a target mean.
class XgbTreeBuilder {
 public:
  XgbTreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad, const XgbParams& params)
      : X_(X), grad_(grad), params_(params) {}

  std::vector<TreeNode> build() {
    index_.resize(X_.rows());
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.clear();
    grow(0, static_cast<int>(index_.size()), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
  };

  int grow(int lo, int hi, int depth) {
    double g = 0;
    for (int k = lo; k < hi; ++k) g += grad_[index_[k]];
    const double h = static_cast<double>(hi - lo);  // unit hessians, squared loss

    TreeNode leaf;
    leaf.value = xgb_leaf_weight(g, h, params_.lambda, params_.max_delta_step);
    nodes_.push_back(leaf);
    const int id = static_cast<int>(nodes_.size()) - 1;
    if (depth >= params_.max_depth || hi - lo < 2) return id;

    const Split split = find_split(lo, hi, g, h);
    if (split.feature < 0) return id;

    auto mid_it = std::stable_partition(index_.begin() + lo, index_.begin() + hi, [&](int row) {
      return X_(row, split.feature) <= split.threshold;
    });
    const int mid = static_cast<int>(mid_it - index_.begin());
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int left = grow(lo, mid, depth + 1);
    const int right = grow(mid, hi, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  Split find_split(int lo, int hi, double g_total, double h_total) {
    Split best;
    const int n = hi - lo;
    std::vector<std::pair<double, double>>& xg = scratch_;
    xg.resize(n);
    for (int f = 0; f < static_cast<int>(X_.cols()); ++f) {
      for (int k = 0; k < n; ++k) {
        const int row = index_[lo + k];
        xg[k] = {X_(row, f), grad_[row]};
      }
      std::sort(xg.begin(), xg.end());
      if (xg.front().first == xg.back().first) continue;
      double g_left = 0;
      for (int k = 0; k < n - 1; ++k) {
        g_left += xg[k].second;
        if (xg[k].first == xg[k + 1].first) continue;
        const double h_left = k + 1;
        const double gain = xgb_split_gain(g_left, h_left, g_total - g_left, h_total - h_left,
                                           params_.lambda);
        if (gain > 0 && gain > best.gain)
          best = {f, (xg[k].first + xg[k + 1].first) / 2.0, gain};
      }
    }
    return best;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& grad_;
  const XgbParams& params_;
  std::vector<int> index_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, double>> scratch_;
};

std::unique_ptr<XgbModel> fit_tree_booster(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           const XgbParams& params, std::uint64_t seed) {
  const bool dart = params.booster == XgbBooster::dart;
  const Eigen::Index n = X.rows();
  Rng rng(seed);

  std::vector<RegressionTree> trees;
  std::vector<double> weights;
  Eigen::MatrixXd tree_pred(n, params.rounds);  // cached per-tree training outputs
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(n, params.base_score);

  std::vector<int> dropped;
  for (int round = 0; round < params.rounds; ++round) {
    Eigen::VectorXd yhat_used = yhat;
    dropped.clear();
    if (dart) {
      for (int t = 0; t < round; ++t)
        if (rng.uniform() < params.dart_drop_rate) dropped.push_back(t);
      for (int t : dropped) yhat_used -= weights[t] * tree_pred.col(t);
    }

    const Eigen::VectorXd grad = yhat_used - y;
    RegressionTree tree = RegressionTree::from_nodes(XgbTreeBuilder(X, grad, params).build());
    tree_pred.col(round) = tree.predict(X);

    if (dropped.empty()) {
      weights.push_back(params.learning_rate);
      yhat += params.learning_rate * tree_pred.col(round);
    } else {
      // Dropped-tree rescaling: the new tree stands in for the average dropped
      // tree, and the dropped trees shrink to keep the ensemble total stable.
      const double k = static_cast<double>(dropped.size());
      const double new_weight = params.learning_rate / (k + 1.0);
      for (int t : dropped) {
        const double delta = weights[t] / (k + 1.0);
        weights[t] -= delta;
        yhat -= delta * tree_pred.col(t);
      }
      weights.push_back(new_weight);
      yhat += new_weight * tree_pred.col(round);
    }
    trees.push_back(std::move(tree));
  }
  return std::make_unique<XgbModel>(params.booster, params.base_score, std::move(trees),
                                    std::move(weights));
}

std::unique_ptr<XgbModel> fit_linear_booster(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                             const XgbParams& params) {
  const Eigen::Index n = X.rows(), d = X.cols();
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(d);
  double bias = 0;
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(n, params.base_score);
  const Eigen::VectorXd col_sq = X.array().square().colwise().sum();

  for (int round = 0; round < params.rounds; ++round) {
    // Bias first (unregularized), then cyclic coordinate steps on each weight.
    const double delta_bias = -(yhat - y).mean();
    bias += params.learning_rate * delta_bias;
    yhat.array() += params.learning_rate * delta_bias;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double grad_j = X.col(j).dot(yhat - y) + params.lambda * coef[j];
      const double delta = -grad_j / (col_sq[j] + params.lambda);
      coef[j] += params.learning_rate * delta;
      yhat += params.learning_rate * delta * X.col(j);
    }
  }
  return std::make_unique<XgbModel>(params.base_score, std::move(coef), bias);
}

}  // namespace

std::unique_ptr<XgbModel> fit_xgb_variant(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const XgbParams& params, std::uint64_t seed) {
  if (params.lambda < 0) throw InputError("xgb_variant: lambda must be >= 0");
  if (params.max_delta_step < 0) throw InputError("xgb_variant: max_delta_step must be >= 0");
  if (params.rounds < 0) throw InputError("xgb_variant: rounds must be >= 0");
  if (X.rows() < 1) throw InputError("xgb_variant: empty training set");
  if (params.booster == XgbBooster::gblinear) return fit_linear_booster(X, y, params);
  return fit_tree_booster(X, y, params, seed);
}

Eigen::VectorXd XgbModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base_score_);
  if (booster_ == XgbBooster::gblinear) {
    out += X * coef_;
    out.array() += bias_;
    return out;
  }
  for (std::size_t t = 0; t < trees_.size(); ++t) out += tree_weights_[t] * trees_[t].predict(X);
  return out;
}

nlohmann::json XgbModel::learned_json() const {
  nlohmann::json j;
  j["booster"] = to_string(booster_);
  j["base_score"] = base_score_;
  if (booster_ == XgbBooster::gblinear) {
    j["coef"] = std::vector<double>(coef_.data(), coef_.data() + coef_.size());
    j["bias"] = bias_;
  } else {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    j["trees"] = trees;
    j["tree_weights"] = tree_weights_;
  }
  return j;
}

std::unique_ptr<XgbModel> XgbModel::from_json(const nlohmann::json& j) {
  const XgbBooster booster = booster_from_string(j.at("booster").get<std::string>());
  const double base = j.at("base_score").get<double>();
  if (booster == XgbBooster::gblinear) {
    const auto coef = j.at("coef").get<std::vector<double>>();
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coef.data(), coef.size());
    return std::make_unique<XgbModel>(base, std::move(c), j.at("bias").get<double>());
  }
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(RegressionTree::from_json(t));
  return std::make_unique<XgbModel>(booster, base, std::move(trees),
                                    j.at("tree_weights").get<std::vector<double>>());
}

}  // namespace btcf
