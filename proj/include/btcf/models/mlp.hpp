#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "btcf/models/model.hpp"

namespace btcf {

struct MlpParams {
  std::vector<int> hidden_layer_sizes{10, 10, 10};
  double learning_rate_init = 0.001;
  int max_iter = 200;           // epochs
  bool early_stopping = true;   // fixed true in the Table-2 vocabulary
  double validation_fraction = 0.1;  // tail split
  int patience = 10;            // epochs without improvement before stopping
  double tol = 1e-4;            // minimum improvement that resets patience
  int batch_size = 32;
};

/// Fully connected network: ReLU hidden layers, identity output, half-MSE
/// loss. Weights use fan-based (Glorot) uniform init from the seed.
class MlpModel : public Model {
 public:
  MlpModel(int n_inputs, const std::vector<int>& hidden_sizes, std::uint64_t seed);

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  nlohmann::json learned_json() const override;
  static std::unique_ptr<MlpModel> from_json(const nlohmann::json& j);

  // Flat parameter access, used by the trainer and by gradient diagnostics.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
  Eigen::Index n_parameters() const;

  /// L = 1/(2m) * sum (f(x_i) - y_i)^2 over the batch.
  double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;
  /// dL/dtheta by backprop, flattened in parameters() order.
  Eigen::VectorXd loss_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;

  const std::vector<int>& layer_sizes() const { return sizes_; }

 private:
  std::vector<int> sizes_;  // input, hidden..., 1
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Adam minibatch training with a 10% tail validation split and patience-based
/// early stopping; restores the best-validation weights. Throws on non-finite
/// loss.
std::unique_ptr<MlpModel> fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const MlpParams& params, std::uint64_t seed);

}  // namespace btcf
