#include "btcf/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "btcf/errors.hpp"
#include "btcf/rng.hpp"

namespace btcf {

namespace {

/// Forward pass state: pre-activations and activations per layer, columns are
/// samples.
struct Forward {
  std::vector<Eigen::MatrixXd> z;  // one per weight layer
  std::vector<Eigen::MatrixXd> a;  // a[0] = inputs
};

}  // namespace

MlpModel::MlpModel(int n_inputs, const std::vector<int>& hidden_sizes, std::uint64_t seed) {
  if (n_inputs < 1) throw InputError("mlp: need at least one input");
  for (int h : hidden_sizes)
    if (h < 1) throw InputError("mlp: hidden layer widths must be >= 1");
  sizes_.push_back(n_inputs);
  sizes_.insert(sizes_.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes_.push_back(1);

  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    const int fan_in = sizes_[k], fan_out = sizes_[k + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

namespace {

Forward run_forward(const std::vector<Eigen::MatrixXd>& weights,
                    const std::vector<Eigen::VectorXd>& biases, const Eigen::MatrixXd& X) {
  Forward f;
  f.a.push_back(X.transpose());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    Eigen::MatrixXd z = (weights[k] * f.a.back()).colwise() + biases[k];
    if (k + 1 < weights.size())
      f.a.push_back(z.array().max(0.0).matrix());  // ReLU hidden
    else
      f.a.push_back(z);  // identity output
    f.z.push_back(std::move(z));
  }
  return f;
}

}  // namespace

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& X) const {
  const Forward f = run_forward(weights_, biases_, X);
  return f.a.back().row(0).transpose();
}

Eigen::Index MlpModel::n_parameters() const {
  Eigen::Index n = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) n += weights_[k].size() + biases_[k].size();
  return n;
}

Eigen::VectorXd MlpModel::parameters() const {
  Eigen::VectorXd theta(n_parameters());
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    std::copy(weights_[k].data(), weights_[k].data() + weights_[k].size(), theta.data() + at);
    at += weights_[k].size();
    std::copy(biases_[k].data(), biases_[k].data() + biases_[k].size(), theta.data() + at);
    at += biases_[k].size();
  }
  return theta;
}

void MlpModel::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != n_parameters()) throw InputError("mlp: parameter vector size mismatch");
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    std::copy(theta.data() + at, theta.data() + at + weights_[k].size(), weights_[k].data());
    at += weights_[k].size();
    std::copy(theta.data() + at, theta.data() + at + biases_[k].size(), biases_[k].data());
    at += biases_[k].size();
  }
}

double MlpModel::loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
  const Eigen::VectorXd pred = predict(X);
  return (pred - y).squaredNorm() / (2.0 * static_cast<double>(X.rows()));
}

Eigen::VectorXd MlpModel::loss_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
  const Eigen::Index m = X.rows();
  const Forward f = run_forward(weights_, biases_, X);
  const std::size_t layers = weights_.size();

  // delta for the output layer of the half-MSE loss
  Eigen::MatrixXd delta = (f.a.back().row(0).transpose() - y).transpose() / static_cast<double>(m);

  Eigen::VectorXd grad(n_parameters());
  std::vector<Eigen::MatrixXd> grad_w(layers);
  std::vector<Eigen::VectorXd> grad_b(layers);
  for (std::size_t k = layers; k-- > 0;) {
    grad_w[k] = delta * f.a[k].transpose();
    grad_b[k] = delta.rowwise().sum();
    if (k > 0) {
      delta = (weights_[k].transpose() * delta).array() *
              (f.z[k - 1].array() > 0.0).cast<double>();
    }
  }
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < layers; ++k) {
    std::copy(grad_w[k].data(), grad_w[k].data() + grad_w[k].size(), grad.data() + at);
    at += grad_w[k].size();
    std::copy(grad_b[k].data(), grad_b[k].data() + grad_b[k].size(), grad.data() + at);
    at += grad_b[k].size();
  }
  return grad;
}

std::unique_ptr<MlpModel> fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const MlpParams& params, std::uint64_t seed) {
  if (params.max_iter < 1) throw InputError("mlp: max_iter must be >= 1");
  if (params.learning_rate_init <= 0) throw InputError("mlp: learning_rate_init must be > 0");
  const Eigen::Index n = X.rows();
  if (n < 1) throw InputError("mlp: empty training set");

  auto model = std::make_unique<MlpModel>(static_cast<int>(X.cols()), params.hidden_layer_sizes,
                                          seed_mix(seed, 1));

  // Tail validation split for early stopping.
  Eigen::Index n_val = 0;
  if (params.early_stopping) {
    n_val = static_cast<Eigen::Index>(
        std::llround(params.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<Eigen::Index>(n_val, n >= 2 ? 1 : 0, n - 1);
  }
  const Eigen::Index n_train = n - n_val;
  const Eigen::MatrixXd X_train = X.topRows(n_train);
  const Eigen::VectorXd y_train = y.head(n_train);
  const Eigen::MatrixXd X_val = X.bottomRows(n_val);
  const Eigen::VectorXd y_val = y.tail(n_val);

  const Eigen::Index n_params = model->n_parameters();
  Eigen::VectorXd theta = model->parameters();
  Eigen::VectorXd mom = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd vel = Eigen::VectorXd::Zero(n_params);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(seed_mix(seed, 2));

  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = theta;
  int stall = 0;
  const Eigen::Index batch = std::max<Eigen::Index>(1, std::min<Eigen::Index>(params.batch_size,
                                                                              n_train));

  for (int epoch = 0; epoch < params.max_iter; ++epoch) {
    shuffle_rng.shuffle(order);
    for (Eigen::Index start = 0; start < n_train; start += batch) {
      const Eigen::Index size = std::min(batch, n_train - start);
      Eigen::MatrixXd xb(size, X.cols());
      Eigen::VectorXd yb(size);
      for (Eigen::Index i = 0; i < size; ++i) {
        xb.row(i) = X_train.row(order[static_cast<std::size_t>(start + i)]);
        yb[i] = y_train[order[static_cast<std::size_t>(start + i)]];
      }
      const Eigen::VectorXd grad = model->loss_gradient(xb, yb);
      if (!grad.allFinite())
        throw std::runtime_error("mlp: non-finite gradient at epoch " + std::to_string(epoch) +
                                 "; try a smaller learning_rate_init");
      ++step;
      mom = kBeta1 * mom + (1.0 - kBeta1) * grad;
      vel = kBeta2 * vel + (1.0 - kBeta2) * grad.array().square().matrix();
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      theta.array() -= params.learning_rate_init * (mom.array() / bc1) /
                       ((vel.array() / bc2).sqrt() + kEps);
      model->set_parameters(theta);
    }

    if (n_val > 0) {
      const Eigen::VectorXd val_pred = model->predict(X_val);
      const double val_mse = (val_pred - y_val).squaredNorm() / static_cast<double>(n_val);
      if (!std::isfinite(val_mse))
        throw std::runtime_error("mlp: non-finite validation loss at epoch " +
                                 std::to_string(epoch));
      if (val_mse < best_val - params.tol) {
        stall = 0;
      } else {
        ++stall;
      }
      if (val_mse < best_val) {
        best_val = val_mse;
        best_theta = theta;
      }
      if (stall >= params.patience) break;
    }
  }

  if (n_val > 0) model->set_parameters(best_theta);
  return model;
}

nlohmann::json MlpModel::learned_json() const {
  nlohmann::json j;
  j["layer_sizes"] = sizes_;
  nlohmann::json ws = nlohmann::json::array(), bs = nlohmann::json::array();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    ws.push_back(std::vector<double>(weights_[k].data(), weights_[k].data() + weights_[k].size()));
    bs.push_back(std::vector<double>(biases_[k].data(), biases_[k].data() + biases_[k].size()));
  }
  j["weights"] = ws;
  j["biases"] = bs;
  return j;
}

std::unique_ptr<MlpModel> MlpModel::from_json(const nlohmann::json& j) {
  const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (sizes.size() < 2) throw InputError("mlp: bad layer_sizes");
  const std::vector<int> hidden(sizes.begin() + 1, sizes.end() - 1);
  auto model = std::make_unique<MlpModel>(sizes.front(), hidden, 0);
  const auto& ws = j.at("weights");
  const auto& bs = j.at("biases");
  for (std::size_t k = 0; k < model->weights_.size(); ++k) {
    const auto w = ws.at(k).get<std::vector<double>>();
    const auto b = bs.at(k).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != model->weights_[k].size() ||
        static_cast<Eigen::Index>(b.size()) != model->biases_[k].size())
      throw InputError("mlp: weight shape mismatch in model file");
    std::copy(w.begin(), w.end(), model->weights_[k].data());
    std::copy(b.begin(), b.end(), model->biases_[k].data());
  }
  return model;
}

}  // namespace btcf
