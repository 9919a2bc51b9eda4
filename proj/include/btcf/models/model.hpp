#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

namespace btcf {

enum class ModelFamily {
  linear_regression,
  svr,
  random_forest,
  gradient_boosting,
  xgb_variant,
  mlp,
};

std::string to_string(ModelFamily family);
ModelFamily family_from_string(std::string_view name);

/// A grid point: family + hyperparameters (Table-2 vocabulary, JSON-typed so
/// tuples and nulls survive persistence) + the seed that fits it.
struct ModelSpec {
  ModelFamily family = ModelFamily::linear_regression;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
};

/// A fitted regressor. Implementations are immutable after fit; predict is
/// deterministic and safe to call concurrently.
class Model {
 public:
  virtual ~Model() = default;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& X) const = 0;
  virtual nlohmann::json learned_json() const = 0;
};

struct TrainedModel {
  ModelSpec spec;
  std::shared_ptr<const Model> model;
  Eigen::Index n_samples = 0;
  Eigen::Index n_features = 0;
  double fit_seconds = 0;
  bool converged = true;  // false when an iterative solver hit its cap

  /// Width-checked prediction; throws InputError naming expected vs actual.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Fit dispatch over all six families. Unknown hyperparameter names or values
/// outside the family's vocabulary throw InputError.
TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Same, but with the RNG seed overridden (used by per-fold refits).
TrainedModel fit_with_seed(const ModelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y, std::uint64_t seed);

/// Versioned JSON persistence; round-trip preserves predictions bitwise.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace btcf
