#include "btcf/models/model.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "btcf/errors.hpp"
#include "btcf/models/gradient_boosting.hpp"
#include "btcf/models/linear_regression.hpp"
#include "btcf/models/mlp.hpp"
#include "btcf/models/random_forest.hpp"
#include "btcf/models/svr.hpp"
#include "btcf/models/xgb.hpp"

namespace btcf {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::linear_regression: return "linear_regression";
    case ModelFamily::svr: return "svr";
    case ModelFamily::random_forest: return "random_forest";
    case ModelFamily::gradient_boosting: return "gradient_boosting";
    case ModelFamily::xgb_variant: return "xgb_variant";
    case ModelFamily::mlp: return "mlp";
  }
  return "?";
}

ModelFamily family_from_string(std::string_view name) {
  if (name == "linear_regression") return ModelFamily::linear_regression;
  if (name == "svr") return ModelFamily::svr;
  if (name == "random_forest") return ModelFamily::random_forest;
  if (name == "gradient_boosting") return ModelFamily::gradient_boosting;
  if (name == "xgb_variant") return ModelFamily::xgb_variant;
  if (name == "mlp") return ModelFamily::mlp;
  throw InputError("unknown model family: " + std::string(name));
}

namespace {

/// Pulls typed values out of the hyperparameter object and rejects keys the
/// family does not declare.
class ParamReader {
 public:
  ParamReader(const nlohmann::json& params, std::string family) : params_(params),
                                                                  family_(std::move(family)) {
    if (!params_.is_object()) throw InputError(family_ + ": hyperparameters must be an object");
  }

  double number(const char* key, double fallback) {
    mark(key);
    if (!params_.contains(key)) return fallback;
    const auto& v = params_.at(key);
    if (!v.is_number()) throw InputError(family_ + ": " + key + " must be a number");
    return v.get<double>();
  }

  int integer(const char* key, int fallback) {
    mark(key);
    if (!params_.contains(key)) return fallback;
    const auto& v = params_.at(key);
    if (!v.is_number_integer()) throw InputError(family_ + ": " + key + " must be an integer");
    return v.get<int>();
  }

  /// Integer with a null ("None") alternative mapped to -1.
  int integer_or_none(const char* key, int fallback) {
    mark(key);
    if (!params_.contains(key)) return fallback;
    const auto& v = params_.at(key);
    if (v.is_null()) return -1;
    if (!v.is_number_integer()) throw InputError(family_ + ": " + key + " must be int or null");
    return v.get<int>();
  }

  std::string text(const char* key, const std::string& fallback) {
    mark(key);
    if (!params_.contains(key)) return fallback;
    const auto& v = params_.at(key);
    if (!v.is_string()) throw InputError(family_ + ": " + key + " must be a string");
    return v.get<std::string>();
  }

  std::vector<int> int_list(const char* key, const std::vector<int>& fallback) {
    mark(key);
    if (!params_.contains(key)) return fallback;
    const auto& v = params_.at(key);
    if (!v.is_array()) throw InputError(family_ + ": " + key + " must be a list");
    return v.get<std::vector<int>>();
  }

  bool boolean(const char* key, bool fallback) {
    mark(key);
    if (!params_.contains(key)) return fallback;
    const auto& v = params_.at(key);
    if (!v.is_boolean()) throw InputError(family_ + ": " + key + " must be a boolean");
    return v.get<bool>();
  }

  /// Call after reading everything; any unread key is outside the vocabulary.
  void finish() const {
    for (const auto& [key, value] : params_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw InputError(family_ + ": unknown hyperparameter '" + key + "'");
  }

 private:
  void mark(const char* key) { seen_.emplace_back(key); }
  const nlohmann::json& params_;
  std::string family_;
  std::vector<std::string> seen_;
};

std::shared_ptr<const Model> fit_dispatch(const ModelSpec& spec, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y, std::uint64_t seed,
                                          bool& converged) {
  converged = true;
  switch (spec.family) {
    case ModelFamily::linear_regression: {
      ParamReader reader(spec.params, "linear_regression");
      reader.finish();
      return fit_linear_regression(X, y);
    }
    case ModelFamily::svr: {
      ParamReader reader(spec.params, "svr");
      SvrParams p;
      p.C = reader.number("C", p.C);
      const std::string kernel = reader.text("kernel", "rbf");
      if (kernel != "linear" && kernel != "rbf")
        throw InputError("svr: kernel must be 'linear' or 'rbf'");
      p.kernel = kernel == "linear" ? SvrKernel::linear : SvrKernel::rbf;
      p.epsilon = reader.number("epsilon", p.epsilon);
      p.gamma = reader.number("gamma", p.gamma);
      p.tol = reader.number("tol", p.tol);
      p.max_iter = reader.integer("max_iter", 0);
      reader.finish();
      SvrFitResult fit = fit_svr(X, y, p);
      converged = fit.converged;
      return std::move(fit.model);
    }
    case ModelFamily::random_forest: {
      ParamReader reader(spec.params, "random_forest");
      RandomForestParams p;
      p.criterion = criterion_from_string(reader.text("criterion", "squared_error"));
      if (p.criterion == SplitCriterion::friedman_mse)
        throw InputError("random_forest: criterion must be squared_error or poisson");
      p.n_estimators = reader.integer("n_estimators", p.n_estimators);
      p.max_leaf_nodes = reader.integer_or_none("max_leaf_nodes", p.max_leaf_nodes);
      p.min_samples_leaf = reader.integer("min_samples_leaf", p.min_samples_leaf);
      p.bootstrap = reader.boolean("bootstrap", true);
      reader.finish();
      return fit_random_forest(X, y, p, seed);
    }
    case ModelFamily::gradient_boosting: {
      ParamReader reader(spec.params, "gradient_boosting");
      GradientBoostingParams p;
      p.criterion = criterion_from_string(reader.text("criterion", "friedman_mse"));
      p.learning_rate = reader.number("learning_rate", p.learning_rate);
      p.max_depth = reader.integer_or_none("max_depth", p.max_depth);
      p.max_leaf_nodes = reader.integer_or_none("max_leaf_nodes", p.max_leaf_nodes);
      p.min_samples_leaf = reader.integer("min_samples_leaf", p.min_samples_leaf);
      p.n_estimators = reader.integer("n_estimators", p.n_estimators);
      reader.finish();
      return fit_gradient_boosting(X, y, p, seed);
    }
    case ModelFamily::xgb_variant: {
      ParamReader reader(spec.params, "xgb_variant");
      XgbParams p;
      p.booster = booster_from_string(reader.text("booster", "gbtree"));
      p.lambda = reader.number("lambda", p.lambda);
      p.max_delta_step = reader.number("max_delta_step", p.max_delta_step);
      p.rounds = reader.integer("rounds", p.rounds);
      p.learning_rate = reader.number("learning_rate", p.learning_rate);
      p.max_depth = reader.integer("max_depth", p.max_depth);
      p.dart_drop_rate = reader.number("dart_drop_rate", p.dart_drop_rate);
      reader.finish();
      return fit_xgb_variant(X, y, p, seed);
    }
    case ModelFamily::mlp: {
      ParamReader reader(spec.params, "mlp");
      MlpParams p;
      p.hidden_layer_sizes = reader.int_list("hidden_layer_sizes", p.hidden_layer_sizes);
      p.learning_rate_init = reader.number("learning_rate_init", p.learning_rate_init);
      p.max_iter = reader.integer("max_iter", p.max_iter);
      p.early_stopping = reader.boolean("early_stopping", true);
      p.batch_size = reader.integer("batch_size", p.batch_size);
      reader.finish();
      return fit_mlp(X, y, p, seed);
    }
  }
  throw InputError("unknown model family");
}

}  // namespace

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features)
    throw InputError("predict: expected " + std::to_string(n_features) + " features, got " +
                     std::to_string(X.cols()));
  return model->predict(X);
}

TrainedModel fit_with_seed(const ModelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y, std::uint64_t seed) {
  if (X.rows() != y.size()) throw InputError("fit: X/y row mismatch");
  TrainedModel out;
  out.spec = spec;
  out.n_samples = X.rows();
  out.n_features = X.cols();
  const auto start = std::chrono::steady_clock::now();
  out.model = fit_dispatch(spec, X, y, seed, out.converged);
  out.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return fit_with_seed(spec, X, y, spec.seed);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["family"] = to_string(model.spec.family);
  j["hyperparameters"] = model.spec.params;
  j["seed"] = model.spec.seed;
  j["n_samples"] = model.n_samples;
  j["n_features"] = model.n_features;
  j["fit_seconds"] = model.fit_seconds;
  j["converged"] = model.converged;
  j["learned"] = model.model->learned_json();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("model file " + path.string() + ": " + e.what());
  }
  if (j.value("format_version", 0) != 1)
    throw InputError("model file " + path.string() + ": unsupported format_version");

  TrainedModel out;
  out.spec.family = family_from_string(j.at("family").get<std::string>());
  out.spec.params = j.at("hyperparameters");
  out.spec.seed = j.at("seed").get<std::uint64_t>();
  out.n_samples = j.at("n_samples").get<Eigen::Index>();
  out.n_features = j.at("n_features").get<Eigen::Index>();
  out.fit_seconds = j.value("fit_seconds", 0.0);
  out.converged = j.value("converged", true);
  const auto& learned = j.at("learned");
  switch (out.spec.family) {
    case ModelFamily::linear_regression:
      out.model = LinearRegressionModel::from_json(learned);
      break;
    case ModelFamily::svr:
      out.model = SvrModel::from_json(learned);
      break;
    case ModelFamily::random_forest:
      out.model = RandomForestModel::from_json(learned);
      break;
    case ModelFamily::gradient_boosting:
      out.model = GradientBoostingModel::from_json(learned);
      break;
    case ModelFamily::xgb_variant:
      out.model = XgbModel::from_json(learned);
      break;
    case ModelFamily::mlp:
      out.model = MlpModel::from_json(learned);
      break;
  }
  return out;
}

}  // namespace btcf
