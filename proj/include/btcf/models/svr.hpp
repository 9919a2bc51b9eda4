#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "btcf/models/model.hpp"

namespace btcf {

enum class SvrKernel { linear, rbf };

struct SvrParams {
  double C = 1.0;
  SvrKernel kernel = SvrKernel::rbf;
  double epsilon = 0.01;     // tube half-width in normalized-target units
  double gamma = 0.0;        // <= 0 means 1/n_features
  double tol = 1e-3;         // max KKT violation at convergence
  std::int64_t max_iter = 0; // <= 0 means automatic cap (reported if hit)
};

class SvrModel : public Model {
 public:
  SvrModel(Eigen::MatrixXd support, Eigen::VectorXd beta, double bias, SvrKernel kernel,
           double gamma)
      : support_(std::move(support)), beta_(std::move(beta)), bias_(bias), kernel_(kernel),
        gamma_(gamma) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  nlohmann::json learned_json() const override;
  static std::unique_ptr<SvrModel> from_json(const nlohmann::json& j);

  Eigen::Index n_support() const { return support_.rows(); }
  double bias() const { return bias_; }

 private:
  Eigen::MatrixXd support_;  // support vectors, one per row
  Eigen::VectorXd beta_;     // alpha - alpha*, nonzero entries only
  double bias_;
  SvrKernel kernel_;
  double gamma_;
};

/// Everything the dual solver knows at termination, kept around so the
/// optimality conditions can be audited against the training set.
struct SvrFitResult {
  std::unique_ptr<SvrModel> model;
  Eigen::VectorXd beta;   // dense, one per training point
  double bias = 0;
  double dual_objective = 0;
  bool converged = true;
  std::int64_t iterations = 0;
};

/// Epsilon-insensitive SVR solved in the dual by SMO-style pairwise updates
/// (maximal-violating-pair selection, full kernel cache). Converges when the
/// largest KKT violation drops below params.tol; if the iteration cap is hit
/// the model is still returned with converged = false.
SvrFitResult fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params);

/// k(a,b) for the configured kernel (rbf: exp(-gamma * |a-b|^2)).
double svr_kernel(SvrKernel kernel, double gamma, const Eigen::RowVectorXd& a,
                  const Eigen::RowVectorXd& b);

}  // namespace btcf
