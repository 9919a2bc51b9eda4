#include "btcf/models/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

constexpr double kTau = 1e-12;

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, SvrKernel kernel, double gamma) {
  Eigen::MatrixXd G = X * X.transpose();
  if (kernel == SvrKernel::linear) return G;
  const Eigen::VectorXd sq = G.diagonal();
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j)
      G(i, j) = std::exp(-gamma * (sq[i] + sq[j] - 2.0 * G(i, j)));
  return G;
}

}  // namespace

double svr_kernel(SvrKernel kernel, double gamma, const Eigen::RowVectorXd& a,
                  const Eigen::RowVectorXd& b) {
  if (kernel == SvrKernel::linear) return a.dot(b);
  return std::exp(-gamma * (a - b).squaredNorm());
}

// The epsilon-insensitive dual is solved over 2l box variables z (alpha for
// p < l, alpha* for p >= l, signs s = +1/-1) with the single constraint
// sum s_p z_p = 0:
//   min 1/2 z'Qz + p'z,  Q_pq = s_p s_q K(a_p, a_q),  p_p = eps - s_p y_p.
// Pair updates follow the classic SMO scheme with second-order working-set
// selection; the stopping rule is the maximal KKT violation m(z) - M(z).
SvrFitResult fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params) {
  if (params.C <= 0) throw InputError("svr: C must be > 0");
  if (params.epsilon < 0) throw InputError("svr: epsilon must be >= 0");
  const Eigen::Index l = X.rows();
  if (l < 1) throw InputError("svr: empty training set");
  if (y.size() != l) throw InputError("svr: X/y length mismatch");

  const double gamma = params.gamma > 0 ? params.gamma : 1.0 / static_cast<double>(X.cols());
  const double C = params.C, eps = params.epsilon;
  const Eigen::MatrixXd K = gram_matrix(X, params.kernel, gamma);
  const Eigen::VectorXd Kd = K.diagonal();

  const Eigen::Index m = 2 * l;
  auto sign_of = [l](Eigen::Index p) { return p < l ? 1.0 : -1.0; };
  auto row_of = [l](Eigen::Index p) { return p < l ? p : p - l; };

  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd grad(m);
  grad.head(l) = Eigen::VectorXd::Constant(l, eps) - y;
  grad.tail(l) = Eigen::VectorXd::Constant(l, eps) + y;

  const std::int64_t max_iter =
      params.max_iter > 0 ? params.max_iter : std::max<std::int64_t>(1000000, 200 * l);

  auto in_up = [&](Eigen::Index p) { return p < l ? z[p] < C : z[p] > 0; };
  auto in_low = [&](Eigen::Index p) { return p < l ? z[p] > 0 : z[p] < C; };

  SvrFitResult result;
  result.converged = false;
  std::int64_t iter = 0;
  for (; iter < max_iter; ++iter) {
    // i: maximal -s*grad over the "can increase along +s" set.
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index p = 0; p < m; ++p) {
      if (!in_up(p)) continue;
      const double v = -sign_of(p) * grad[p];
      if (v > g_max) {
        g_max = v;
        i = p;
      }
    }
    // j: second-order selection among violating candidates in the low set.
    double g_max2 = -std::numeric_limits<double>::infinity();
    double best_score = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    const Eigen::Index ai = i >= 0 ? row_of(i) : 0;
    for (Eigen::Index p = 0; p < m; ++p) {
      if (!in_low(p)) continue;
      const double neg_sg = -sign_of(p) * grad[p];
      g_max2 = std::max(g_max2, -neg_sg);
      if (i < 0 || neg_sg >= g_max) continue;
      const double b = g_max - neg_sg;
      double a = Kd[ai] + Kd[row_of(p)] - 2.0 * sign_of(i) * sign_of(p) * K(ai, row_of(p));
      if (a <= 0) a = kTau;
      const double score = -(b * b) / a;
      if (score < best_score) {
        best_score = score;
        j = p;
      }
    }

    if (i < 0 || j < 0 || g_max + g_max2 < params.tol) {
      result.converged = true;
      break;
    }

    const Eigen::Index aj = row_of(j);
    const double si = sign_of(i), sj = sign_of(j);
    double quad = Kd[ai] + Kd[aj] - 2.0 * si * sj * K(ai, aj);
    if (quad <= 0) quad = kTau;

    double zi_new, zj_new;
    if (si != sj) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = z[i] - z[j];
      zi_new = std::clamp(z[i] + delta, std::max(0.0, diff), std::min(C, C + diff));
      zj_new = zi_new - diff;
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = z[i] + z[j];
      zi_new = std::clamp(z[i] - delta, std::max(0.0, sum - C), std::min(C, sum));
      zj_new = sum - zi_new;
    }
    const double dzi = zi_new - z[i], dzj = zj_new - z[j];
    if (std::abs(dzi) < 1e-16 && std::abs(dzj) < 1e-16) {
      // numerically stuck below the violation tolerance
      break;
    }
    z[i] = zi_new;
    z[j] = zj_new;

    const Eigen::VectorXd step = (si * dzi) * K.col(ai) + (sj * dzj) * K.col(aj);
    grad.head(l) += step;
    grad.tail(l) -= step;
  }
  result.iterations = iter;

  // Canonicalize: shrinking both sides of a pair by their overlap keeps beta
  // and feasibility while strictly lowering the eps term, so it never hurts.
  for (Eigen::Index a = 0; a < l; ++a) {
    const double overlap = std::min(z[a], z[l + a]);
    if (overlap > 0) {
      z[a] -= overlap;
      z[l + a] -= overlap;
    }
  }
  Eigen::VectorXd beta = z.head(l) - z.tail(l);

  // Bias from the free variables; fall back to the midpoint of the violation
  // interval when every variable sits at a bound.
  double bias_sum = 0;
  int bias_count = 0;
  double up_bound = -std::numeric_limits<double>::infinity();
  double low_bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < m; ++p) {
    const double v = -sign_of(p) * grad[p];
    if (in_up(p)) up_bound = std::max(up_bound, v);
    if (in_low(p)) low_bound = std::min(low_bound, v);
    if (z[p] > 0 && z[p] < C) {
      bias_sum += v;
      ++bias_count;
    }
  }
  result.bias = bias_count > 0 ? bias_sum / bias_count : (up_bound + low_bound) / 2.0;

  result.dual_objective =
      0.5 * beta.dot(K * beta) - y.dot(beta) + eps * (z.head(l).sum() + z.tail(l).sum());

  // Keep only the support vectors in the model.
  std::vector<Eigen::Index> support;
  for (Eigen::Index a = 0; a < l; ++a)
    if (beta[a] != 0.0) support.push_back(a);
  Eigen::MatrixXd sv(static_cast<Eigen::Index>(support.size()), X.cols());
  Eigen::VectorXd sv_beta(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    sv.row(static_cast<Eigen::Index>(k)) = X.row(support[k]);
    sv_beta[static_cast<Eigen::Index>(k)] = beta[support[k]];
  }
  result.model = std::make_unique<SvrModel>(std::move(sv), std::move(sv_beta), result.bias,
                                            params.kernel, gamma);
  result.beta = std::move(beta);
  return result;
}

Eigen::VectorXd SvrModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), bias_);
  if (support_.rows() == 0) return out;
  if (kernel_ == SvrKernel::linear) {
    out += X * (support_.transpose() * beta_);
    return out;
  }
  const Eigen::VectorXd sv_sq = support_.rowwise().squaredNorm();
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double x_sq = X.row(r).squaredNorm();
    const Eigen::VectorXd cross = support_ * X.row(r).transpose();
    double acc = 0;
    for (Eigen::Index k = 0; k < support_.rows(); ++k)
      acc += beta_[k] * std::exp(-gamma_ * (sv_sq[k] + x_sq - 2.0 * cross[k]));
    out[r] += acc;
  }
  return out;
}

nlohmann::json SvrModel::learned_json() const {
  nlohmann::json j;
  j["kernel"] = kernel_ == SvrKernel::linear ? "linear" : "rbf";
  j["gamma"] = gamma_;
  j["bias"] = bias_;
  j["beta"] = std::vector<double>(beta_.data(), beta_.data() + beta_.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < support_.rows(); ++r)
    rows.push_back(std::vector<double>(support_.row(r).begin(), support_.row(r).end()));
  j["support"] = rows;
  j["n_features"] = support_.cols();
  return j;
}

std::unique_ptr<SvrModel> SvrModel::from_json(const nlohmann::json& j) {
  const auto beta_vec = j.at("beta").get<std::vector<double>>();
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(beta_vec.data(), beta_vec.size());
  const auto& rows = j.at("support");
  const Eigen::Index d = j.at("n_features").get<Eigen::Index>();
  Eigen::MatrixXd sv(static_cast<Eigen::Index>(rows.size()), d);
  for (Eigen::Index r = 0; r < sv.rows(); ++r) {
    const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
    sv.row(r) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), row.size());
  }
  const SvrKernel kernel =
      j.at("kernel").get<std::string>() == "linear" ? SvrKernel::linear : SvrKernel::rbf;
  return std::make_unique<SvrModel>(std::move(sv), std::move(beta), j.at("bias").get<double>(),
                                    kernel, j.at("gamma").get<double>());
}

}  // namespace btcf
