#include "btcf/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "btcf/errors.hpp"
#include "btcf/rng.hpp"

namespace btcf {

CvPlan make_cv_plan(Eigen::Index n_samples, int n_splits) {
  if (n_splits < 1) throw InputError("cv plan: n_splits must be >= 1");
  if (n_samples < n_splits + 1)
    throw InputError("cv plan: need at least " + std::to_string(n_splits + 1) + " samples, got " +
                     std::to_string(n_samples));
  const int blocks = n_splits + 1;
  const Eigen::Index base = n_samples / blocks;
  const Eigen::Index remainder = n_samples % blocks;

  CvPlan plan;
  plan.n_samples = n_samples;
  std::vector<Eigen::Index> bounds{0};  // block boundaries, remainder to the earliest blocks
  for (int b = 0; b < blocks; ++b) bounds.push_back(bounds.back() + base + (b < remainder ? 1 : 0));
  for (int k = 0; k < n_splits; ++k)
    plan.folds.push_back({bounds[static_cast<std::size_t>(k) + 1],
                          bounds[static_cast<std::size_t>(k) + 1],
                          bounds[static_cast<std::size_t>(k) + 2]});
  return plan;
}

namespace {

/// Odometer over named axes, last axis fastest — the Table-2 row order.
std::vector<nlohmann::json> cartesian(
    const std::vector<std::pair<std::string, std::vector<nlohmann::json>>>& axes) {
  std::vector<nlohmann::json> out{nlohmann::json::object()};
  for (const auto& [name, values] : axes) {
    std::vector<nlohmann::json> next;
    next.reserve(out.size() * values.size());
    for (const auto& partial : out)
      for (const auto& v : values) {
        nlohmann::json p = partial;
        p[name] = v;
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<ModelSpec> expand_grid(ModelFamily family) {
  using J = nlohmann::json;
  std::vector<std::pair<std::string, std::vector<J>>> axes;
  switch (family) {
    case ModelFamily::mlp:
      axes = {{"max_iter", {250, 500, 1000}},
              {"learning_rate_init", {0.01, 0.001}},
              {"hidden_layer_sizes",
               {J::array({10, 10, 10}), J::array({25, 25, 25}), J::array({50, 50, 50}),
                J::array({10, 10, 10, 10, 10}), J::array({25, 25, 25, 25, 25}),
                J::array({50, 50, 50, 50, 50})}}};
      break;
    case ModelFamily::xgb_variant:
      axes = {{"booster", {"gbtree", "gblinear", "dart"}},
              {"max_delta_step", {0, 1, 5}},
              {"lambda", {1, 3, 5, 10, 50, 100}}};
      break;
    case ModelFamily::gradient_boosting:
      axes = {{"criterion", {"friedman_mse"}},
              {"n_estimators", {150}},
              {"learning_rate", {0.001, 0.01, 0.1}},
              {"max_depth", {3, 5, 10}},
              {"max_leaf_nodes", {5, 10, 35, nullptr}},
              {"min_samples_leaf", {1, 3, 5}}};
      break;
    case ModelFamily::random_forest:
      axes = {{"criterion", {"squared_error", "poisson"}},
              {"n_estimators", {150}},
              {"max_leaf_nodes", {5, 10, 35, nullptr}},
              {"min_samples_leaf", {1, 3, 5}}};
      break;
    case ModelFamily::svr:
      axes = {{"C", {0.001, 0.01, 0.1, 1.0}}, {"kernel", {"linear", "rbf"}}};
      break;
    case ModelFamily::linear_regression:
      axes = {};
      break;
  }
  std::vector<ModelSpec> specs;
  for (auto& params : cartesian(axes)) {
    ModelSpec spec;
    spec.family = family;
    spec.params = std::move(params);
    specs.push_back(std::move(spec));
  }
  return specs;
}

double mse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() == 0)
    throw InputError("mse: length mismatch or empty input");
  return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
}

const CandidateScore& TuneResult::best() const {
  if (table.empty() || table.front().failed)
    throw InputError("tune result for " + to_string(family) + " has no successful candidate");
  return table.front();
}

namespace {

CandidateScore evaluate_candidate(const ModelSpec& spec, int grid_index,
                                  const FeatureMatrix& raw, const CvPlan& plan) {
  CandidateScore score;
  score.spec = spec;
  score.grid_index = grid_index;
  try {
    double total = 0;
    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
      const CvFold& fold = plan.folds[k];
      const Normalizer norm = fit_normalizer(raw, 0, fold.train_end);
      const FeatureMatrix scaled = transform(raw, norm);
      const TrainedModel model =
          fit_with_seed(spec, scaled.X.topRows(fold.train_end), scaled.y.head(fold.train_end),
                        seed_mix(spec.seed, k + 1));
      const Eigen::Index n_val = fold.val_end - fold.val_begin;
      const Eigen::VectorXd pred = model.predict(scaled.X.middleRows(fold.val_begin, n_val));
      const double fold_mse = mse(scaled.y.segment(fold.val_begin, n_val), pred);
      score.fold_mse.push_back(fold_mse);
      total += fold_mse;
    }
    score.mean_mse = total / static_cast<double>(plan.folds.size());
  } catch (const std::exception& e) {
    score.failed = true;
    score.error = e.what();
    score.mean_mse = std::numeric_limits<double>::quiet_NaN();
  }
  return score;
}

}  // namespace

TuneResult tune(ModelFamily family, const FeatureMatrix& raw_train, const CvPlan& plan,
                std::uint64_t seed, int n_threads) {
  if (plan.n_samples != raw_train.n_samples())
    throw InputError("tune: cv plan was built for a different sample count");

  std::vector<ModelSpec> specs = expand_grid(family);
  for (std::size_t c = 0; c < specs.size(); ++c)
    specs[c].seed = seed_mix(seed, static_cast<std::uint64_t>(family), c);

  std::vector<CandidateScore> scores(specs.size());
  const int workers = n_threads > 0
                          ? n_threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1 || specs.size() <= 1) {
    for (std::size_t c = 0; c < specs.size(); ++c)
      scores[c] = evaluate_candidate(specs[c], static_cast<int>(c), raw_train, plan);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t c = next.fetch_add(1);
        if (c >= specs.size()) return;
        scores[c] = evaluate_candidate(specs[c], static_cast<int>(c), raw_train, plan);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(specs.size())); ++w)
      pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  TuneResult result;
  result.family = family;
  result.table = std::move(scores);
  for (const auto& s : result.table) result.failed_count += s.failed ? 1 : 0;
  // Stable sort keeps grid order among ties; failed candidates sink to the end.
  std::stable_sort(result.table.begin(), result.table.end(),
                   [](const CandidateScore& a, const CandidateScore& b) {
                     if (a.failed != b.failed) return !a.failed;
                     if (a.failed) return false;
                     return a.mean_mse < b.mean_mse;
                   });
  return result;
}

namespace {

nlohmann::json candidate_json(const CandidateScore& s, int rank) {
  nlohmann::json j;
  j["rank"] = rank;
  j["grid_index"] = s.grid_index;
  j["params"] = s.spec.params;
  j["seed"] = s.spec.seed;
  j["fold_mse"] = s.fold_mse;
  if (s.failed) {
    j["failed"] = true;
    j["error"] = s.error;
  } else {
    j["mean_mse"] = s.mean_mse;
  }
  return j;
}

}  // namespace

void save_tune_result_json(const TuneResult& result, const std::filesystem::path& path) {
  nlohmann::json j;
  j["family"] = to_string(result.family);
  j["failed_count"] = result.failed_count;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < result.table.size(); ++i)
    table.push_back(candidate_json(result.table[i], static_cast<int>(i) + 1));
  j["table"] = table;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_tune_result_csv(const TuneResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "rank,family,params,mean_mse,fold_mse,failed\n";
  char buf[40];
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& s = result.table[i];
    out << (i + 1) << ',' << to_string(result.family) << ",\"" << s.spec.params.dump() << "\",";
    if (s.failed) {
      out << ",,";
      out << "1\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", s.mean_mse);
    out << buf << ",\"";
    for (std::size_t k = 0; k < s.fold_mse.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.fold_mse[k]);
      out << (k ? ";" : "") << buf;
    }
    out << "\",0\n";
  }
}

TuneResult load_tune_result_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("tune result " + path.string() + ": " + e.what());
  }
  TuneResult result;
  result.family = family_from_string(j.at("family").get<std::string>());
  result.failed_count = j.value("failed_count", 0);
  for (const auto& e : j.at("table")) {
    CandidateScore s;
    s.spec.family = result.family;
    s.spec.params = e.at("params");
    s.spec.seed = e.at("seed").get<std::uint64_t>();
    s.grid_index = e.value("grid_index", 0);
    s.fold_mse = e.value("fold_mse", std::vector<double>{});
    s.failed = e.value("failed", false);
    s.mean_mse = s.failed ? std::numeric_limits<double>::quiet_NaN()
                          : e.at("mean_mse").get<double>();
    if (s.failed) s.error = e.value("error", "");
    result.table.push_back(std::move(s));
  }
  return result;
}

}  // namespace btcf
