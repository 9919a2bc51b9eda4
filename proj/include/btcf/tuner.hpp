#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "btcf/featurizer.hpp"
#include "btcf/models/model.hpp"

namespace btcf {

/// One expanding-window fold over sample indices: train [0, train_end),
/// validate [val_begin, val_end) with val_begin == train_end.
struct CvFold {
  Eigen::Index train_end = 0;
  Eigen::Index val_begin = 0;
  Eigen::Index val_end = 0;
};

struct CvPlan {
  Eigen::Index n_samples = 0;
  std::vector<CvFold> folds;
};

/// Partition n samples into n_splits+1 near-equal contiguous blocks (remainder
/// to the earliest blocks); fold k trains on blocks 0..k and validates on
/// block k+1. Throws when n < n_splits + 1.
CvPlan make_cv_plan(Eigen::Index n_samples, int n_splits = 3);

/// The Table-2 grid for a family, in deterministic order (axes in table
/// order, values in listed order, last axis fastest).
std::vector<ModelSpec> expand_grid(ModelFamily family);

struct CandidateScore {
  ModelSpec spec;
  int grid_index = 0;             // position in expand_grid order
  std::vector<double> fold_mse;   // one per fold
  double mean_mse = 0;            // NaN when failed
  bool failed = false;
  std::string error;
};

struct TuneResult {
  ModelFamily family = ModelFamily::linear_regression;
  std::vector<CandidateScore> table;  // ascending mean_mse; failed candidates last
  int failed_count = 0;

  /// Lowest-MSE candidate (ties resolved by grid order during the sort).
  const CandidateScore& best() const;
};

/// Mean of squared differences. Lengths must match and be >= 1.
double mse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

/// Grid search scored by expanding-window CV on the *raw* training samples.
/// Every fold refits the min-max normalizer on its own training rows before
/// fitting the candidate, so later rows never leak into scaling. Candidates
/// whose fit throws are excluded and counted. Evaluations may run on
/// `n_threads` workers (0 = hardware concurrency); the result is identical
/// either way.
TuneResult tune(ModelFamily family, const FeatureMatrix& raw_train, const CvPlan& plan,
                std::uint64_t seed, int n_threads = 0);

/// Persistence in both shapes named by the external interface.
void save_tune_result_json(const TuneResult& result, const std::filesystem::path& path);
void save_tune_result_csv(const TuneResult& result, const std::filesystem::path& path);
TuneResult load_tune_result_json(const std::filesystem::path& path);

}  // namespace btcf
