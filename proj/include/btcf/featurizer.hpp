#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "btcf/market_data.hpp"

namespace btcf {

/// Lagged design matrix. One sample per target day i, features drawn from the
/// `window` preceding rows (default 3: i-3, i-2, i-1), target = close of day i.
/// X and y are raw out of build_samples and in [0,1] after transform().
struct FeatureMatrix {
  Eigen::MatrixXd X;  // n_samples x n_features
  Eigen::VectorXd y;  // close of the target day
  std::vector<Date> sample_dates;         // target day per sample, strictly increasing
  std::vector<std::string> feature_names; // e.g. "close[t-1]", "rsi_6[t-3]"

  Eigen::Index n_samples() const { return X.rows(); }
  Eigen::Index n_features() const { return X.cols(); }

  /// Row-slice [begin, end) of the samples.
  FeatureMatrix slice(Eigen::Index begin, Eigen::Index end) const;
};

/// Min-max ranges per feature plus the target close range, fitted on training
/// rows only so the test range never leaks into scaling.
struct Normalizer {
  Eigen::VectorXd feature_min, feature_max;
  double target_min = 0, target_max = 0;

  double transform_target(double price) const;
  /// Map a normalized prediction back to USD.
  double inverse_target(double value) const;
};

/// Expected number of features for a dataset with `n_columns` data columns.
inline Eigen::Index feature_count(Eigen::Index n_columns, int window = 3) {
  return n_columns * window;
}

/// Build the lagged sample matrix from an indicator-attached dataset.
/// Requires the canonical column schema; throws InputError if columns are
/// missing/reordered or too few usable rows exist.
FeatureMatrix build_samples(const AlignedDataset& dataset, int window = 3);

/// Per-feature min/max over sample rows [train_begin, train_end) only.
Normalizer fit_normalizer(const FeatureMatrix& raw, Eigen::Index train_begin,
                          Eigen::Index train_end);

/// Apply min-max scaling: (x - min)/(max - min), constant features -> 0,
/// out-of-range values clamped to [0,1]. y is scaled by the target range.
FeatureMatrix transform(const FeatureMatrix& raw, const Normalizer& normalizer);

double inverse_transform_target(double value, const Normalizer& normalizer);

/// Dump a feature matrix as CSV (feature_names header) for inspection.
void save_features_csv(const FeatureMatrix& features, const std::filesystem::path& path);

}  // namespace btcf
