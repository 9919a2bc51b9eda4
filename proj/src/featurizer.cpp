#include "btcf/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "btcf/errors.hpp"
#include "btcf/indicators.hpp"

namespace btcf {

FeatureMatrix FeatureMatrix::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > n_samples() || begin > end)
    throw InputError("feature slice out of range");
  FeatureMatrix out;
  out.X = X.middleRows(begin, end - begin);
  out.y = y.segment(begin, end - begin);
  out.sample_dates.assign(sample_dates.begin() + begin, sample_dates.begin() + end);
  out.feature_names = feature_names;
  return out;
}

double Normalizer::transform_target(double price) const {
  if (target_max == target_min) return 0.0;
  return std::clamp((price - target_min) / (target_max - target_min), 0.0, 1.0);
}

double Normalizer::inverse_target(double value) const {
  return value * (target_max - target_min) + target_min;
}

FeatureMatrix build_samples(const AlignedDataset& dataset, int window) {
  if (window < 1) throw InputError("build_samples: window must be >= 1");

  // Schema check: the canonical base + indicator layout, in order.
  const IndicatorConfig default_config;
  std::vector<std::string> expected = {"open", "high", "low", "close", "volume", "fng"};
  for (const auto& name : default_config.column_names()) expected.push_back(name);
  if (dataset.columns != expected)
    throw InputError(
        "build_samples: dataset columns do not match the canonical schema "
        "(run attach_indicators first; column order is fixed)");

  const Eigen::Index n = dataset.rows(), d = dataset.cols();
  const Eigen::Index first_usable = dataset.first_complete_row();
  const Eigen::Index first_target = first_usable + window;
  if (first_target >= n)
    throw InputError("build_samples: need at least " + std::to_string(first_target + 1) +
                     " rows (warmup " + std::to_string(first_usable) + " + window " +
                     std::to_string(window) + " + 1), got " + std::to_string(n));

  const Eigen::Index close_col = dataset.column_index("close");
  const Eigen::Index n_samples = n - first_target;

  FeatureMatrix out;
  out.X.resize(n_samples, d * window);
  out.y.resize(n_samples);
  out.sample_dates.reserve(n_samples);
  for (int lag = window; lag >= 1; --lag)
    for (Eigen::Index c = 0; c < d; ++c)
      out.feature_names.push_back(dataset.columns[c] + "[t-" + std::to_string(lag) + "]");

  for (Eigen::Index s = 0; s < n_samples; ++s) {
    const Eigen::Index target = first_target + s;
    for (int lag = window; lag >= 1; --lag)
      out.X.block(s, (window - lag) * d, 1, d) = dataset.values.row(target - lag);
    out.y[s] = dataset.values(target, close_col);
    out.sample_dates.push_back(dataset.dates[target]);
  }
  return out;
}

Normalizer fit_normalizer(const FeatureMatrix& raw, Eigen::Index train_begin,
                          Eigen::Index train_end) {
  if (train_begin < 0 || train_end > raw.n_samples() || train_begin >= train_end)
    throw InputError("fit_normalizer: empty or invalid training row range");
  Normalizer norm;
  const auto block = raw.X.middleRows(train_begin, train_end - train_begin);
  norm.feature_min = block.colwise().minCoeff();
  norm.feature_max = block.colwise().maxCoeff();
  const auto targets = raw.y.segment(train_begin, train_end - train_begin);
  norm.target_min = targets.minCoeff();
  norm.target_max = targets.maxCoeff();
  return norm;
}

FeatureMatrix transform(const FeatureMatrix& raw, const Normalizer& normalizer) {
  if (normalizer.feature_min.size() != raw.n_features())
    throw InputError("transform: normalizer fitted for a different feature width");
  FeatureMatrix out = raw;
  for (Eigen::Index j = 0; j < raw.n_features(); ++j) {
    const double lo = normalizer.feature_min[j], hi = normalizer.feature_max[j];
    const double span = hi - lo;
    for (Eigen::Index i = 0; i < raw.n_samples(); ++i)
      out.X(i, j) = span == 0.0 ? 0.0 : std::clamp((raw.X(i, j) - lo) / span, 0.0, 1.0);
  }
  for (Eigen::Index i = 0; i < raw.n_samples(); ++i)
    out.y[i] = normalizer.transform_target(raw.y[i]);
  return out;
}

double inverse_transform_target(double value, const Normalizer& normalizer) {
  return normalizer.inverse_target(value);
}

void save_features_csv(const FeatureMatrix& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "date";
  for (const auto& name : features.feature_names) out << ',' << name;
  out << ",target\n";
  char buf[40];
  for (Eigen::Index i = 0; i < features.n_samples(); ++i) {
    out << features.sample_dates[static_cast<std::size_t>(i)].iso();
    for (Eigen::Index j = 0; j < features.n_features(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", features.X(i, j));
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", features.y[i]);
    out << ',' << buf << '\n';
  }
}

}  // namespace btcf
