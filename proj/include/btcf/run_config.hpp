#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "btcf/date.hpp"

namespace btcf {

/// Everything a pipeline run needs, resolved from defaults, an optional JSON
/// config file, and CLI overrides (flag > file > default).
struct RunConfig {
  std::string ohlcv_path;
  std::string fng_path;
  std::string dataset_path;  // persisted AlignedDataset CSV
  std::string out_dir = "out";

  std::string train_start = "2018-02-01";
  std::string train_end = "2022-05-31";
  std::string test_start = "2022-06-01";
  std::string test_end = "2022-12-31";

  std::vector<std::string> families{"linear_regression", "svr",         "random_forest",
                                    "gradient_boosting", "xgb_variant", "mlp"};
  std::uint64_t seed = 42;
  double initial_capital = 200000.0;
  double fees = 0.0;
  int cv_splits = 3;
  int threads = 0;  // 0: hardware concurrency
  std::string fng_url = "https://api.alternative.me/fng/";

  Date train_start_date() const;
  Date train_end_date() const;
  Date test_start_date() const;
  Date test_end_date() const;
  /// Enforces date ordering (train end < test start, starts before ends).
  void validate() const;
};

/// Defaults overlaid by `file_config` overlaid by `overrides`; unknown keys
/// throw InputError.
RunConfig resolve_config(const nlohmann::json& file_config, const nlohmann::json& overrides);

RunConfig load_run_config(const std::string& config_path, const nlohmann::json& overrides);

}  // namespace btcf
