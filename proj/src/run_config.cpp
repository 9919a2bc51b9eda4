#include "btcf/run_config.hpp"

#include <fstream>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

Date parse_date_field(const std::string& text, const char* field) {
  auto d = Date::parse_iso(text);
  if (!d) throw InputError(std::string(field) + ": bad date '" + text + "' (want YYYY-MM-DD)");
  return *d;
}

void apply(RunConfig& config, const nlohmann::json& j) {
  if (j.is_null()) return;
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "ohlcv_path") config.ohlcv_path = value.get<std::string>();
    else if (key == "fng_path") config.fng_path = value.get<std::string>();
    else if (key == "dataset_path") config.dataset_path = value.get<std::string>();
    else if (key == "out_dir") config.out_dir = value.get<std::string>();
    else if (key == "train_start") config.train_start = value.get<std::string>();
    else if (key == "train_end") config.train_end = value.get<std::string>();
    else if (key == "test_start") config.test_start = value.get<std::string>();
    else if (key == "test_end") config.test_end = value.get<std::string>();
    else if (key == "families") config.families = value.get<std::vector<std::string>>();
    else if (key == "seed") config.seed = value.get<std::uint64_t>();
    else if (key == "initial_capital") config.initial_capital = value.get<double>();
    else if (key == "fees") config.fees = value.get<double>();
    else if (key == "cv_splits") config.cv_splits = value.get<int>();
    else if (key == "threads") config.threads = value.get<int>();
    else if (key == "fng_url") config.fng_url = value.get<std::string>();
    else throw InputError("config: unknown key '" + key + "'");
  }
}

}  // namespace

Date RunConfig::train_start_date() const { return parse_date_field(train_start, "train_start"); }
Date RunConfig::train_end_date() const { return parse_date_field(train_end, "train_end"); }
Date RunConfig::test_start_date() const { return parse_date_field(test_start, "test_start"); }
Date RunConfig::test_end_date() const { return parse_date_field(test_end, "test_end"); }

void RunConfig::validate() const {
  if (!(train_start_date() < train_end_date()))
    throw InputError("config: train_start must precede train_end");
  if (!(test_start_date() < test_end_date()))
    throw InputError("config: test_start must precede test_end");
  if (!(train_end_date() < test_start_date()))
    throw InputError("config: train_end must precede test_start");
  if (initial_capital <= 0) throw InputError("config: initial_capital must be > 0");
  if (fees < 0 || fees >= 1) throw InputError("config: fees must be in [0, 1)");
  if (cv_splits < 1) throw InputError("config: cv_splits must be >= 1");
}

RunConfig resolve_config(const nlohmann::json& file_config, const nlohmann::json& overrides) {
  RunConfig config;
  apply(config, file_config);
  apply(config, overrides);
  return config;
}

RunConfig load_run_config(const std::string& config_path, const nlohmann::json& overrides) {
  nlohmann::json file_config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw InputError("cannot open config file " + config_path);
    try {
      in >> file_config;
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("config file " + config_path + ": " + e.what());
    }
  }
  return resolve_config(file_config, overrides);
}

}  // namespace btcf
