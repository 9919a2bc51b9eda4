#pragma once

#include <string>
#include <vector>

#include "btcf/market_data.hpp"

namespace btcf {

struct FngFetchOptions {
  /// Endpoint; limit is appended as a query parameter. limit=0 means the full
  /// history per the public API contract.
  std::string base_url = "https://api.alternative.me/fng/";
  int limit = 0;
  int max_retries = 3;
  int timeout_seconds = 30;
};

/// Download and parse the index series. Transient HTTP failures are retried up
/// to max_retries times; persistent failure throws with the last status. The
/// call has no side effects, so callers can persist the result atomically.
std::vector<SentimentPoint> fetch_fng(const FngFetchOptions& options = {});

}  // namespace btcf
