#include "btcf/fng_client.hpp"

#include <chrono>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // leading slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InputError("fng: bad url '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<SentimentPoint> fetch_fng(const FngFetchOptions& options) {
  const SplitUrl url = split_url(options.base_url);
  std::string path = url.path;
  path += (path.find('?') == std::string::npos ? '?' : '&');
  path += "limit=" + std::to_string(options.limit) + "&format=json";

  httplib::Client client(url.origin);
  client.set_connection_timeout(options.timeout_seconds);
  client.set_read_timeout(options.timeout_seconds);
  client.set_follow_location(true);

  std::string last_error;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(200 * (1 << (attempt - 1))));
    auto res = client.Get(path);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {  // server-side, worth retrying
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw std::runtime_error("fng: HTTP " + std::to_string(res->status) + " from " +
                               options.base_url);
    return parse_fng_json(res->body);
  }
  throw std::runtime_error("fng: giving up on " + options.base_url + " after " +
                           std::to_string(options.max_retries + 1) + " attempts (" + last_error +
                           ")");
}

}  // namespace btcf
