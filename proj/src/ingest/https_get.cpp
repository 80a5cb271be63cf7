#define CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_ZLIB_SUPPORT
#include <httplib.h>

#include "postforge/ingest.hpp"

namespace postforge {

HttpGet make_https_get(const std::string& host) {
  auto client = std::make_shared<httplib::SSLClient>(host);
  client->set_connection_timeout(10, 0);
  client->set_read_timeout(30, 0);
  client->set_decompress(true);
  return [client](const std::string& path_and_query) -> HttpResponse {
    auto result = client->Get(path_and_query, {{"Accept-Encoding", "gzip"}});
    if (!result) return {0, {}};
    return {result->status, result->body};
  };
}

}  // namespace postforge
