#include "lowalt/advisor.hpp"

// httplib drags in system headers whose macros clash with Eigen internals;
// keep it after anything that includes Eigen.
#include <httplib.h>

#include <json.hpp>

#include <cstdlib>

#include "lowalt/errors.hpp"

namespace lowalt {

using nlohmann::json;

namespace {

struct UrlParts {
  std::string host_port;  // what httplib::Client wants, scheme included
  std::string path;
};

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("advisor url must include a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RemoteAdvisor::RemoteAdvisor(RemoteAdvisorConfig cfg) : cfg_(std::move(cfg)) {}

std::variant<std::string, AdvisorError> RemoteAdvisor::operator()(
    const std::string& prompt) {
  UrlParts parts;
  try {
    parts = split_url(cfg_.url);
  } catch (const ValidationError& e) {
    return AdvisorError{AdvisorErrorKind::kTransport, e.what()};
  }

  httplib::Client client(parts.host_port);
  client.set_connection_timeout(cfg_.timeout_s, 0);
  client.set_read_timeout(cfg_.timeout_s, 0);
  client.set_write_timeout(cfg_.timeout_s, 0);
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
    client.set_bearer_token_auth(key);

  json body = {{"model", cfg_.model},
               {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
               {"temperature", cfg_.temperature}};

  auto res = client.Post(parts.path, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           err == httplib::Error::Read ||
                           err == httplib::Error::Write;
    return AdvisorError{
        timed_out ? AdvisorErrorKind::kTimeout : AdvisorErrorKind::kTransport,
        httplib::to_string(err)};
  }
  if (res->status != 200)
    return AdvisorError{AdvisorErrorKind::kTransport,
                        "http status " + std::to_string(res->status)};

  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty() || !j["choices"][0].contains("message") ||
      !j["choices"][0]["message"].contains("content") ||
      !j["choices"][0]["message"]["content"].is_string())
    return AdvisorError{AdvisorErrorKind::kTransport,
                        "response is not a chat completion"};
  return j["choices"][0]["message"]["content"].get<std::string>();
}

}  // namespace lowalt
