#include <chrono>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gsmpl/generation.hpp"

namespace gsmpl {

namespace {

struct SplitUrl {
  std::string base;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("generator URL needs a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpGenerator::HttpGenerator(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  split_url(endpoint_.url);
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (!key || !*key)
      throw std::invalid_argument("environment variable " + endpoint_.api_key_env + " holds no API key");
    api_key_ = key;
  }
}

std::string HttpGenerator::name() const { return endpoint_.model + "@" + endpoint_.url; }

std::string HttpGenerator::generate(const ChatRequest& request) {
  using nlohmann::json;
  const SplitUrl url = split_url(endpoint_.url);
  json body = {{"model", endpoint_.model},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens},
               {"messages",
                json::array({json{{"role", "system"}, {"content", request.system}},
                             json{{"role", "user"}, {"content", request.user}}})}};
  const std::string payload = body.dump();

  httplib::Client client(url.base);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(std::chrono::seconds(endpoint_.timeout_seconds));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_error;
  auto delay = std::chrono::milliseconds(1000);
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable(res->status)) {
        if (auto retry_after = res->get_header_value("Retry-After"); !retry_after.empty()) {
          int seconds = std::atoi(retry_after.c_str());
          if (seconds > 0) delay = std::chrono::seconds(std::min(seconds, 120));
        }
        continue;
      }
      throw GenerationError(last_error + ": " + res->body.substr(0, 200));
    }
    try {
      json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw GenerationError(std::string("unexpected response body: ") + e.what());
    }
  }
  throw GenerationError(last_error);
}

}  // namespace gsmpl
