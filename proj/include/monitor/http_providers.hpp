#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "monitor/providers.hpp"

namespace monitor {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// POSTs `body` to `url`; throws (any std::exception) on transport failure.
using HttpPost = std::function<HttpResponse(const std::string& url, const std::string& body,
                                            const HttpHeaders& headers,
                                            std::chrono::milliseconds timeout)>;

/// Transport backed by cpp-httplib.
HttpPost default_http_post();

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds timeout{60000};
};

struct Endpoint {
  std::string url;
  std::string model;
  std::string key;

  /// Reads <prefix>_URL, <prefix>_MODEL and <prefix>_KEY; throws ConfigError when the URL is unset.
  static Endpoint from_env(const std::string& prefix);
};

/// Chat completion over HTTP:
///   request  {model, messages:[{role:"system"},{role:"user"}], temperature, max_tokens}
///   response choices[0].message.content
class HttpChatClient final : public ChatCompleter {
 public:
  HttpChatClient(Endpoint endpoint, RetryPolicy retry = {}, HttpPost post = default_http_post());

  std::string chat_complete(const ChatRequest& req) override;

  static std::string encode_request(const Endpoint& ep, const ChatRequest& req);
  static std::string decode_response(std::string_view body);

 private:
  Endpoint endpoint_;
  RetryPolicy retry_;
  HttpPost post_;
};

/// Text embedding over HTTP: request {model, input}, response data[0].embedding.
class HttpTextEmbedder final : public TextEmbedder {
 public:
  HttpTextEmbedder(Endpoint endpoint, RetryPolicy retry = {}, HttpPost post = default_http_post());

  Embedding embed_text(std::string_view text) override;

  static std::vector<double> decode_response(std::string_view body);

 private:
  Endpoint endpoint_;
  RetryPolicy retry_;
  HttpPost post_;
};

}  // namespace monitor
