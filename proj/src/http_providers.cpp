#include "monitor/http_providers.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <json.hpp>
#include <regex>
#include <thread>

#include "monitor/errors.hpp"

namespace monitor {

using nlohmann::json;

HttpPost default_http_post() {
  return [](const std::string& url, const std::string& body, const HttpHeaders& headers,
            std::chrono::milliseconds timeout) -> HttpResponse {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) throw ConfigError("malformed endpoint url: " + url);
    httplib::Client client(m[1].str());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    const std::string path = m[2].matched ? m[2].str() : "/";
    auto res = client.Post(path, h, body, "application/json");
    if (!res) throw ProviderUnavailable("http error: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  };
}

Endpoint Endpoint::from_env(const std::string& prefix) {
  const auto get = [&](const char* suffix) {
    const char* v = std::getenv((prefix + suffix).c_str());
    return std::string(v ? v : "");
  };
  Endpoint ep{get("_URL"), get("_MODEL"), get("_KEY")};
  if (ep.url.empty()) throw ConfigError(prefix + "_URL is not set");
  return ep;
}

namespace {

HttpHeaders auth_headers(const Endpoint& ep) {
  HttpHeaders h;
  if (!ep.key.empty()) h.emplace_back("Authorization", "Bearer " + ep.key);
  return h;
}

/// Runs `attempt` until it returns without throwing, sleeping with
/// exponential backoff between tries.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, std::string_view what, Fn&& attempt) {
  auto backoff = policy.initial_backoff;
  std::string last_error;
  for (int i = 0; i < policy.attempts; ++i) {
    if (i > 0 && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * policy.backoff_multiplier));
    }
    try {
      return attempt();
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw ProviderUnavailable(std::string(what) + " failed after " +
                            std::to_string(policy.attempts) + " attempts: " + last_error);
}

std::string post_checked(const HttpPost& post, const Endpoint& ep, const std::string& body,
                         std::chrono::milliseconds timeout) {
  auto res = post(ep.url, body, auth_headers(ep), timeout);
  if (res.status < 200 || res.status >= 300) {
    throw ProviderUnavailable("http status " + std::to_string(res.status));
  }
  return std::move(res.body);
}

}  // namespace

HttpChatClient::HttpChatClient(Endpoint endpoint, RetryPolicy retry, HttpPost post)
    : endpoint_(std::move(endpoint)), retry_(retry), post_(std::move(post)) {}

std::string HttpChatClient::encode_request(const Endpoint& ep, const ChatRequest& req) {
  json doc = {
      {"model", ep.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", req.system_text}},
                    {{"role", "user"}, {"content", req.user_text}}})},
      {"temperature", req.temperature},
      {"max_tokens", req.max_tokens},
  };
  return doc.dump();
}

std::string HttpChatClient::decode_response(std::string_view body) {
  try {
    const auto doc = json::parse(body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed chat response: ") + e.what());
  }
}

std::string HttpChatClient::chat_complete(const ChatRequest& req) {
  validate_request(req);
  const auto body = encode_request(endpoint_, req);
  return with_retries(retry_, "chat_complete", [&] {
    return decode_response(post_checked(post_, endpoint_, body, retry_.timeout));
  });
}

HttpTextEmbedder::HttpTextEmbedder(Endpoint endpoint, RetryPolicy retry, HttpPost post)
    : endpoint_(std::move(endpoint)), retry_(retry), post_(std::move(post)) {}

std::vector<double> HttpTextEmbedder::decode_response(std::string_view body) {
  try {
    const auto doc = json::parse(body);
    return doc.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed embedding response: ") + e.what());
  }
}

Embedding HttpTextEmbedder::embed_text(std::string_view text) {
  if (text.empty()) throw PreconditionError("embed_text on empty text");
  const auto body = json{{"model", endpoint_.model}, {"input", std::string(text)}}.dump();
  return with_retries(retry_, "embed_text", [&] {
    return Embedding(decode_response(post_checked(post_, endpoint_, body, retry_.timeout)));
  });
}

}  // namespace monitor
