#include "monitor/replay.hpp"

#include <chrono>
#include <fstream>
#include <json.hpp>

#include "monitor/errors.hpp"
#include "monitor/util.hpp"

namespace monitor {

namespace fs = std::filesystem;

ReplayCache::ReplayCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::shared_ptr<ReplayCache> ReplayCache::open_existing(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("replay cache directory missing: " + dir.string());
  return std::make_shared<ReplayCache>(dir);
}

std::optional<std::string> ReplayCache::lookup(const Digest& digest) const {
  const auto path = dir_ / to_hex(digest);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void ReplayCache::store(const Digest& digest, std::string_view stage, std::string_view payload) {
  const auto hex = to_hex(digest);
  std::lock_guard lock(write_mu_);
  if (auto existing = lookup(digest); existing && *existing == payload) return;
  write_file_atomic(dir_ / hex, payload);
  std::ofstream index(dir_ / "index.tsv", std::ios::app);
  index << hex << '\t' << stage << '\n';
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::string RecordingChat::chat_complete(const ChatRequest& req) {
  validate_request(req);
  const auto digest = request_digest(req);
  const auto start = std::chrono::steady_clock::now();
  auto response = inner_->chat_complete(req);
  const double ms = elapsed_ms(start);
  cache_->store(digest, to_string(req.tag), response);
  std::lock_guard lock(log_mu_);
  log_.push_back({digest, response, std::string(to_string(req.tag)), ms});
  return response;
}

std::vector<ProviderCallRecord> RecordingChat::calls() const {
  std::lock_guard lock(log_mu_);
  return log_;
}

std::string ReplayChat::chat_complete(const ChatRequest& req) {
  validate_request(req);
  const auto digest = request_digest(req);
  auto hit = cache_->lookup(digest);
  if (!hit) {
    throw CacheMiss("no recorded " + std::string(to_string(req.tag)) + " response for digest " +
                    to_hex(digest));
  }
  return *hit;
}

std::string encode_vector(std::span<const double> values) {
  return nlohmann::json(std::vector<double>(values.begin(), values.end())).dump();
}

std::vector<double> decode_vector(std::string_view payload) {
  try {
    return nlohmann::json::parse(payload).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad embedding payload: ") + e.what());
  }
}

Embedding RecordingTextEmbedder::embed_text(std::string_view text) {
  if (text.empty()) throw PreconditionError("embed_text on empty text");
  auto e = inner_->embed_text(text);
  cache_->store(embedding_digest(text), "embed", encode_vector(e.values()));
  return e;
}

Embedding ReplayTextEmbedder::embed_text(std::string_view text) {
  if (text.empty()) throw PreconditionError("embed_text on empty text");
  const auto digest = embedding_digest(text);
  auto hit = cache_->lookup(digest);
  if (!hit) throw CacheMiss("no recorded embedding for digest " + to_hex(digest));
  return Embedding(decode_vector(*hit));
}

}  // namespace monitor
