#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monitor/providers.hpp"

namespace monitor {

/// One provider round trip, as captured in record mode.
struct ProviderCallRecord {
  Digest request_digest{};
  std::variant<std::string, std::vector<double>> response;
  std::string stage;
  double wall_time_ms = 0.0;
};

/// Directory of response payloads named by hex digest, plus an `index.tsv`
/// sidecar listing `digest<TAB>stage` for audit. Reads may run concurrently;
/// writes are serialized.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path dir);

  /// Opens an existing cache; throws InputError when the directory is missing.
  static std::shared_ptr<ReplayCache> open_existing(const std::filesystem::path& dir);

  std::optional<std::string> lookup(const Digest& digest) const;
  void store(const Digest& digest, std::string_view stage, std::string_view payload);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mu_;
};

class RecordingChat final : public ChatCompleter {
 public:
  RecordingChat(std::shared_ptr<ChatCompleter> inner, std::shared_ptr<ReplayCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::string chat_complete(const ChatRequest& req) override;
  std::vector<ProviderCallRecord> calls() const;

 private:
  std::shared_ptr<ChatCompleter> inner_;
  std::shared_ptr<ReplayCache> cache_;
  mutable std::mutex log_mu_;
  std::vector<ProviderCallRecord> log_;
};

class ReplayChat final : public ChatCompleter {
 public:
  explicit ReplayChat(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {}
  std::string chat_complete(const ChatRequest& req) override;

 private:
  std::shared_ptr<ReplayCache> cache_;
};

class RecordingTextEmbedder final : public TextEmbedder {
 public:
  RecordingTextEmbedder(std::shared_ptr<TextEmbedder> inner, std::shared_ptr<ReplayCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  Embedding embed_text(std::string_view text) override;

 private:
  std::shared_ptr<TextEmbedder> inner_;
  std::shared_ptr<ReplayCache> cache_;
};

class ReplayTextEmbedder final : public TextEmbedder {
 public:
  explicit ReplayTextEmbedder(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {}
  Embedding embed_text(std::string_view text) override;

 private:
  std::shared_ptr<ReplayCache> cache_;
};

/// Embedding payload encoding shared by record and replay: a JSON number array.
std::string encode_vector(std::span<const double> values);
std::vector<double> decode_vector(std::string_view payload);

}  // namespace monitor
