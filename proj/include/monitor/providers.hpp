#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "monitor/domain.hpp"

namespace monitor {

/// Pipeline stage that issued a chat request.
enum class Stage { kSummarize, kLongTerm, kShortTerm, kScore, kPredict };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct ChatRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.6;
  int max_tokens = 256;
  Stage tag = Stage::kSummarize;

  bool operator==(const ChatRequest&) const = default;
};

/// Throws PreconditionError for an empty user_text or non-positive max_tokens.
void validate_request(const ChatRequest& req);

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);

/// Length-prefixed concatenation of tag, temperature (shortest round-trip),
/// max_tokens, system_text and user_text. Text is hashed verbatim.
std::string canonicalize(const ChatRequest& req);

/// SHA-256 of canonicalize(req). Endpoint identity does not participate.
Digest request_digest(const ChatRequest& req);

/// Digest for a text-embedding request.
Digest embedding_digest(std::string_view text);

class Captioner {
 public:
  virtual ~Captioner() = default;
  /// Caption of `frame` produced by captioner `channel`.
  virtual std::string caption_image(const FrameSample& frame, std::size_t channel) = 0;
  virtual std::size_t channels() const = 0;
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual Embedding embed_image(const FrameSample& frame) = 0;
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual Embedding embed_text(std::string_view text) = 0;
};

class ChatCompleter {
 public:
  virtual ~ChatCompleter() = default;
  virtual std::string chat_complete(const ChatRequest& req) = 0;
};

/// The four model services one pipeline run talks to. All must be safe for
/// concurrent use across videos.
struct Providers {
  std::shared_ptr<Captioner> captioner;
  std::shared_ptr<ImageEmbedder> image_embedder;
  std::shared_ptr<TextEmbedder> text_embedder;
  std::shared_ptr<ChatCompleter> chat;
};

}  // namespace monitor
