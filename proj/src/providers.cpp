#include "monitor/providers.hpp"

#include <openssl/sha.h>

#include "monitor/config.hpp"
#include "monitor/errors.hpp"

namespace monitor {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kSummarize: return "summarize";
    case Stage::kLongTerm: return "long_term";
    case Stage::kShortTerm: return "short_term";
    case Stage::kScore: return "score";
    case Stage::kPredict: return "predict";
  }
  return "summarize";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto v : {Stage::kSummarize, Stage::kLongTerm, Stage::kShortTerm, Stage::kScore,
                 Stage::kPredict}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

void validate_request(const ChatRequest& req) {
  if (req.user_text.empty()) throw PreconditionError("chat request has empty user_text");
  if (req.max_tokens <= 0) throw PreconditionError("chat request max_tokens must be positive");
}

std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(d.size() * 2);
  for (auto b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

namespace {

void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
}

Digest sha256(std::string_view bytes) {
  Digest d{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), d.data());
  return d;
}

}  // namespace

std::string canonicalize(const ChatRequest& req) {
  std::string out;
  append_field(out, "chat");
  append_field(out, to_string(req.tag));
  append_field(out, format_double(req.temperature));
  append_field(out, std::to_string(req.max_tokens));
  append_field(out, req.system_text);
  append_field(out, req.user_text);
  return out;
}

Digest request_digest(const ChatRequest& req) { return sha256(canonicalize(req)); }

Digest embedding_digest(std::string_view text) {
  std::string out;
  append_field(out, "embed_text");
  append_field(out, text);
  return sha256(out);
}

}  // namespace monitor
