#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monitor/providers.hpp"

namespace monitor {

/// Bag-of-tokens embedder: each lower-cased alphanumeric token is hashed and
/// mapped to a seeded pseudo-random direction; the sum is normalized.
/// Deterministic across runs and platforms for a given (seed, dim).
class HashEmbedder final : public TextEmbedder {
 public:
  explicit HashEmbedder(std::size_t dim = 128, std::uint64_t seed = 0x5eedULL);

  Embedding embed_text(std::string_view text) override;
  std::size_t dim() const { return dim_; }

 private:
  void accumulate(std::string_view token, std::vector<double>& acc) const;

  std::size_t dim_;
  std::uint64_t seed_;
};

/// One keyword rule of the scripted chat mock. `block`, when set, restricts
/// matching to the body of the last prompt block whose header line equals it.
struct ScriptRule {
  Stage stage = Stage::kScore;
  std::string contains;
  std::string response;
  std::optional<std::string> block;
};

/// Deterministic chat stand-in: the first matching rule (case-insensitive
/// substring) for the request stage wins, else the stage default.
///
/// Responses may be templates:
///   {echo}             the whole user_text
///   {echo_items}       every non-empty line after the first, joined by a space
///   {echo_first_item}  the first non-empty line after the first
class ScriptedChat final : public ChatCompleter {
 public:
  ScriptedChat(std::vector<ScriptRule> rules, std::map<Stage, std::string> defaults);

  std::string chat_complete(const ChatRequest& req) override;

  /// Keyword script used by the synthetic corpus: scenes mentioning "fight"
  /// or "fire" score 0.9, everything else 0.1; other stages echo.
  static ScriptedChat keyword_default();

  /// Loads a JSON script: {"rules":[{stage,contains,response,block?}], "defaults":{stage:response}}.
  static ScriptedChat from_json(std::string_view json_text);
  std::string to_json() const;

  const std::vector<ScriptRule>& rules() const { return rules_; }

 private:
  std::vector<ScriptRule> rules_;
  std::map<Stage, std::string> defaults_;
};

/// Body of the last block introduced by a line equal to `header`; blocks end
/// at a blank line. Returns nullopt when the header does not occur.
std::optional<std::string_view> find_block(std::string_view text, std::string_view header);

}  // namespace monitor
