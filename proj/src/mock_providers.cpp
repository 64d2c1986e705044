#include "monitor/mock_providers.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <random>

#include "monitor/errors.hpp"
#include "monitor/util.hpp"

namespace monitor {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw PreconditionError("HashEmbedder dim must be positive");
}

void HashEmbedder::accumulate(std::string_view token, std::vector<double>& acc) const {
  std::mt19937_64 gen(seed_ ^ fnv1a(token));
  // Raw engine output mapped by hand: distribution objects are not portable.
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (auto& a : acc) {
    const double u = static_cast<double>(gen() >> 11) * kScale;
    a += 2.0 * u - 1.0;
  }
}

Embedding HashEmbedder::embed_text(std::string_view text) {
  if (text.empty()) throw PreconditionError("embed_text on empty text");
  std::vector<double> acc(dim_, 0.0);
  const std::string low = lower(text);
  bool any = false;
  std::size_t i = 0;
  while (i < low.size()) {
    while (i < low.size() && !std::isalnum(static_cast<unsigned char>(low[i]))) ++i;
    std::size_t j = i;
    while (j < low.size() && std::isalnum(static_cast<unsigned char>(low[j]))) ++j;
    if (j > i) {
      accumulate(std::string_view(low).substr(i, j - i), acc);
      any = true;
    }
    i = j;
  }
  if (!any) accumulate(low, acc);
  if (std::all_of(acc.begin(), acc.end(), [](double v) { return v == 0.0; })) acc[0] = 1.0;
  return Embedding(std::move(acc));
}

std::optional<std::string_view> find_block(std::string_view text, std::string_view header) {
  std::size_t found = std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (text.substr(pos, nl - pos) == header) found = nl;
    pos = nl + 1;
  }
  if (found == std::string_view::npos) return std::nullopt;
  const std::size_t start = std::min(found + 1, text.size());
  auto end = text.find("\n\n", start);
  if (end == std::string_view::npos) end = text.size();
  return text.substr(start, end - start);
}

ScriptedChat::ScriptedChat(std::vector<ScriptRule> rules, std::map<Stage, std::string> defaults)
    : rules_(std::move(rules)), defaults_(std::move(defaults)) {}

namespace {

std::vector<std::string_view> items_after_first_line(std::string_view text) {
  auto lines = split_lines(text);
  std::vector<std::string_view> items;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto t = trim(lines[i]);
    if (!t.empty()) items.push_back(t);
  }
  return items;
}

std::string expand_template(const std::string& response, const ChatRequest& req) {
  if (response == "{echo}") return req.user_text;
  if (response == "{echo_items}") {
    std::string out;
    for (auto item : items_after_first_line(req.user_text)) {
      if (!out.empty()) out += ' ';
      out += item;
    }
    return out;
  }
  if (response == "{echo_first_item}") {
    auto items = items_after_first_line(req.user_text);
    return items.empty() ? std::string() : std::string(items.front());
  }
  return response;
}

}  // namespace

std::string ScriptedChat::chat_complete(const ChatRequest& req) {
  validate_request(req);
  for (const auto& rule : rules_) {
    if (rule.stage != req.tag) continue;
    std::string_view scope = req.user_text;
    if (rule.block) {
      auto body = find_block(req.user_text, *rule.block);
      if (!body) continue;
      scope = *body;
    }
    if (lower(scope).find(lower(rule.contains)) != std::string::npos) {
      return expand_template(rule.response, req);
    }
  }
  auto it = defaults_.find(req.tag);
  return it == defaults_.end() ? std::string() : expand_template(it->second, req);
}

ScriptedChat ScriptedChat::keyword_default() {
  const std::string scene = "Current scene:";
  return ScriptedChat(
      {
          {Stage::kScore, "fight", "0.9", scene},
          {Stage::kScore, "fire", "0.9", scene},
      },
      {
          {Stage::kSummarize, "{echo_first_item}"},
          {Stage::kLongTerm, "{echo_items}"},
          {Stage::kShortTerm, "{echo_items}"},
          {Stage::kScore, "0.1"},
          {Stage::kPredict, "{echo_first_item}"},
      });
}

ScriptedChat ScriptedChat::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad mock script: ") + e.what());
  }
  const auto stage_of = [](const std::string& s) {
    auto st = parse_stage(s);
    if (!st) throw InputError("bad mock script stage '" + s + "'");
    return *st;
  };
  std::vector<ScriptRule> rules;
  const auto rule_list = doc.value("rules", nlohmann::json::array());
  const auto default_map = doc.value("defaults", nlohmann::json::object());
  for (const auto& r : rule_list) {
    ScriptRule rule;
    rule.stage = stage_of(r.at("stage").get<std::string>());
    rule.contains = r.at("contains").get<std::string>();
    rule.response = r.at("response").get<std::string>();
    if (r.contains("block")) rule.block = r.at("block").get<std::string>();
    rules.push_back(std::move(rule));
  }
  std::map<Stage, std::string> defaults;
  for (const auto& [k, v] : default_map.items()) {
    defaults[stage_of(k)] = v.get<std::string>();
  }
  return ScriptedChat(std::move(rules), std::move(defaults));
}

std::string ScriptedChat::to_json() const {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : rules_) {
    nlohmann::json row = {{"stage", to_string(r.stage)}, {"contains", r.contains}, {"response", r.response}};
    if (r.block) row["block"] = *r.block;
    rules.push_back(row);
  }
  nlohmann::json defaults = nlohmann::json::object();
  for (const auto& [stage, text] : defaults_) defaults[std::string(to_string(stage))] = text;
  return nlohmann::json{{"rules", rules}, {"defaults", defaults}}.dump(2) + "\n";
}

}  // namespace monitor
