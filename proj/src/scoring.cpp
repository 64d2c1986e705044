#include "monitor/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "monitor/errors.hpp"
#include "monitor/prompts.hpp"
#include "monitor/util.hpp"

namespace monitor {

const PromptSet& PromptSet::standard() {
  static const PromptSet set{
      std::string(kSystemPrompt),  std::string(kSummaryPrompt), std::string(kPredictPrefix),
      std::string(kPredictSuffix), std::string(kScoringPrompt), std::string(kLongTermPrompt),
      std::string(kShortTermPrompt),
  };
  return set;
}

AnomalyPriors AnomalyPriors::parse(std::string_view text) {
  AnomalyPriors priors;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw InputError("priors line " + std::to_string(line_no) + ": expected 'Category: definition'");
    }
    priors.entries.emplace_back(std::string(trim(line.substr(0, colon))),
                                std::string(trim(line.substr(colon + 1))));
  }
  validate_priors(priors);
  return priors;
}

AnomalyPriors AnomalyPriors::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

void validate_priors(const AnomalyPriors& priors) {
  std::set<std::string> seen;
  for (const auto& [category, definition] : priors.entries) {
    if (category.empty()) throw InputError("priors entry with empty category");
    if (definition.empty()) throw InputError("priors category '" + category + "' has no definition");
    if (!seen.insert(category).second) throw InputError("duplicate priors category '" + category + "'");
  }
}

std::string render_priors(const AnomalyPriors& priors) {
  std::string out(kPriorsHeader);
  for (const auto& [category, definition] : priors.entries) {
    out += '\n';
    out += category;
    out += ": ";
    out += definition;
  }
  return out;
}

std::size_t quantize_score(double a, double granularity) {
  const double steps = std::round(1.0 / granularity);
  // Small slack so decimal midpoints such as 0.25 round up despite binary representation.
  const double idx = std::floor(a * steps + 0.5 + 1e-9);
  return static_cast<std::size_t>(std::clamp(idx, 0.0, steps));
}

std::string slot_label(std::size_t slot, std::size_t slot_count) {
  const auto steps = slot_count - 1;
  int decimals = 1;
  for (std::size_t p = 10; p < steps; p *= 10) ++decimals;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals,
                static_cast<double>(slot) / static_cast<double>(steps));
  return buf;
}

ScoringQueue::ScoringQueue(std::size_t slot_count) : slots_(slot_count) {
  if (slot_count < 2) throw PreconditionError("scoring queue needs at least two slots");
}

void ScoringQueue::update(double score, std::string summary_text) {
  slots_[quantize_score(score, granularity())] = std::move(summary_text);
}

void ScoringQueue::set_slot(std::size_t slot, std::string text) {
  if (slot >= slots_.size()) {
    throw PrefillError("queue slot " + std::to_string(slot) + " outside 0.." +
                       std::to_string(slots_.size() - 1));
  }
  slots_[slot] = std::move(text);
}

std::size_t ScoringQueue::occupied() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); }));
}

std::string ScoringQueue::render() const {
  std::string out;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i]) continue;
    if (!out.empty()) out += '\n';
    out += "score=" + slot_label(i, slots_.size()) + " → " + *slots_[i];
  }
  return out;
}

ChatRequest assemble_scoring_prompt(const ScoringInputs& in, double temperature) {
  std::string text;
  const auto add = [&](std::string_view header, const std::string& body) {
    if (body.empty()) return;
    if (!text.empty()) text += "\n\n";
    if (!header.empty()) {
      text += header;
      text += '\n';
    }
    text += body;
  };
  add({}, in.instruction);
  add(kLongTermHeader, in.long_term);
  add(kShortTermHeader, in.short_term);
  add(kQueueHeader, in.queue);
  add({}, in.priors);
  add(kSceneHeader, in.summary);
  if (in.prev_prediction && !in.prev_prediction->empty()) {
    add({}, std::string(kPredictionLabel) + *in.prev_prediction);
  }
  ChatRequest req;
  req.system_text = std::string(kSystemPrompt);
  req.user_text = std::move(text);
  req.temperature = temperature;
  req.tag = Stage::kScore;
  return req;
}

double parse_score(std::string_view response) {
  const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0;
  while (i < response.size()) {
    const bool starts_number =
        is_digit(response[i]) ||
        (response[i] == '.' && i + 1 < response.size() && is_digit(response[i + 1]));
    if (!starts_number) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < response.size() && is_digit(response[j])) ++j;
    if (j + 1 < response.size() && response[j] == '.' && is_digit(response[j + 1])) {
      ++j;
      while (j < response.size() && is_digit(response[j])) ++j;
    }
    const bool negative = i > 0 && response[i - 1] == '-';
    double value = 0.0;
    std::from_chars(response.data() + i, response.data() + j, value);
    if (!negative && value >= 0.0 && value <= 1.0) return std::clamp(value, 0.0, 1.0);
    i = j;
  }
  throw ParseError("no score in [0,1] found in response: '" + std::string(response) + "'");
}

Prediction predict_next(const FrameSummary& summary, ChatCompleter& chat, double temperature) {
  ChatRequest req;
  req.system_text = std::string(kSystemPrompt);
  req.user_text =
      std::string(kPredictPrefix) + "\n" + summary.text + "\n" + std::string(kPredictSuffix);
  req.temperature = temperature;
  req.tag = Stage::kPredict;
  std::string text(trim(chat.chat_complete(req)));
  if (text.empty()) text = std::string(kNoPredictionFallback);
  return {summary.frame_index, std::move(text)};
}

double smooth(double a_i, double a_prev, double alpha) {
  // Extended precision keeps the affine combination correctly rounded in
  // practice (0.7*0.9 + 0.3*0.2 gives 0.69, not 0.6900000000000001).
  const long double al = alpha;
  const auto v = static_cast<double>(al * a_i + (1.0L - al) * a_prev);
  return std::clamp(v, std::min(a_i, a_prev), std::max(a_i, a_prev));
}

}  // namespace monitor
