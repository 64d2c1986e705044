#include "monitor/cleaning.hpp"

#include <algorithm>

#include "monitor/errors.hpp"
#include "monitor/prompts.hpp"
#include "monitor/util.hpp"

namespace monitor {

std::vector<PooledCaption> gather_candidates(const RawCaptionSet& current,
                                             std::span<const RawCaptionSet> history) {
  std::vector<PooledCaption> pool;
  const auto add = [&](const RawCaptionSet& set) {
    for (std::size_t ch = 0; ch < set.captions.size(); ++ch) {
      pool.push_back({set.captions[ch], set.frame_index, ch});
    }
  };
  add(current);
  for (auto it = history.rbegin(); it != history.rend(); ++it) add(*it);
  return pool;
}

std::vector<PooledCaption> gather_candidates(const RawCaptionSet& current,
                                             const std::deque<RawCaptionSet>& history) {
  const std::vector<RawCaptionSet> copy(history.begin(), history.end());
  return gather_candidates(current, std::span<const RawCaptionSet>(copy));
}

bool ranks_before(const CandidateCaption& a, const CandidateCaption& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  if (a.origin_frame != b.origin_frame) return a.origin_frame > b.origin_frame;
  return a.origin_channel < b.origin_channel;
}

std::vector<CandidateCaption> rank_candidates(const Embedding& image_emb,
                                              std::span<const PooledCaption> pool,
                                              TextEmbedder& embedder) {
  std::vector<CandidateCaption> ranked;
  ranked.reserve(pool.size());
  for (const auto& p : pool) {
    const auto text_emb = embedder.embed_text(p.text);
    ranked.push_back({p.text, image_emb.dot(text_emb), p.origin_frame, p.origin_channel});
  }
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  return ranked;
}

CleanedCaptions select_top_k(FrameIndex frame_index, std::span<const CandidateCaption> ranked,
                             std::size_t k) {
  const auto n = std::min(k, ranked.size());
  return {frame_index, std::vector<CandidateCaption>(ranked.begin(), ranked.begin() + n)};
}

std::string summary_prompt(const CleanedCaptions& cleaned) {
  std::string text(kSummaryPrompt);
  for (const auto& c : cleaned.candidates) {
    text += '\n';
    text += c.text;
  }
  return text;
}

FrameSummary summarize_frame(const CleanedCaptions& cleaned, ChatCompleter& chat,
                             TextEmbedder& embedder, double temperature) {
  if (cleaned.candidates.empty()) throw PreconditionError("summarize_frame on empty candidates");
  ChatRequest req;
  req.system_text = std::string(kSystemPrompt);
  req.user_text = summary_prompt(cleaned);
  req.temperature = temperature;
  req.tag = Stage::kSummarize;
  std::string text(trim(chat.chat_complete(req)));
  if (text.empty()) text = cleaned.candidates.front().text;
  auto embedding = embedder.embed_text(text);
  return {cleaned.frame_index, std::move(text), std::move(embedding)};
}

}  // namespace monitor
