#pragma once

#include <deque>
#include <span>
#include <string>
#include <vector>

#include "monitor/domain.hpp"
#include "monitor/providers.hpp"

namespace monitor {

/// A caption in the cleaning pool, tagged with where it came from.
struct PooledCaption {
  std::string text;
  FrameIndex origin_frame = 0;
  std::size_t origin_channel = 0;

  bool operator==(const PooledCaption&) const = default;
};

struct CleanedCaptions {
  FrameIndex frame_index = 0;
  std::vector<CandidateCaption> candidates;
};

/// Pools the current frame's captions followed by the history, newest frame
/// first. `history` is oldest-first and already trimmed to the allowed window.
std::vector<PooledCaption> gather_candidates(const RawCaptionSet& current,
                                             std::span<const RawCaptionSet> history);
std::vector<PooledCaption> gather_candidates(const RawCaptionSet& current,
                                             const std::deque<RawCaptionSet>& history);

/// Strict weak order used for ranking: similarity descending, then the more
/// recent origin frame, then the lower channel.
bool ranks_before(const CandidateCaption& a, const CandidateCaption& b);

/// Scores every pooled caption against the image embedding and sorts by ranks_before.
std::vector<CandidateCaption> rank_candidates(const Embedding& image_emb,
                                              std::span<const PooledCaption> pool,
                                              TextEmbedder& embedder);

/// First min(k, |ranked|) entries of an already-ranked list.
CleanedCaptions select_top_k(FrameIndex frame_index, std::span<const CandidateCaption> ranked,
                             std::size_t k);

/// User text sent for summarization: the summary instruction, then one
/// candidate per line in ranked order.
std::string summary_prompt(const CleanedCaptions& cleaned);

/// Summarizes cleaned captions through the chat service and embeds the result.
/// An empty (after trimming) reply falls back to the top-1 candidate text.
FrameSummary summarize_frame(const CleanedCaptions& cleaned, ChatCompleter& chat,
                             TextEmbedder& embedder, double temperature);

}  // namespace monitor
