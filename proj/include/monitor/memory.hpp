#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monitor/domain.hpp"
#include "monitor/providers.hpp"

namespace monitor {

struct MemoryDigests {
  std::string long_term;
  std::string short_term;

  bool operator==(const MemoryDigests&) const = default;
};

/// Long-term window (up to window_w summaries) and short-term window (up to
/// short_window), both oldest first. Owned by a single video pipeline.
class MemoryState {
 public:
  MemoryState(std::size_t window_w, std::size_t short_window);

  /// Appends `summary` to both buffers, evicting the oldest entries beyond
  /// capacity, and invalidates the digests. Throws OrderError unless
  /// summary.frame_index follows the last pushed index (or is 0 at start).
  void push_summary(FrameSummary summary);

  /// Seeds the long-term buffer with prefill exemplars (frame index
  /// kPrefillFrame). Only valid before the first push.
  void seed_long_term(std::vector<FrameSummary> exemplars);

  const std::deque<FrameSummary>& long_buffer() const { return long_; }
  const std::deque<FrameSummary>& short_buffer() const { return short_; }
  const std::optional<MemoryDigests>& last_digests() const { return digests_; }
  void set_digests(MemoryDigests d) { digests_ = std::move(d); }

  std::size_t window_w() const { return window_w_; }
  std::size_t short_window() const { return short_window_; }
  std::optional<FrameIndex> last_pushed() const { return last_pushed_; }

 private:
  std::size_t window_w_;
  std::size_t short_window_;
  std::deque<FrameSummary> long_;
  std::deque<FrameSummary> short_;
  std::optional<MemoryDigests> digests_;
  std::optional<FrameIndex> last_pushed_;
};

/// Keeps the buffered summaries whose similarity to `current` is strictly
/// above `theta`, in buffer order.
std::vector<FrameSummary> forgetting_gate(const FrameSummary& current,
                                          const std::deque<FrameSummary>& long_buffer,
                                          double theta);

/// Newline-joined texts, oldest first.
std::string join_texts(std::span<const FrameSummary> summaries);

/// Long-term digest of the retained summaries. Empty input yields "" without
/// calling the chat service.
std::string build_long_term(std::span<const FrameSummary> retained, ChatCompleter& chat,
                            double temperature);

/// Short-term digest of the short buffer; "" (no call) when the buffer is empty.
std::string build_short_term(const std::deque<FrameSummary>& short_buffer, ChatCompleter& chat,
                             double temperature);

}  // namespace monitor
