#include "monitor/memory.hpp"

#include "monitor/errors.hpp"
#include "monitor/prompts.hpp"
#include "monitor/util.hpp"

namespace monitor {

MemoryState::MemoryState(std::size_t window_w, std::size_t short_window)
    : window_w_(window_w), short_window_(short_window) {
  if (window_w_ == 0 || short_window_ == 0 || short_window_ > window_w_) {
    throw PreconditionError("memory windows must satisfy 0 < short_window <= window_w");
  }
}

void MemoryState::push_summary(FrameSummary summary) {
  const FrameIndex expected = last_pushed_ ? *last_pushed_ + 1 : 0;
  if (summary.frame_index != expected) {
    throw OrderError("push_summary expected frame " + std::to_string(expected) + ", got " +
                     std::to_string(summary.frame_index));
  }
  last_pushed_ = summary.frame_index;
  short_.push_back(summary);
  while (short_.size() > short_window_) short_.pop_front();
  long_.push_back(std::move(summary));
  while (long_.size() > window_w_) long_.pop_front();
  digests_.reset();
}

void MemoryState::seed_long_term(std::vector<FrameSummary> exemplars) {
  if (last_pushed_) throw PrefillError("memory can only be seeded before the first frame");
  for (auto& e : exemplars) {
    e.frame_index = kPrefillFrame;
    long_.push_back(std::move(e));
    while (long_.size() > window_w_) long_.pop_front();
  }
}

std::vector<FrameSummary> forgetting_gate(const FrameSummary& current,
                                          const std::deque<FrameSummary>& long_buffer,
                                          double theta) {
  std::vector<FrameSummary> retained;
  for (const auto& entry : long_buffer) {
    if (current.embedding.dot(entry.embedding) > theta) retained.push_back(entry);
  }
  return retained;
}

std::string join_texts(std::span<const FrameSummary> summaries) {
  std::string out;
  for (const auto& s : summaries) {
    if (!out.empty()) out += '\n';
    out += s.text;
  }
  return out;
}

namespace {

std::string digest(std::string_view instruction, std::span<const FrameSummary> summaries,
                   Stage stage, ChatCompleter& chat, double temperature) {
  if (summaries.empty()) return {};
  ChatRequest req;
  req.system_text = std::string(kSystemPrompt);
  req.user_text = std::string(instruction) + "\n" + join_texts(summaries);
  req.temperature = temperature;
  req.tag = stage;
  return std::string(trim(chat.chat_complete(req)));
}

}  // namespace

std::string build_long_term(std::span<const FrameSummary> retained, ChatCompleter& chat,
                            double temperature) {
  return digest(kLongTermPrompt, retained, Stage::kLongTerm, chat, temperature);
}

std::string build_short_term(const std::deque<FrameSummary>& short_buffer, ChatCompleter& chat,
                             double temperature) {
  const std::vector<FrameSummary> items(short_buffer.begin(), short_buffer.end());
  return digest(kShortTermPrompt, items, Stage::kShortTerm, chat, temperature);
}

}  // namespace monitor
