#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monitor/domain.hpp"
#include "monitor/providers.hpp"

namespace monitor {

struct AnomalyPriors {
  std::vector<std::pair<std::string, std::string>> entries;  // (category, definition)

  /// Parses "Category: definition" lines; `#` starts a comment line.
  static AnomalyPriors parse(std::string_view text);
  static AnomalyPriors load(const std::filesystem::path& path);
};

/// Throws InputError on duplicate categories or empty definitions.
void validate_priors(const AnomalyPriors& priors);

/// Header line followed by one "Category: definition" line per entry, in order.
std::string render_priors(const AnomalyPriors& priors);

/// Slot index for a score on the queue grid: round-half-up of a / granularity.
std::size_t quantize_score(double a, double granularity = 0.1);

/// Text label of a queue slot, e.g. "0.3" on the 0.1 grid.
std::string slot_label(std::size_t slot, std::size_t slot_count);

/// One slot per grid score, each holding the most recent summary that
/// received that score.
class ScoringQueue {
 public:
  explicit ScoringQueue(std::size_t slot_count = 11);

  /// Stores `summary_text` in the slot of `score`; no other slot changes.
  void update(double score, std::string summary_text);
  /// Direct slot assignment, used by prefill. Throws PrefillError when out of range.
  void set_slot(std::size_t slot, std::string text);

  std::size_t size() const { return slots_.size(); }
  double granularity() const { return 1.0 / static_cast<double>(slots_.size() - 1); }
  const std::optional<std::string>& slot(std::size_t i) const { return slots_.at(i); }
  const std::vector<std::optional<std::string>>& slots() const { return slots_; }
  std::size_t occupied() const;

  /// One line per occupied slot, ascending: "score=<label> → <summary>".
  std::string render() const;

  bool operator==(const ScoringQueue&) const = default;

 private:
  std::vector<std::optional<std::string>> slots_;
};

struct Prediction {
  FrameIndex frame_index = 0;
  std::string text;

  bool operator==(const Prediction&) const = default;
};

/// Text blocks of the scoring prompt. Empty strings mark omitted blocks.
struct ScoringInputs {
  std::string instruction;
  std::string long_term;
  std::string short_term;
  std::string queue;
  std::string priors;
  std::string summary;
  std::optional<std::string> prev_prediction;
};

/// Joins the non-empty blocks, separated by blank lines, in the order
/// instruction, long-term memory, short-term memory, queue, priors, current
/// scene, previous prediction. Memory, queue and scene blocks get a header line.
ChatRequest assemble_scoring_prompt(const ScoringInputs& in, double temperature);

/// First decimal literal in [0,1] found in `response`. Throws ParseError when none.
double parse_score(std::string_view response);

/// Asks the chat service what happens next in the scene; an empty reply is
/// replaced by a fixed fallback.
Prediction predict_next(const FrameSummary& summary, ChatCompleter& chat, double temperature);

/// alpha * a_i + (1 - alpha) * a_prev.
double smooth(double a_i, double a_prev, double alpha);

}  // namespace monitor
