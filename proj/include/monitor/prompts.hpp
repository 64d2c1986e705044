#pragma once

#include <string>
#include <string_view>

namespace monitor {

/// Fixed instruction texts. summary, predict_prefix and predict_suffix are
/// quoted verbatim from the original method; the rest are authored here.
struct PromptSet {
  std::string system;
  std::string summary;
  std::string predict_prefix;
  std::string predict_suffix;
  std::string scoring;
  std::string long_term;
  std::string short_term;

  static const PromptSet& standard();
};

inline constexpr std::string_view kSummaryPrompt =
    "Please summarize what happened in few sentences, based on the following temporal "
    "description of a scene.";

inline constexpr std::string_view kPredictPrefix =
    "If you are a law enforcement agency, predict what might happen next in this scene, taking "
    "into account possible suspicious activities or behaviors such as abuse, arrests, arson, "
    "assault, burglary, disorderly conduct, explosions, fights, robbery, shootings, theft, or "
    "vandalism. Provide a concise prediction based on the current context.";

inline constexpr std::string_view kPredictSuffix =
    "Please predict concisely the behavior or event likely to occur next in the scene, avoiding "
    "any additional explanations.";

inline constexpr std::string_view kScoringPrompt =
    "You are monitoring a surveillance video stream. Rate how anomalous the current scene is. "
    "Reply with a single number between 0.0 and 1.0 in steps of 0.1, where 0.0 means the scene "
    "is completely normal and 1.0 means the scene is certainly anomalous.";

inline constexpr std::string_view kLongTermPrompt =
    "Condense the following descriptions of earlier moments of the same scene into a short "
    "history of what has happened so far.";

inline constexpr std::string_view kShortTermPrompt =
    "Summarize the following descriptions of the most recent moments of the scene in one or two "
    "sentences.";

inline constexpr std::string_view kSystemPrompt =
    "You are an assistant that analyzes textual descriptions of surveillance video.";

inline constexpr std::string_view kScoreRetryLine = "Reply with only the number.";

inline constexpr std::string_view kNoPredictionFallback = "no notable change expected";

// Block headers of the assembled scoring prompt.
inline constexpr std::string_view kLongTermHeader = "Long-term memory:";
inline constexpr std::string_view kShortTermHeader = "Short-term memory:";
inline constexpr std::string_view kQueueHeader = "Scoring reference:";
inline constexpr std::string_view kPriorsHeader = "Anomaly definitions:";
inline constexpr std::string_view kSceneHeader = "Current scene:";
inline constexpr std::string_view kPredictionLabel = "Previous prediction: ";

}  // namespace monitor
