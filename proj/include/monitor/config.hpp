#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace monitor {

enum class PrefillStrategy { kNone, kQueueOnly, kMemoryOnly, kBoth };

std::string_view to_string(PrefillStrategy s);
std::optional<PrefillStrategy> parse_prefill_strategy(std::string_view s);

/// Component toggles. The first five are the W/S/A/M/P ablation axes; the
/// last three refine M (long-term digest, short-term digest, forgetting gate).
struct FeatureFlags {
  bool enable_weighting = true;
  bool enable_queue = true;
  bool enable_priors = true;
  bool enable_memory = true;
  bool enable_prediction = true;
  bool enable_long_term = true;
  bool enable_short_term = true;
  bool enable_forgetting_gate = true;

  bool operator==(const FeatureFlags&) const = default;
};

struct PipelineConfig {
  double alpha = 0.7;
  double theta = 0.5;
  double temperature = 0.6;
  int window_w = 10;
  int short_window = 2;
  int top_k = 10;
  int n_captioners = 5;
  int caption_history_frames = 5;
  double sample_period_s = 0.6;
  int num_jobs = 190;
  double queue_granularity = 0.1;
  PrefillStrategy prefill_strategy = PrefillStrategy::kBoth;
  FeatureFlags flags;

  /// Number of scoring-queue slots: 1/queue_granularity + 1.
  std::size_t queue_slots() const;
  double decision_period_ms() const { return sample_period_s * 1000.0; }

  bool operator==(const PipelineConfig&) const = default;
};

/// Returns cfg unchanged when every invariant holds; otherwise throws
/// ConfigError naming the first violated invariant.
PipelineConfig validate_config(const PipelineConfig& cfg);

/// Parses the flat `key=value` format. Absent keys keep their defaults;
/// unknown keys, duplicate keys and malformed values are ConfigErrors.
/// The result is validated.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);

/// Writes every field, one per line, doubles in shortest round-trip form.
std::string serialize_config(const PipelineConfig& cfg);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace monitor
