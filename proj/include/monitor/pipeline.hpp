#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monitor/config.hpp"
#include "monitor/domain.hpp"
#include "monitor/errors.hpp"
#include "monitor/memory.hpp"
#include "monitor/providers.hpp"
#include "monitor/scoring.hpp"

namespace monitor {

/// Cold-start exemplars. Text form, one per line:
///   queue <slot>: <caption>
///   memory: <summary text>
struct PrefillSpec {
  PrefillStrategy strategy = PrefillStrategy::kNone;
  std::map<std::size_t, std::string> queue_exemplars;
  std::vector<std::string> memory_exemplars;

  static PrefillSpec parse(std::string_view text, PrefillStrategy strategy);
  static PrefillSpec load(const std::filesystem::path& path, PrefillStrategy strategy);
};

/// Wall-clock milliseconds spent per stage of one frame, plus the
/// decision-period accounting L_total = T_p + T_d.
struct LatencyRecord {
  double capture_ms = 0.0;
  double clean_ms = 0.0;
  double summarize_ms = 0.0;
  double memory_ms = 0.0;
  double score_ms = 0.0;
  double predict_ms = 0.0;
  double t_p_ms = 0.0;
  double t_d_ms = 0.0;
  double l_total_ms = 0.0;

  /// Fills t_p (sum of stages), t_d and l_total.
  void finalize(double decision_period_ms);
};

struct ScoreRecord {
  std::string video_id;
  FrameIndex frame_index = 0;
  std::int64_t source_frame = 0;
  double time_s = 0.0;
  double raw = 0.0;
  double smoothed = 0.0;
  bool degraded = false;
  std::optional<Prediction> prediction_used;
  LatencyRecord latency;
};

/// Per-video mutable state. prev_* are all set iff a frame has been processed.
struct VideoPipelineState {
  PipelineConfig config;
  MemoryState memory;
  ScoringQueue queue;
  std::deque<RawCaptionSet> caption_history;
  std::optional<double> prev_score;
  std::optional<FrameSummary> prev_summary;
  std::optional<Prediction> prev_prediction;
  MemoryDigests prev_digests;

  explicit VideoPipelineState(const PipelineConfig& cfg);
};

/// Builds the initial state. Memory exemplars are embedded with `embedder`.
VideoPipelineState init_state(const PipelineConfig& config, const PrefillSpec& prefill,
                              TextEmbedder& embedder);

/// Shared, read-only inputs of every per-video pipeline.
struct PipelineContext {
  Providers providers;
  std::string priors_block;  // rendered priors, empty when none
  std::function<double()> now_ms;  // monotonic clock; steady_clock when empty

  double clock_ms() const;
};

/// Raised when a video cannot continue (captioning failed, or no summary
/// could be produced for the first frame).
struct VideoAborted : Error {
  using Error::Error;
};

/// Runs one frame through the causal stage order and returns its record.
/// Throws OrderError when frame.frame_index does not follow the previous frame.
ScoreRecord process_frame(VideoPipelineState& state, const FrameSample& frame,
                          const PipelineContext& ctx);

struct VideoResult {
  std::string video_id;
  std::vector<ScoreRecord> records;
  std::optional<std::string> error;  // set when the video aborted
};

struct RunOptions {
  bool realtime = false;
  std::function<void(const ScoreRecord&)> on_record;
};

VideoResult run_video(std::string video_id, const std::vector<FrameSample>& frames,
                      const PipelineConfig& config, const PrefillSpec& prefill,
                      const PipelineContext& ctx, const RunOptions& options = {});

struct VideoJob {
  std::string video_id;
  std::vector<FrameSample> frames;
};

struct LatencyReport {
  std::size_t n_records = 0;
  double pt_f_ms = 0.0;  // mean per-frame processing time
  double pt_s_ms = 0.0;  // pt_f * segment_length
  double t_d_ms = 0.0;
  double l_total_ms = 0.0;  // pt_f + t_d
  std::size_t segment_length = 200;
  LatencyRecord stage_means;
};

LatencyReport latency_report(const std::vector<ScoreRecord>& records,
                             std::size_t segment_length = 200);
std::string format_latency_report(const LatencyReport& r);

struct CorpusResult {
  std::vector<VideoResult> videos;  // sorted by video_id
  LatencyReport latency;
  std::size_t failed() const;
};

struct CorpusOptions {
  bool realtime = false;
  /// When set, each video's records are appended to <dir>/<video_id>.jsonl as they complete.
  std::optional<std::filesystem::path> scores_dir;
};

/// Runs every video with at most config.num_jobs videos in flight.
CorpusResult run_corpus(const std::vector<VideoJob>& videos, const PipelineConfig& config,
                        const PrefillSpec& prefill, const PipelineContext& ctx,
                        const CorpusOptions& options = {});

/// One JSON object per line; keys are sorted so equal records give equal bytes.
std::string record_to_json(const ScoreRecord& r);
ScoreRecord record_from_json(std::string_view line);
std::vector<ScoreRecord> read_score_file(const std::filesystem::path& path);
/// Drops latency fields so runs can be compared byte for byte.
std::string mask_latency(std::string_view line);

}  // namespace monitor
