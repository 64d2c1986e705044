#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace monitor {

/// Index into the stride-sampled stream. Prefilled memory entries use -1.
using FrameIndex = std::int64_t;

inline constexpr FrameIndex kPrefillFrame = -1;

struct FrameSample {
  std::string video_id;
  FrameIndex frame_index = 0;
  std::int64_t source_frame = 0;
  double time_s = 0.0;
  std::string image_ref;

  bool operator==(const FrameSample&) const = default;
};

/// Builds the sampled frame for `frame_index` at the given decision period.
/// source_frame = round(frame_index * period * fps).
FrameSample make_frame(std::string video_id, FrameIndex frame_index,
                       double sample_period_s, double fps);

/// Number of sampled frames whose source_frame falls inside [0, total_frames).
std::size_t sampled_frame_count(std::int64_t total_frames, double sample_period_s,
                                double fps);

/// Unit L2-norm embedding. Construction normalizes; a zero vector is rejected.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::span<const double> values() const { return values_; }

  /// Plain dot product; equals cosine similarity because both sides are unit-norm.
  double dot(const Embedding& other) const;

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

struct RawCaptionSet {
  FrameIndex frame_index = 0;
  std::vector<std::string> captions;

  bool operator==(const RawCaptionSet&) const = default;
};

/// Throws PreconditionError unless there are exactly n_captioners non-empty captions.
void check_caption_set(const RawCaptionSet& set, std::size_t n_captioners);

struct CandidateCaption {
  std::string text;
  double similarity = 0.0;
  FrameIndex origin_frame = 0;
  std::size_t origin_channel = 0;

  bool operator==(const CandidateCaption&) const = default;
};

struct FrameSummary {
  FrameIndex frame_index = 0;
  std::string text;
  Embedding embedding;

  bool operator==(const FrameSummary&) const = default;
};

/// Inclusive original-frame interval.
struct FrameInterval {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool operator==(const FrameInterval&) const = default;
};

struct VideoAnnotation {
  std::string video_id;
  std::int64_t total_frames = 0;
  double fps = 0.0;
  std::string label = "Normal";
  std::vector<FrameInterval> anomalous_intervals;

  bool is_normal() const { return label == "Normal"; }
  double duration_s() const { return static_cast<double>(total_frames) / fps; }
};

/// Throws InputError when intervals overlap, are unsorted, or leave [0, total_frames).
void validate_annotation(const VideoAnnotation& ann);

}  // namespace monitor
