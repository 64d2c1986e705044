#include "monitor/domain.hpp"

#include <cmath>
#include <numeric>

#include "monitor/errors.hpp"

namespace monitor {

FrameSample make_frame(std::string video_id, FrameIndex frame_index,
                       double sample_period_s, double fps) {
  FrameSample frame;
  frame.time_s = static_cast<double>(frame_index) * sample_period_s;
  frame.source_frame = std::llround(frame.time_s * fps);
  frame.image_ref = video_id + "#" + std::to_string(frame_index);
  frame.video_id = std::move(video_id);
  frame.frame_index = frame_index;
  return frame;
}

std::size_t sampled_frame_count(std::int64_t total_frames, double sample_period_s,
                                double fps) {
  std::size_t n = 0;
  while (std::llround(static_cast<double>(n) * sample_period_s * fps) < total_frames) {
    ++n;
  }
  return n;
}

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw PreconditionError("embedding has zero dimension");
  double norm2 = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw PreconditionError("embedding has non-finite value");
    norm2 += v * v;
  }
  if (norm2 == 0.0) throw PreconditionError("embedding has zero norm");
  // Already unit-norm up to rounding: keep verbatim so renormalization is idempotent.
  if (std::abs(norm2 - 1.0) <= 1e-12) return;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : values_) v *= inv;
}

double Embedding::dot(const Embedding& other) const {
  if (other.dim() != dim()) {
    throw PreconditionError("embedding dimension mismatch: " + std::to_string(dim()) +
                            " vs " + std::to_string(other.dim()));
  }
  return std::inner_product(values_.begin(), values_.end(), other.values_.begin(), 0.0);
}

void check_caption_set(const RawCaptionSet& set, std::size_t n_captioners) {
  if (set.captions.size() != n_captioners) {
    throw PreconditionError("frame " + std::to_string(set.frame_index) + " has " +
                            std::to_string(set.captions.size()) + " captions, expected " +
                            std::to_string(n_captioners));
  }
  for (const auto& c : set.captions) {
    if (c.empty()) {
      throw PreconditionError("frame " + std::to_string(set.frame_index) +
                              " has an empty caption");
    }
  }
}

void validate_annotation(const VideoAnnotation& ann) {
  const auto fail = [&](const std::string& what) {
    throw InputError("annotation for " + ann.video_id + ": " + what);
  };
  if (ann.total_frames <= 0) fail("total_frames must be positive");
  if (!(ann.fps > 0.0)) fail("fps must be positive");
  if (ann.is_normal() && !ann.anomalous_intervals.empty()) {
    fail("Normal video carries anomalous intervals");
  }
  std::int64_t prev_end = -1;
  for (const auto& iv : ann.anomalous_intervals) {
    if (iv.start < 0 || iv.end < iv.start) fail("malformed interval");
    if (iv.end >= ann.total_frames) fail("interval exceeds total_frames");
    if (iv.start <= prev_end) fail("intervals overlap or are unsorted");
    prev_end = iv.end;
  }
}

}  // namespace monitor
