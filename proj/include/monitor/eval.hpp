#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monitor/domain.hpp"
#include "monitor/pipeline.hpp"

namespace monitor {

/// Temporal annotations, one video per line:
///   <video_name> <label> <s1> <e1> [<s2> <e2> ...]
/// `-1 -1` pairs are unused slots and are dropped. The video id is the file
/// name without extension. fps/total_frames come from the metadata sidecar.
std::map<std::string, VideoAnnotation> parse_annotations(std::string_view text);

struct VideoMetadata {
  std::int64_t total_frames = 0;
  double fps = 0.0;
};

/// Sidecar lines: <video_id> <total_frames> <fps>; `#` comments.
std::map<std::string, VideoMetadata> parse_metadata(std::string_view text);

/// Joins annotations with metadata and validates each; videos lacking
/// metadata throw InputError.
std::map<std::string, VideoAnnotation> load_annotations(const std::filesystem::path& annotations,
                                                        const std::filesystem::path& metadata);

/// Per-original-frame 0/1 labels, 1 inside any inclusive interval.
std::vector<std::uint8_t> labels_from_annotation(const VideoAnnotation& ann);

/// Hold-last expansion of sampled scores to every original frame. Frames
/// before the first record take its score; output length is total_frames.
std::vector<double> expand_scores(std::span<const ScoreRecord> records, std::int64_t total_frames,
                                  bool use_raw = false);

/// Mann-Whitney ROC-AUC with 0.5 credit for ties. Throws UndefinedMetric
/// unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Step-integrated average precision over descending thresholds, tied
/// scores processed as one group. Throws UndefinedMetric without positives.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct LabeledSeries {
  std::string video_id;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  double duration_s = 0.0;
};

struct MetricSummary {
  std::optional<double> auc;
  std::optional<double> ap;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Metrics over the concatenation of the given series; undefined metrics stay empty.
MetricSummary pooled_metrics(std::span<const LabeledSeries> series);

inline constexpr std::array<const char*, 5> kLengthBuckets = {
    "<=30s", "30s-2min", "2-5min", "5-10min", ">10min"};

/// Bucket index by duration: <=30 s, (30 s, 2 min], (2, 5 min], (5, 10 min], > 10 min.
std::size_t length_bucket(double duration_s);

struct BucketRow {
  std::string bucket;
  std::size_t n_videos = 0;
  MetricSummary metrics;
};

std::vector<BucketRow> bucket_report(std::span<const LabeledSeries> series);

struct MetricReport {
  MetricSummary overall;
  std::vector<std::pair<std::string, MetricSummary>> per_video;
  std::vector<BucketRow> buckets;
  std::vector<std::string> missing_videos;
};

MetricReport evaluate(std::span<const LabeledSeries> series);
std::string report_to_json(const MetricReport& report);
std::string format_report(const MetricReport& report);

}  // namespace monitor
