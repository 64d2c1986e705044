#include "monitor/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "monitor/errors.hpp"
#include "monitor/util.hpp"

namespace monitor {

using nlohmann::json;

namespace {

std::string strip_extension(const std::string& name) {
  const auto dot = name.rfind('.');
  return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

std::int64_t parse_int64(const std::string& tok, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(tok, &used);
    if (used != tok.size()) throw InputError("");
    return v;
  } catch (const std::exception&) {
    throw InputError("bad integer '" + tok + "' in " + what);
  }
}

}  // namespace

std::map<std::string, VideoAnnotation> parse_annotations(std::string_view text) {
  std::map<std::string, VideoAnnotation> out;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = split_whitespace(line);
    const auto where = "annotation line " + std::to_string(line_no);
    if (tok.size() < 2 || (tok.size() - 2) % 2 != 0) {
      throw InputError(where + ": expected '<video> <label> <start> <end> ...'");
    }
    VideoAnnotation ann;
    ann.video_id = strip_extension(tok[0]);
    ann.label = tok[1];
    for (std::size_t i = 2; i < tok.size(); i += 2) {
      const auto s = parse_int64(tok[i], where);
      const auto e = parse_int64(tok[i + 1], where);
      if (s == -1 && e == -1) continue;
      ann.anomalous_intervals.push_back({s, e});
    }
    std::sort(ann.anomalous_intervals.begin(), ann.anomalous_intervals.end(),
              [](const auto& a, const auto& b) { return a.start < b.start; });
    if (!out.emplace(ann.video_id, ann).second) {
      throw InputError(where + ": duplicate video " + ann.video_id);
    }
  }
  return out;
}

std::map<std::string, VideoMetadata> parse_metadata(std::string_view text) {
  std::map<std::string, VideoMetadata> out;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = split_whitespace(line);
    const auto where = "metadata line " + std::to_string(line_no);
    if (tok.size() != 3) throw InputError(where + ": expected '<video_id> <total_frames> <fps>'");
    VideoMetadata md;
    md.total_frames = parse_int64(tok[1], where);
    try {
      md.fps = std::stod(tok[2]);
    } catch (const std::exception&) {
      throw InputError(where + ": bad fps '" + tok[2] + "'");
    }
    out[strip_extension(tok[0])] = md;
  }
  return out;
}

std::map<std::string, VideoAnnotation> load_annotations(const std::filesystem::path& annotations,
                                                        const std::filesystem::path& metadata) {
  auto anns = parse_annotations(read_file(annotations));
  const auto meta = parse_metadata(read_file(metadata));
  for (auto& [id, ann] : anns) {
    auto it = meta.find(id);
    if (it == meta.end()) throw InputError("no metadata for annotated video " + id);
    ann.total_frames = it->second.total_frames;
    ann.fps = it->second.fps;
    validate_annotation(ann);
  }
  return anns;
}

std::vector<std::uint8_t> labels_from_annotation(const VideoAnnotation& ann) {
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(std::max<std::int64_t>(ann.total_frames, 0)), 0);
  for (const auto& iv : ann.anomalous_intervals) {
    const auto end = std::min<std::int64_t>(iv.end, ann.total_frames - 1);
    for (auto f = std::max<std::int64_t>(iv.start, 0); f <= end; ++f) {
      labels[static_cast<std::size_t>(f)] = 1;
    }
  }
  return labels;
}

std::vector<double> expand_scores(std::span<const ScoreRecord> records, std::int64_t total_frames,
                                  bool use_raw) {
  if (records.empty()) throw EmptySeries("expand_scores needs at least one record");
  const auto value = [&](const ScoreRecord& r) { return use_raw ? r.raw : r.smoothed; };
  std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(total_frames, 0)));
  std::size_t next = 0;
  double current = value(records.front());
  for (std::int64_t f = 0; f < total_frames; ++f) {
    while (next < records.size() && records[next].source_frame <= f) current = value(records[next++]);
    out[static_cast<std::size_t>(f)] = current;
  }
  return out;
}

namespace {

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw PreconditionError("scores and labels differ in length");
  }
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return idx;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const auto order = order_by_score(scores, false);
  // Twice the Mann-Whitney credit, kept integral: 2 per won pair, 1 per tie.
  unsigned long long credit2 = 0;
  unsigned long long neg_below = 0;
  unsigned long long n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    unsigned long long pos = 0;
    unsigned long long neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? pos : neg) += 1;
      ++j;
    }
    credit2 += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    n_pos += pos;
    i = j;
  }
  if (n_pos == 0 || neg_below == 0) throw UndefinedMetric("ROC-AUC needs both classes");
  return static_cast<double>(credit2) / (2.0 * static_cast<double>(n_pos) *
                                         static_cast<double>(neg_below));
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const auto n_pos = static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; }));
  if (n_pos == 0) throw UndefinedMetric("average precision needs at least one positive");
  const auto order = order_by_score(scores, true);
  std::size_t tp = 0;
  std::size_t seen = 0;
  double ap = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t group_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++group_tp;
      ++j;
    }
    tp += group_tp;
    seen = j;
    if (group_tp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(seen);
      ap += static_cast<double>(group_tp) / static_cast<double>(n_pos) * precision;
    }
    i = j;
  }
  return ap;
}

MetricSummary pooled_metrics(std::span<const LabeledSeries> series) {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& s : series) {
    scores.insert(scores.end(), s.scores.begin(), s.scores.end());
    labels.insert(labels.end(), s.labels.begin(), s.labels.end());
  }
  MetricSummary m;
  m.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
  m.n_neg = labels.size() - m.n_pos;
  if (m.n_pos > 0 && m.n_neg > 0) m.auc = roc_auc(scores, labels);
  if (m.n_pos > 0) m.ap = average_precision(scores, labels);
  return m;
}

std::size_t length_bucket(double duration_s) {
  if (duration_s <= 30.0) return 0;
  if (duration_s <= 120.0) return 1;
  if (duration_s <= 300.0) return 2;
  if (duration_s <= 600.0) return 3;
  return 4;
}

std::vector<BucketRow> bucket_report(std::span<const LabeledSeries> series) {
  std::vector<std::vector<LabeledSeries>> grouped(kLengthBuckets.size());
  for (const auto& s : series) grouped[length_bucket(s.duration_s)].push_back(s);
  std::vector<BucketRow> rows;
  for (std::size_t b = 0; b < kLengthBuckets.size(); ++b) {
    BucketRow row;
    row.bucket = kLengthBuckets[b];
    row.n_videos = grouped[b].size();
    row.metrics = pooled_metrics(grouped[b]);
    rows.push_back(std::move(row));
  }
  return rows;
}

MetricReport evaluate(std::span<const LabeledSeries> series) {
  std::vector<LabeledSeries> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  MetricReport report;
  report.overall = pooled_metrics(sorted);
  for (const auto& s : sorted) {
    report.per_video.emplace_back(s.video_id, pooled_metrics(std::span(&s, 1)));
  }
  report.buckets = bucket_report(sorted);
  return report;
}

namespace {

json metrics_json(const MetricSummary& m) {
  return {{"auc", m.auc ? json(*m.auc) : json(nullptr)},
          {"ap", m.ap ? json(*m.ap) : json(nullptr)},
          {"n_pos", m.n_pos},
          {"n_neg", m.n_neg}};
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
  json per_video = json::array();
  for (const auto& [id, m] : report.per_video) {
    auto row = metrics_json(m);
    row["video_id"] = id;
    per_video.push_back(row);
  }
  json buckets = json::array();
  for (const auto& b : report.buckets) {
    auto row = metrics_json(b.metrics);
    row["bucket"] = b.bucket;
    row["n_videos"] = b.n_videos;
    buckets.push_back(row);
  }
  return json{{"overall", metrics_json(report.overall)},
              {"per_video", per_video},
              {"buckets", buckets},
              {"missing_videos", report.missing_videos}}
             .dump(2) +
         "\n";
}

std::string format_report(const MetricReport& report) {
  std::ostringstream out;
  out << "overall  AUC=" << pct(report.overall.auc) << "  AP=" << pct(report.overall.ap)
      << "  frames pos=" << report.overall.n_pos << " neg=" << report.overall.n_neg << "\n\n";
  out << "video\tAUC\tAP\tpos\tneg\n";
  for (const auto& [id, m] : report.per_video) {
    out << id << '\t' << pct(m.auc) << '\t' << pct(m.ap) << '\t' << m.n_pos << '\t' << m.n_neg
        << '\n';
  }
  out << "\nlength\tvideos\tAUC\n";
  for (const auto& b : report.buckets) {
    out << b.bucket << '\t' << b.n_videos << '\t' << pct(b.metrics.auc) << '\n';
  }
  for (const auto& id : report.missing_videos) out << "missing scores: " << id << '\n';
  return out.str();
}

}  // namespace monitor
