#include "monitor/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "monitor/caches.hpp"
#include "monitor/errors.hpp"
#include "monitor/eval.hpp"
#include "monitor/http_providers.hpp"
#include "monitor/mock_providers.hpp"
#include "monitor/replay.hpp"
#include "monitor/scoring.hpp"
#include "monitor/util.hpp"

#ifndef MONITOR_DATA_DIR
#define MONITOR_DATA_DIR ""
#endif

namespace monitor {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ProviderMode m) {
  switch (m) {
    case ProviderMode::kLive: return "live";
    case ProviderMode::kRecord: return "record";
    case ProviderMode::kReplay: return "replay";
    case ProviderMode::kMock: return "mock";
  }
  return "mock";
}

std::optional<ProviderMode> parse_provider_mode(std::string_view s) {
  for (auto m : {ProviderMode::kLive, ProviderMode::kRecord, ProviderMode::kReplay, ProviderMode::kMock}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

namespace {

ProviderMode mode_or_throw(std::string_view s) {
  auto m = parse_provider_mode(s);
  if (!m) throw ConfigError("unknown provider mode '" + std::string(s) + "'");
  return *m;
}

std::optional<fs::path> optional_path(const json& doc, const char* key, const fs::path& base) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  const auto text = doc[key].get<std::string>();
  // An empty string or "none" explicitly disables an input.
  if (text.empty() || text == "none") return fs::path();
  const fs::path p(text);
  return p.is_absolute() ? p : base / p;
}

json path_json(const std::optional<fs::path>& p) {
  if (!p) return nullptr;
  return p->empty() ? json("none") : json(fs::absolute(*p).lexically_normal().string());
}

std::optional<fs::path> shipped_default(const char* relative) {
  const fs::path dir(MONITOR_DATA_DIR);
  if (dir.empty()) return std::nullopt;
  auto p = dir / relative;
  if (fs::is_regular_file(p)) return p;
  return std::nullopt;
}

/// Override, else manifest, else shipped default. An empty path means "none".
std::optional<fs::path> pick_input(const std::optional<fs::path>& override_path,
                                   const std::optional<fs::path>& manifest_path,
                                   const char* default_relative) {
  if (override_path) {
    const auto s = override_path->string();
    if (s.empty() || s == "none") return fs::path();
    return override_path;
  }
  if (manifest_path) return manifest_path;
  return shipped_default(default_relative);
}

}  // namespace

RunManifest RunManifest::parse(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad manifest: ") + e.what());
  }
  RunManifest m;
  try {
    m.config = optional_path(doc, "config", base_dir);
    m.priors = optional_path(doc, "priors", base_dir);
    m.prefill = optional_path(doc, "prefill", base_dir);
    m.mock_script = optional_path(doc, "mock_script", base_dir);
    m.cache_dir = optional_path(doc, "cache_dir", base_dir);
    m.output_dir = optional_path(doc, "output_dir", base_dir);
    m.annotations = optional_path(doc, "annotations", base_dir);
    m.metadata = optional_path(doc, "metadata", base_dir);
    if (doc.contains("mode")) m.mode = mode_or_throw(doc["mode"].get<std::string>());
    m.embed_dim = doc.value("embed_dim", std::size_t{128});
    std::set<std::string> seen;
    for (const auto& v : doc.at("videos")) {
      ManifestVideo mv;
      mv.video_id = v.at("video_id").get<std::string>();
      if (!seen.insert(mv.video_id).second) throw InputError("duplicate video " + mv.video_id);
      mv.captions = *optional_path(v, "captions", base_dir);
      mv.embeddings = optional_path(v, "embeddings", base_dir);
      if (mv.embeddings && mv.embeddings->empty()) mv.embeddings.reset();
      mv.total_frames = v.at("total_frames").get<std::int64_t>();
      mv.fps = v.at("fps").get<double>();
      if (mv.total_frames <= 0 || !(mv.fps > 0.0)) {
        throw InputError("video " + mv.video_id + ": total_frames and fps must be positive");
      }
      m.videos.push_back(std::move(mv));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("bad manifest: ") + e.what());
  }
  return m;
}

RunManifest RunManifest::load(const fs::path& path) {
  return parse(read_file(path), fs::absolute(path).parent_path());
}

std::string RunManifest::to_json() const {
  json videos_json = json::array();
  for (const auto& v : videos) {
    videos_json.push_back({{"video_id", v.video_id},
                           {"captions", path_json(v.captions)},
                           {"embeddings", path_json(v.embeddings)},
                           {"total_frames", v.total_frames},
                           {"fps", v.fps}});
  }
  return json{{"config", path_json(config)},
              {"priors", path_json(priors)},
              {"prefill", path_json(prefill)},
              {"mode", to_string(mode)},
              {"mock_script", path_json(mock_script)},
              {"cache_dir", path_json(cache_dir)},
              {"output_dir", path_json(output_dir)},
              {"annotations", path_json(annotations)},
              {"metadata", path_json(metadata)},
              {"embed_dim", embed_dim},
              {"videos", videos_json}}
             .dump(2) +
         "\n";
}

RunSetup resolve_run(const RunManifest& manifest, const RunOverrides& overrides) {
  RunSetup s;
  s.manifest = manifest;
  auto& m = s.manifest;
  if (overrides.mode) m.mode = mode_or_throw(*overrides.mode);
  if (overrides.record_from) {
    s.record_from = mode_or_throw(*overrides.record_from);
    if (s.record_from != ProviderMode::kLive && s.record_from != ProviderMode::kMock) {
      throw ConfigError("--record-from must be live or mock");
    }
  } else {
    s.record_from = ProviderMode::kLive;
  }

  if (overrides.config) m.config = overrides.config;
  s.config = (m.config && !m.config->empty()) ? load_config(m.config->string()) : PipelineConfig{};
  if (overrides.num_jobs) s.config.num_jobs = *overrides.num_jobs;
  s.config = validate_config(s.config);

  m.prefill = pick_input(overrides.prefill, m.prefill, "prefill/default_prefill.txt");
  s.prefill = (m.prefill && !m.prefill->empty())
                  ? PrefillSpec::load(*m.prefill, s.config.prefill_strategy)
                  : PrefillSpec{s.config.prefill_strategy, {}, {}};

  m.priors = pick_input(overrides.priors, m.priors, "priors/default_priors.txt");
  if (m.priors && !m.priors->empty()) {
    const auto priors = AnomalyPriors::load(*m.priors);
    validate_priors(priors);
    s.priors_block = render_priors(priors);
  }

  if (overrides.out) m.output_dir = overrides.out;
  if (!m.output_dir || m.output_dir->empty()) {
    throw ConfigError("no output directory: pass --out or set output_dir in the manifest");
  }
  s.out_dir = *m.output_dir;
  s.realtime = overrides.realtime;

  if (m.mode == ProviderMode::kReplay) {
    if (!m.cache_dir || !fs::is_directory(*m.cache_dir)) {
      throw InputError("replay mode needs an existing cache_dir");
    }
  }
  if (m.mode == ProviderMode::kRecord && (!m.cache_dir || m.cache_dir->empty())) {
    throw ConfigError("record mode needs cache_dir in the manifest");
  }
  if (m.videos.empty()) throw InputError("manifest lists no videos");
  for (const auto& v : m.videos) {
    if (!fs::is_regular_file(v.captions)) {
      throw InputError("video " + v.video_id + ": caption cache missing: " + v.captions.string());
    }
    const bool has_embeddings = v.embeddings && fs::is_regular_file(*v.embeddings);
    if (!has_embeddings && m.mode != ProviderMode::kMock) {
      throw InputError("video " + v.video_id + ": embedding cache missing" +
                       (v.embeddings ? ": " + v.embeddings->string() : std::string()));
    }
  }
  return s;
}

namespace {

/// Cached embeddings where a file exists, caption-derived ones elsewhere.
class MixedImageEmbedder final : public ImageEmbedder {
 public:
  MixedImageEmbedder(std::shared_ptr<CachedImageEmbedder> cached, std::set<std::string> cached_ids,
                     std::shared_ptr<ImageEmbedder> fallback)
      : cached_(std::move(cached)), cached_ids_(std::move(cached_ids)), fallback_(std::move(fallback)) {}

  Embedding embed_image(const FrameSample& frame) override {
    if (cached_ids_.count(frame.video_id)) return cached_->embed_image(frame);
    return fallback_->embed_image(frame);
  }

 private:
  std::shared_ptr<CachedImageEmbedder> cached_;
  std::set<std::string> cached_ids_;
  std::shared_ptr<ImageEmbedder> fallback_;
};

struct ModelServices {
  std::shared_ptr<TextEmbedder> text;
  std::shared_ptr<ChatCompleter> chat;
};

ModelServices direct_services(ProviderMode mode, const RunManifest& m) {
  if (mode == ProviderMode::kLive) {
    return {std::make_shared<HttpTextEmbedder>(Endpoint::from_env("MONITOR_EMBED")),
            std::make_shared<HttpChatClient>(Endpoint::from_env("MONITOR_CHAT"))};
  }
  auto chat = (m.mock_script && !m.mock_script->empty())
                  ? ScriptedChat::from_json(read_file(*m.mock_script))
                  : ScriptedChat::keyword_default();
  return {std::make_shared<HashEmbedder>(m.embed_dim), std::make_shared<ScriptedChat>(std::move(chat))};
}

}  // namespace

Providers build_providers(const RunSetup& setup) {
  const auto& m = setup.manifest;
  ModelServices services;
  switch (m.mode) {
    case ProviderMode::kLive:
    case ProviderMode::kMock:
      services = direct_services(m.mode, m);
      break;
    case ProviderMode::kRecord: {
      auto cache = std::make_shared<ReplayCache>(*m.cache_dir);
      auto inner = direct_services(setup.record_from, m);
      services = {std::make_shared<RecordingTextEmbedder>(inner.text, cache),
                  std::make_shared<RecordingChat>(inner.chat, cache)};
      break;
    }
    case ProviderMode::kReplay: {
      auto cache = ReplayCache::open_existing(*m.cache_dir);
      services = {std::make_shared<ReplayTextEmbedder>(cache), std::make_shared<ReplayChat>(cache)};
      break;
    }
  }

  auto captioner = std::make_shared<CachedCaptioner>(static_cast<std::size_t>(setup.config.n_captioners));
  auto cached = std::make_shared<CachedImageEmbedder>();
  std::set<std::string> cached_ids;
  for (const auto& v : m.videos) {
    auto captions = CaptionCache::load(v.captions);
    captions.video_id = v.video_id;
    captioner->add(std::move(captions));
    if (v.embeddings && fs::is_regular_file(*v.embeddings)) {
      auto emb = EmbeddingCache::load(*v.embeddings);
      emb.video_id = v.video_id;
      cached->add(std::move(emb));
      cached_ids.insert(v.video_id);
    }
  }
  Providers p;
  p.captioner = captioner;
  p.text_embedder = services.text;
  p.chat = services.chat;
  if (cached_ids.size() == m.videos.size()) {
    p.image_embedder = cached;
  } else {
    p.image_embedder = std::make_shared<MixedImageEmbedder>(
        cached, std::move(cached_ids), std::make_shared<CaptionImageEmbedder>(captioner, services.text));
  }
  return p;
}

std::vector<VideoJob> make_jobs(const RunManifest& manifest, double sample_period_s) {
  std::vector<VideoJob> jobs;
  for (const auto& v : manifest.videos) {
    VideoJob job{v.video_id, {}};
    const auto n = sampled_frame_count(v.total_frames, sample_period_s, v.fps);
    for (std::size_t i = 0; i < n; ++i) {
      job.frames.push_back(make_frame(v.video_id, static_cast<FrameIndex>(i), sample_period_s, v.fps));
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

namespace {

FeatureFlags all_off() {
  FeatureFlags f;
  f.enable_weighting = f.enable_queue = f.enable_priors = f.enable_memory = f.enable_prediction = false;
  f.enable_long_term = f.enable_short_term = f.enable_forgetting_gate = false;
  return f;
}

AblationRow parse_row(std::string_view text) {
  const std::string label(trim(text));
  if (label == "none") return {label, all_off()};
  auto f = all_off();
  for (std::size_t i = 0; i < label.size(); ++i) {
    const char c = label[i];
    switch (c) {
      case 'W': f.enable_weighting = true; break;
      case 'S': f.enable_queue = true; break;
      case 'A': f.enable_priors = true; break;
      case 'P': f.enable_prediction = true; break;
      case 'M': {
        f.enable_memory = true;
        if (i + 1 < label.size() && label[i + 1] == '[') {
          const auto close = label.find(']', i);
          if (close == std::string::npos) throw ConfigError("unclosed '[' in ablation row " + label);
          for (char part : label.substr(i + 2, close - i - 2)) {
            if (part == 'L') f.enable_long_term = true;
            else if (part == 'S') f.enable_short_term = true;
            else if (part == 'G') f.enable_forgetting_gate = true;
            else throw ConfigError("bad memory part '" + std::string(1, part) + "' in " + label);
          }
          i = close;
        } else {
          f.enable_long_term = f.enable_short_term = f.enable_forgetting_gate = true;
        }
        break;
      }
      default:
        throw ConfigError("bad ablation row '" + label + "'");
    }
  }
  if (label.empty()) throw ConfigError("empty ablation row");
  return {label, f};
}

std::string row_dir_name(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (c == '[') out += '-';
    else if (c != ']') out += c;
  }
  return out;
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

fs::path resolve_scores_dir(const fs::path& p) {
  if (fs::is_directory(p / "scores")) return p / "scores";
  return p;
}

int report_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << '\n';
  return kExitInput;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const json::exception& e) {
    return report_error(err, e);
  } catch (const fs::filesystem_error& e) {
    return report_error(err, e);
  }
}

json latency_json(const LatencyReport& r) {
  const auto& m = r.stage_means;
  return {{"n_records", r.n_records},
          {"pt_f_ms", r.pt_f_ms},
          {"pt_s_ms", r.pt_s_ms},
          {"segment_length", r.segment_length},
          {"t_d_ms", r.t_d_ms},
          {"l_total_ms", r.l_total_ms},
          {"stage_means_ms",
           {{"capture", m.capture_ms},
            {"clean", m.clean_ms},
            {"summarize", m.summarize_ms},
            {"memory", m.memory_ms},
            {"score", m.score_ms},
            {"predict", m.predict_ms}}}};
}

PipelineContext make_context(const RunSetup& setup) {
  PipelineContext ctx;
  ctx.providers = build_providers(setup);
  ctx.priors_block = setup.priors_block;
  return ctx;
}

}  // namespace

std::vector<AblationRow> table4_rows() {
  return {parse_row("none"), parse_row("W"), parse_row("S"), parse_row("A"),
          parse_row("M"),    parse_row("P"), parse_row("WSAMP")};
}

std::vector<AblationRow> table5_rows() {
  return {parse_row("M[L]"), parse_row("M[S]"), parse_row("M[LG]"), parse_row("M[LSG]")};
}

std::vector<AblationRow> parse_ablation_rows(std::string_view spec) {
  std::vector<AblationRow> rows;
  std::string token;
  std::stringstream ss{std::string(spec)};
  while (std::getline(ss, token, ',')) {
    const auto t = std::string(trim(token));
    if (t.empty()) continue;
    if (t == "table4" || t == "table5") {
      auto preset = t == "table4" ? table4_rows() : table5_rows();
      rows.insert(rows.end(), preset.begin(), preset.end());
    } else {
      rows.push_back(parse_row(t));
    }
  }
  if (rows.empty()) throw ConfigError("no ablation rows given");
  return rows;
}

LabeledSeries label_series(const std::string& video_id, std::span<const ScoreRecord> records,
                           const VideoAnnotation& annotation, bool use_raw) {
  LabeledSeries s;
  s.video_id = video_id;
  s.scores = expand_scores(records, annotation.total_frames, use_raw);
  s.labels = labels_from_annotation(annotation);
  s.duration_s = annotation.duration_s();
  return s;
}

int cmd_run(const fs::path& manifest_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const auto setup = resolve_run(RunManifest::load(manifest_path), overrides);
    const auto ctx = make_context(setup);
    const auto jobs = make_jobs(setup.manifest, setup.config.sample_period_s);
    CorpusOptions options;
    options.realtime = setup.realtime;
    options.scores_dir = setup.out_dir / "scores";
    const auto corpus = run_corpus(jobs, setup.config, setup.prefill, ctx, options);

    // Provenance: the effective config plus a manifest pointing at it.
    write_file_atomic(setup.out_dir / "effective.conf", serialize_config(setup.config));
    auto effective = setup.manifest;
    effective.config = fs::absolute(setup.out_dir / "effective.conf");
    effective.output_dir = fs::absolute(setup.out_dir);
    write_file_atomic(setup.out_dir / "effective_manifest.json", effective.to_json());

    json videos = json::array();
    for (const auto& v : corpus.videos) {
      const auto degraded = std::count_if(v.records.begin(), v.records.end(),
                                          [](const auto& r) { return r.degraded; });
      videos.push_back({{"video_id", v.video_id},
                        {"frames", v.records.size()},
                        {"degraded_frames", degraded},
                        {"error", v.error ? json(*v.error) : json(nullptr)}});
      out << v.video_id << ": " << v.records.size() << " frames";
      if (degraded > 0) out << ", " << degraded << " degraded";
      if (v.error) out << ", FAILED: " << *v.error;
      out << '\n';
    }
    json summary = {{"mode", to_string(setup.manifest.mode)},
                    {"videos", videos},
                    {"failed", corpus.failed()}};
    if (corpus.latency.n_records > 0) {
      summary["latency"] = latency_json(corpus.latency);
      const auto text = format_latency_report(corpus.latency);
      write_file_atomic(setup.out_dir / "latency.txt", text);
      out << text;
    }
    write_file_atomic(setup.out_dir / "summary.json", summary.dump(2) + "\n");
    if (corpus.failed() > 0) {
      err << corpus.failed() << " of " << corpus.videos.size() << " videos failed:";
      for (const auto& v : corpus.videos) {
        if (v.error) err << ' ' << v.video_id;
      }
      err << '\n';
      return kExitPartial;
    }
    return kExitOk;
  });
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto scores_dir = resolve_scores_dir(options.scores);
    if (!fs::is_directory(scores_dir)) throw InputError("scores directory missing: " + scores_dir.string());
    const auto annotations = load_annotations(options.annotations, options.metadata);
    std::vector<LabeledSeries> series;
    std::vector<std::string> missing;
    for (const auto& [id, ann] : annotations) {
      const auto file = scores_dir / (id + ".jsonl");
      if (!fs::is_regular_file(file)) {
        missing.push_back(id);
        continue;
      }
      const auto records = read_score_file(file);
      if (records.empty()) {
        missing.push_back(id);
        continue;
      }
      series.push_back(label_series(id, records, ann, options.raw));
    }
    if (series.empty()) {
      err << "error: no score files in " << scores_dir.string() << " match the annotations\n";
      return kExitInput;
    }
    auto report = evaluate(series);
    report.missing_videos = missing;
    out << "scores: " << (options.raw ? "raw" : "smoothed") << '\n' << format_report(report);
    auto doc = json::parse(report_to_json(report));
    doc["scores"] = options.raw ? "raw" : "smoothed";
    const auto target = options.out ? *options.out
                        : scores_dir.filename() == "scores" ? scores_dir.parent_path() / "metrics.json"
                                                            : scores_dir / "metrics.json";
    write_file_atomic(target, doc.dump(2) + "\n");
    if (!report.overall.auc) {
      err << "warning: AUC undefined; the annotations contain only one class\n";
    }
    for (const auto& id : missing) err << "warning: no scores for " << id << '\n';
    return kExitOk;
  });
}

int cmd_plot_data(const PlotOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto scores_dir = resolve_scores_dir(options.scores);
    const auto annotations = load_annotations(options.annotations, options.metadata);
    std::size_t written = 0;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(scores_dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const auto id = file.stem().string();
      auto it = annotations.find(id);
      if (it == annotations.end()) {
        err << "warning: no annotation for " << id << ", skipped\n";
        continue;
      }
      const auto labels = labels_from_annotation(it->second);
      std::string csv = "time_s,smoothed,raw,label\n";
      for (const auto& r : read_score_file(file)) {
        const bool inside = r.source_frame >= 0 && static_cast<std::size_t>(r.source_frame) < labels.size();
        csv += format_double(r.time_s) + ',' + format_double(r.smoothed) + ',' + format_double(r.raw) +
               ',' + (inside && labels[static_cast<std::size_t>(r.source_frame)] ? '1' : '0') + '\n';
      }
      write_file_atomic(options.out / (id + ".csv"), csv);
      ++written;
    }
    out << "wrote " << written << " curve file(s) to " << options.out.string() << '\n';
    if (written == 0) return kExitInput;
    return kExitOk;
  });
}

int cmd_ablate(const AblateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto setup = resolve_run(RunManifest::load(options.manifest), options.run);
    const auto ann_path = options.annotations ? options.annotations : setup.manifest.annotations;
    const auto meta_path = options.metadata ? options.metadata : setup.manifest.metadata;
    if (!ann_path || !meta_path) {
      throw ConfigError("ablation needs annotations and metadata (flags or manifest)");
    }
    const auto annotations = load_annotations(*ann_path, *meta_path);
    const auto rows = parse_ablation_rows(options.rows);
    const auto ctx = make_context(setup);
    const auto jobs = make_jobs(setup.manifest, setup.config.sample_period_s);

    json table = json::array();
    std::ostringstream text;
    text << "row\tW S A M P\tL S G\tAUC(%)\tAP(%)\tfailed\n";
    std::size_t failures = 0;
    for (const auto& row : rows) {
      auto cfg = setup.config;
      cfg.flags = row.flags;
      CorpusOptions co;
      co.realtime = setup.realtime;
      co.scores_dir = setup.out_dir / "ablation" / row_dir_name(row.label) / "scores";
      const auto corpus = run_corpus(jobs, cfg, setup.prefill, ctx, co);
      std::vector<LabeledSeries> series;
      for (const auto& v : corpus.videos) {
        auto it = annotations.find(v.video_id);
        if (it == annotations.end() || v.records.empty()) continue;
        series.push_back(label_series(v.video_id, v.records, it->second, options.raw));
      }
      const auto metrics = pooled_metrics(series);
      failures += corpus.failed();
      const auto& f = row.flags;
      const auto mark = [](bool b) { return b ? "+" : "-"; };
      text << row.label << '\t' << mark(f.enable_weighting) << ' ' << mark(f.enable_queue) << ' '
           << mark(f.enable_priors) << ' ' << mark(f.enable_memory) << ' ' << mark(f.enable_prediction)
           << '\t' << mark(f.enable_memory && f.enable_long_term) << ' '
           << mark(f.enable_memory && f.enable_short_term) << ' '
           << mark(f.enable_memory && f.enable_forgetting_gate) << '\t' << pct(metrics.auc) << '\t'
           << pct(metrics.ap) << '\t' << corpus.failed() << '\n';
      table.push_back({{"row", row.label},
                       {"weighting", f.enable_weighting},
                       {"queue", f.enable_queue},
                       {"priors", f.enable_priors},
                       {"memory", f.enable_memory},
                       {"prediction", f.enable_prediction},
                       {"long_term", f.enable_memory && f.enable_long_term},
                       {"short_term", f.enable_memory && f.enable_short_term},
                       {"forgetting_gate", f.enable_memory && f.enable_forgetting_gate},
                       {"auc", metrics.auc ? json(*metrics.auc) : json(nullptr)},
                       {"ap", metrics.ap ? json(*metrics.ap) : json(nullptr)},
                       {"failed", corpus.failed()}});
    }
    out << text.str();
    write_file_atomic(setup.out_dir / "ablation.txt", text.str());
    write_file_atomic(setup.out_dir / "ablation.json", json{{"rows", table}}.dump(2) + "\n");
    write_file_atomic(setup.out_dir / "effective.conf", serialize_config(setup.config));
    return failures > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto videos = make_synthetic_corpus(options.spec);
    write_synthetic_corpus(options.out, videos, options.spec);
    out << "wrote " << videos.size() << " synthetic videos to " << options.out.string() << '\n';
    return kExitOk;
  });
}

}  // namespace monitor
