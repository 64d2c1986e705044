#include "monitor/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "monitor/cleaning.hpp"
#include "monitor/prompts.hpp"
#include "monitor/util.hpp"

namespace monitor {

using nlohmann::json;

PrefillSpec PrefillSpec::parse(std::string_view text, PrefillStrategy strategy) {
  PrefillSpec spec;
  spec.strategy = strategy;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw PrefillError("prefill line " + std::to_string(line_no) + ": missing ':'");
    }
    const auto key = split_whitespace(line.substr(0, colon));
    const std::string value(trim(line.substr(colon + 1)));
    if (value.empty()) throw PrefillError("prefill line " + std::to_string(line_no) + ": empty text");
    if (key.size() == 1 && key[0] == "memory") {
      spec.memory_exemplars.push_back(value);
    } else if (key.size() == 2 && key[0] == "queue") {
      std::size_t used = 0;
      long slot = -1;
      try {
        slot = std::stol(key[1], &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used != key[1].size() || slot < 0) {
        throw PrefillError("prefill line " + std::to_string(line_no) + ": bad slot '" + key[1] + "'");
      }
      spec.queue_exemplars[static_cast<std::size_t>(slot)] = value;
    } else {
      throw PrefillError("prefill line " + std::to_string(line_no) + ": expected 'queue <slot>:' or 'memory:'");
    }
  }
  return spec;
}

PrefillSpec PrefillSpec::load(const std::filesystem::path& path, PrefillStrategy strategy) {
  return parse(read_file(path), strategy);
}

void LatencyRecord::finalize(double decision_period_ms) {
  t_p_ms = capture_ms + clean_ms + summarize_ms + memory_ms + score_ms + predict_ms;
  t_d_ms = decision_period_ms;
  l_total_ms = t_p_ms + t_d_ms;
}

VideoPipelineState::VideoPipelineState(const PipelineConfig& cfg)
    : config(cfg),
      memory(static_cast<std::size_t>(cfg.window_w), static_cast<std::size_t>(cfg.short_window)),
      queue(cfg.queue_slots()) {}

VideoPipelineState init_state(const PipelineConfig& config, const PrefillSpec& prefill,
                              TextEmbedder& embedder) {
  VideoPipelineState state(validate_config(config));
  const bool queue = prefill.strategy == PrefillStrategy::kQueueOnly ||
                     prefill.strategy == PrefillStrategy::kBoth;
  const bool memory = prefill.strategy == PrefillStrategy::kMemoryOnly ||
                      prefill.strategy == PrefillStrategy::kBoth;
  for (const auto& [slot, _] : prefill.queue_exemplars) {
    if (slot >= state.queue.size()) {
      throw PrefillError("prefill slot " + std::to_string(slot) + " outside 0.." +
                         std::to_string(state.queue.size() - 1));
    }
  }
  if (queue) {
    for (const auto& [slot, text] : prefill.queue_exemplars) state.queue.set_slot(slot, text);
  }
  if (memory) {
    std::vector<FrameSummary> seeds;
    for (const auto& text : prefill.memory_exemplars) {
      seeds.push_back({kPrefillFrame, text, embedder.embed_text(text)});
    }
    state.memory.seed_long_term(std::move(seeds));
  }
  return state;
}

double PipelineContext::clock_ms() const {
  if (now_ms) return now_ms();
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(const PipelineContext& ctx) : ctx_(ctx), start_(ctx.clock_ms()) {}
  double lap() {
    const double now = ctx_.clock_ms();
    const double d = now - start_;
    start_ = now;
    return d;
  }

 private:
  const PipelineContext& ctx_;
  double start_;
};

std::optional<double> try_score(const ScoringInputs& inputs, const PipelineConfig& cfg,
                                ChatCompleter& chat) {
  auto req = assemble_scoring_prompt(inputs, cfg.temperature);
  try {
    return parse_score(chat.chat_complete(req));
  } catch (const ParseError&) {
  }
  req.user_text += "\n";
  req.user_text += kScoreRetryLine;
  try {
    return parse_score(chat.chat_complete(req));
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

}  // namespace

ScoreRecord process_frame(VideoPipelineState& state, const FrameSample& frame,
                          const PipelineContext& ctx) {
  const auto& cfg = state.config;
  const auto& flags = cfg.flags;
  const auto& p = ctx.providers;
  const FrameIndex expected = state.prev_summary ? state.prev_summary->frame_index + 1 : 0;
  if (frame.frame_index != expected) {
    throw OrderError("expected frame " + std::to_string(expected) + ", got " +
                     std::to_string(frame.frame_index));
  }

  ScoreRecord rec;
  rec.video_id = frame.video_id;
  rec.frame_index = frame.frame_index;
  rec.source_frame = frame.source_frame;
  rec.time_s = frame.time_s;
  StageTimer timer(ctx);

  // (1)-(2) capture: raw captions and image embedding.
  RawCaptionSet captions{frame.frame_index, {}};
  try {
    for (std::size_t ch = 0; ch < static_cast<std::size_t>(cfg.n_captioners); ++ch) {
      captions.captions.push_back(p.captioner->caption_image(frame, ch));
    }
    check_caption_set(captions, static_cast<std::size_t>(cfg.n_captioners));
  } catch (const std::exception& e) {
    throw VideoAborted("captioning failed for " + frame.video_id + " frame " +
                       std::to_string(frame.frame_index) + ": " + e.what());
  }
  std::optional<Embedding> image_emb;
  try {
    image_emb = p.image_embedder->embed_image(frame);
  } catch (const std::exception&) {
    rec.degraded = true;
  }
  rec.latency.capture_ms = timer.lap();

  // (3) cleaning and summary S_i.
  std::optional<FrameSummary> summary;
  try {
    const auto pool = gather_candidates(captions, state.caption_history);
    std::vector<CandidateCaption> ranked;
    if (image_emb) {
      ranked = rank_candidates(*image_emb, pool, *p.text_embedder);
    } else {
      for (const auto& c : pool) ranked.push_back({c.text, 0.0, c.origin_frame, c.origin_channel});
      std::sort(ranked.begin(), ranked.end(), ranks_before);
    }
    const auto cleaned =
        select_top_k(frame.frame_index, ranked, static_cast<std::size_t>(cfg.top_k));
    rec.latency.clean_ms = timer.lap();
    summary = summarize_frame(cleaned, *p.chat, *p.text_embedder, cfg.temperature);
  } catch (const std::exception& e) {
    if (!state.prev_summary) {
      throw VideoAborted("no summary for first frame of " + frame.video_id + ": " + e.what());
    }
    summary = FrameSummary{frame.frame_index, state.prev_summary->text,
                           state.prev_summary->embedding};
    rec.degraded = true;
  }
  rec.latency.summarize_ms = timer.lap();

  // (4) memory digests, gated against S_i.
  MemoryDigests digests;
  if (flags.enable_memory) {
    try {
      if (flags.enable_long_term) {
        std::vector<FrameSummary> retained;
        if (flags.enable_forgetting_gate) {
          retained = forgetting_gate(*summary, state.memory.long_buffer(), cfg.theta);
        } else {
          retained.assign(state.memory.long_buffer().begin(), state.memory.long_buffer().end());
        }
        digests.long_term = build_long_term(retained, *p.chat, cfg.temperature);
      }
      if (flags.enable_short_term) {
        digests.short_term = build_short_term(state.memory.short_buffer(), *p.chat, cfg.temperature);
      }
    } catch (const std::exception&) {
      digests = state.prev_digests;
      rec.degraded = true;
    }
    state.memory.set_digests(digests);
  }
  rec.latency.memory_ms = timer.lap();

  // (5) queue update with the previous frame's raw score and summary.
  if (flags.enable_queue && state.prev_score && state.prev_summary) {
    state.queue.update(*state.prev_score, state.prev_summary->text);
  }

  // (6) raw score a_i.
  ScoringInputs inputs;
  inputs.instruction = std::string(kScoringPrompt);
  inputs.long_term = digests.long_term;
  inputs.short_term = digests.short_term;
  if (flags.enable_queue) inputs.queue = state.queue.render();
  if (flags.enable_priors) inputs.priors = ctx.priors_block;
  inputs.summary = summary->text;
  if (flags.enable_prediction && state.prev_prediction) {
    inputs.prev_prediction = state.prev_prediction->text;
    rec.prediction_used = state.prev_prediction;
  }
  std::optional<double> raw;
  try {
    raw = try_score(inputs, cfg, *p.chat);
  } catch (const std::exception&) {
    raw.reset();
  }
  if (!raw) {
    raw = state.prev_score.value_or(0.0);
    rec.degraded = true;
  }
  rec.raw = *raw;

  // (7) weighting.
  rec.smoothed = (flags.enable_weighting && state.prev_score)
                     ? smooth(rec.raw, *state.prev_score, cfg.alpha)
                     : rec.raw;
  rec.latency.score_ms = timer.lap();

  // (8) prediction for the next frame.
  std::optional<Prediction> prediction;
  if (flags.enable_prediction) {
    try {
      prediction = predict_next(*summary, *p.chat, cfg.temperature);
    } catch (const std::exception&) {
      rec.degraded = true;
    }
  }
  rec.latency.predict_ms = timer.lap();

  // (9) commit.
  state.memory.push_summary(*summary);
  state.caption_history.push_back(std::move(captions));
  while (state.caption_history.size() > static_cast<std::size_t>(cfg.caption_history_frames)) {
    state.caption_history.pop_front();
  }
  state.prev_score = rec.raw;
  state.prev_summary = std::move(summary);
  state.prev_prediction = std::move(prediction);
  state.prev_digests = std::move(digests);
  rec.latency.finalize(cfg.decision_period_ms());
  return rec;
}

VideoResult run_video(std::string video_id, const std::vector<FrameSample>& frames,
                      const PipelineConfig& config, const PrefillSpec& prefill,
                      const PipelineContext& ctx, const RunOptions& options) {
  VideoResult result;
  result.video_id = std::move(video_id);
  try {
    auto state = init_state(config, prefill, *ctx.providers.text_embedder);
    for (const auto& frame : frames) {
      const auto start = std::chrono::steady_clock::now();
      result.records.push_back(process_frame(state, frame, ctx));
      if (options.on_record) options.on_record(result.records.back());
      if (options.realtime) {
        std::this_thread::sleep_until(
            start + std::chrono::duration<double, std::milli>(config.decision_period_ms()));
      }
    }
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

std::size_t CorpusResult::failed() const {
  return static_cast<std::size_t>(
      std::count_if(videos.begin(), videos.end(), [](const auto& v) { return v.error.has_value(); }));
}

CorpusResult run_corpus(const std::vector<VideoJob>& videos, const PipelineConfig& config,
                        const PrefillSpec& prefill, const PipelineContext& ctx,
                        const CorpusOptions& options) {
  std::vector<VideoResult> results(videos.size());
  std::atomic<std::size_t> next{0};
  if (options.scores_dir) std::filesystem::create_directories(*options.scores_dir);

  const auto worker = [&] {
    for (std::size_t i = next++; i < videos.size(); i = next++) {
      const auto& job = videos[i];
      RunOptions ro;
      ro.realtime = options.realtime;
      std::ofstream out;
      if (options.scores_dir) {
        out.open(*options.scores_dir / (job.video_id + ".jsonl"), std::ios::trunc);
        ro.on_record = [&out](const ScoreRecord& r) { out << record_to_json(r) << '\n' << std::flush; };
      }
      results[i] = run_video(job.video_id, job.frames, config, prefill, ctx, ro);
    }
  };

  const auto n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(config.num_jobs, 1)), videos.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  std::sort(results.begin(), results.end(),
            [](const VideoResult& a, const VideoResult& b) { return a.video_id < b.video_id; });
  CorpusResult corpus;
  std::vector<ScoreRecord> all;
  for (const auto& v : results) all.insert(all.end(), v.records.begin(), v.records.end());
  if (!all.empty()) corpus.latency = latency_report(all);
  corpus.videos = std::move(results);
  return corpus;
}

LatencyReport latency_report(const std::vector<ScoreRecord>& records, std::size_t segment_length) {
  if (records.empty()) throw PreconditionError("latency_report needs at least one record");
  LatencyReport r;
  r.n_records = records.size();
  r.segment_length = segment_length;
  auto& m = r.stage_means;
  for (const auto& rec : records) {
    const auto& l = rec.latency;
    m.capture_ms += l.capture_ms;
    m.clean_ms += l.clean_ms;
    m.summarize_ms += l.summarize_ms;
    m.memory_ms += l.memory_ms;
    m.score_ms += l.score_ms;
    m.predict_ms += l.predict_ms;
    r.pt_f_ms += l.t_p_ms;
    r.t_d_ms += l.t_d_ms;
  }
  const double n = static_cast<double>(records.size());
  for (double* v : {&m.capture_ms, &m.clean_ms, &m.summarize_ms, &m.memory_ms, &m.score_ms,
                    &m.predict_ms, &r.pt_f_ms, &r.t_d_ms}) {
    *v /= n;
  }
  r.pt_s_ms = r.pt_f_ms * static_cast<double>(segment_length);
  r.l_total_ms = r.pt_f_ms + r.t_d_ms;
  m.t_p_ms = r.pt_f_ms;
  m.t_d_ms = r.t_d_ms;
  m.l_total_ms = r.l_total_ms;
  return r;
}

std::string format_latency_report(const LatencyReport& r) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "frames: %zu\n"
                "PT(F)=%.1f ms\n"
                "PT(S)=%.2f s (L_seg=%zu)\n"
                "decision period T_d=%.1f ms\n"
                "delay L_total=%.1f ms\n",
                r.n_records, r.pt_f_ms, r.pt_s_ms / 1000.0, r.segment_length, r.t_d_ms,
                r.l_total_ms);
  out += buf;
  const auto& m = r.stage_means;
  std::snprintf(buf, sizeof buf,
                "stage means (ms): capture=%.3f clean=%.3f summarize=%.3f memory=%.3f "
                "score=%.3f predict=%.3f\n",
                m.capture_ms, m.clean_ms, m.summarize_ms, m.memory_ms, m.score_ms, m.predict_ms);
  out += buf;
  return out;
}

std::string record_to_json(const ScoreRecord& r) {
  const auto& l = r.latency;
  json doc = {
      {"video_id", r.video_id},
      {"frame_index", r.frame_index},
      {"source_frame", r.source_frame},
      {"time_s", r.time_s},
      {"raw", r.raw},
      {"smoothed", r.smoothed},
      {"degraded", r.degraded},
      {"latency_ms",
       {{"capture", l.capture_ms},
        {"clean", l.clean_ms},
        {"summarize", l.summarize_ms},
        {"memory", l.memory_ms},
        {"score", l.score_ms},
        {"predict", l.predict_ms},
        {"t_p", l.t_p_ms},
        {"t_d", l.t_d_ms},
        {"l_total", l.l_total_ms}}},
  };
  if (r.prediction_used) doc["prediction_used"] = r.prediction_used->text;
  return doc.dump();
}

ScoreRecord record_from_json(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad score line: ") + e.what());
  }
  ScoreRecord r;
  r.video_id = doc.at("video_id").get<std::string>();
  r.frame_index = doc.at("frame_index").get<FrameIndex>();
  r.source_frame = doc.at("source_frame").get<std::int64_t>();
  r.time_s = doc.at("time_s").get<double>();
  r.raw = doc.at("raw").get<double>();
  r.smoothed = doc.at("smoothed").get<double>();
  r.degraded = doc.value("degraded", false);
  if (doc.contains("prediction_used")) {
    r.prediction_used = Prediction{r.frame_index - 1, doc["prediction_used"].get<std::string>()};
  }
  if (doc.contains("latency_ms")) {
    const auto& l = doc["latency_ms"];
    r.latency.capture_ms = l.value("capture", 0.0);
    r.latency.clean_ms = l.value("clean", 0.0);
    r.latency.summarize_ms = l.value("summarize", 0.0);
    r.latency.memory_ms = l.value("memory", 0.0);
    r.latency.score_ms = l.value("score", 0.0);
    r.latency.predict_ms = l.value("predict", 0.0);
    r.latency.t_p_ms = l.value("t_p", 0.0);
    r.latency.t_d_ms = l.value("t_d", 0.0);
    r.latency.l_total_ms = l.value("l_total", 0.0);
  }
  return r;
}

std::vector<ScoreRecord> read_score_file(const std::filesystem::path& path) {
  std::vector<ScoreRecord> out;
  const auto text = read_file(path);
  for (auto line : split_lines(text)) {
    if (trim(line).empty()) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

std::string mask_latency(std::string_view line) {
  auto doc = json::parse(line);
  doc.erase("latency_ms");
  return doc.dump();
}

}  // namespace monitor
