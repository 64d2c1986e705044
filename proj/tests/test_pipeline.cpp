#include <doctest.h>

#include <atomic>
#include <chrono>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "monitor/caches.hpp"
#include "monitor/errors.hpp"
#include "monitor/mock_providers.hpp"
#include "monitor/pipeline.hpp"
#include "monitor/prompts.hpp"
#include "monitor/synthetic.hpp"
#include "monitor/util.hpp"
#include "oracles.hpp"

using namespace monitor;

namespace {

/// Records every request and forwards it to the keyword script.
class SpyChat final : public ChatCompleter {
 public:
  std::string chat_complete(const ChatRequest& req) override {
    std::lock_guard lock(mu);
    requests.push_back(req);
    return inner.chat_complete(req);
  }
  std::vector<std::string> score_prompts() const {
    std::vector<std::string> out;
    for (const auto& r : requests) {
      if (r.tag == Stage::kScore) out.push_back(r.user_text);
    }
    return out;
  }
  std::mutex mu;
  ScriptedChat inner = ScriptedChat::keyword_default();
  std::vector<ChatRequest> requests;
};

struct Fixture {
  std::vector<SyntheticVideo> corpus = make_synthetic_corpus();
  std::shared_ptr<CachedCaptioner> captioner = std::make_shared<CachedCaptioner>(5);
  std::shared_ptr<CachedImageEmbedder> images = std::make_shared<CachedImageEmbedder>();
  std::shared_ptr<HashEmbedder> text = std::make_shared<HashEmbedder>();
  std::shared_ptr<SpyChat> chat = std::make_shared<SpyChat>();

  Fixture() {
    for (const auto& v : corpus) {
      captioner->add(v.captions);
      images->add(v.embeddings);
    }
  }

  PipelineContext context() const {
    PipelineContext ctx;
    ctx.providers = {captioner, images, text, chat};
    ctx.priors_block = "Anomaly definitions:\nFighting: people fight";
    return ctx;
  }

  static std::vector<FrameSample> frames(const std::string& id, std::size_t n) {
    std::vector<FrameSample> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_frame(id, static_cast<FrameIndex>(i), 0.6, 30.0));
    return out;
  }
};

std::vector<std::string> masked(const std::vector<ScoreRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(mask_latency(record_to_json(r)));
  return out;
}

PipelineConfig no_prefill() {
  PipelineConfig cfg;
  cfg.prefill_strategy = PrefillStrategy::kNone;
  return cfg;
}

/// Blocks of a prompt, split on blank lines.
std::vector<std::string> blocks(const std::string& prompt) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = prompt.find("\n\n", start);
    out.push_back(prompt.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 2;
  }
  return out;
}

class ThrowingImages final : public ImageEmbedder {
 public:
  Embedding embed_image(const FrameSample&) override { throw ProviderUnavailable("image service down"); }
};

class ThrowingCaptioner final : public Captioner {
 public:
  std::string caption_image(const FrameSample&, std::size_t) override { throw ProviderUnavailable("down"); }
  std::size_t channels() const override { return 5; }
};

/// Chat whose replies per stage come from a queue; falls back to the keyword script.
class StagedChat final : public ChatCompleter {
 public:
  std::string chat_complete(const ChatRequest& req) override {
    seen.push_back(req);
    auto& q = replies[req.tag];
    if (!q.empty()) {
      auto r = q.front();
      q.erase(q.begin());
      if (r == "<throw>") throw ProviderUnavailable("chat down");
      return r;
    }
    return inner.chat_complete(req);
  }
  std::map<Stage, std::vector<std::string>> replies;
  std::vector<ChatRequest> seen;
  ScriptedChat inner = ScriptedChat::keyword_default();
};

}  // namespace

TEST_CASE("first frame is not smoothed and the worked example holds") {
  Fixture fx;
  const auto res = run_video("Fighting001_synth", Fixture::frames("Fighting001_synth", 60), no_prefill(),
                             {}, fx.context());
  REQUIRE_FALSE(res.error.has_value());
  REQUIRE(res.records.size() == 60);
  CHECK(res.records[0].raw == res.records[0].smoothed);
  CHECK(res.records[19].raw == 0.1);
  CHECK(res.records[20].raw == 0.9);
  CHECK(res.records[20].smoothed == 0.66);
  CHECK(res.records[21].smoothed == smooth(0.9, 0.9, 0.7));
  for (const auto& r : res.records) {
    CHECK_FALSE(r.degraded);
    CHECK(r.latency.t_d_ms == 600.0);
    CHECK(r.latency.l_total_ms == doctest::Approx(r.latency.t_p_ms + 600.0));
  }
}

TEST_CASE("records are causal: truncating the stream keeps the prefix") {
  Fixture full;
  const auto all = run_video("Arson001_synth", Fixture::frames("Arson001_synth", 60), PipelineConfig{},
                             PrefillSpec::load(MONITOR_TEST_DATA_DIR "/prefill/default_prefill.txt",
                                               PrefillStrategy::kBoth),
                             full.context());
  REQUIRE(all.records.size() == 60);
  for (std::size_t n : {1u, 7u, 36u}) {
    Fixture fx;
    const auto part = run_video("Arson001_synth", Fixture::frames("Arson001_synth", n), PipelineConfig{},
                                PrefillSpec::load(MONITOR_TEST_DATA_DIR "/prefill/default_prefill.txt",
                                                  PrefillStrategy::kBoth),
                                fx.context());
    const auto a = masked(all.records);
    const auto b = masked(part.records);
    REQUIRE(b.size() == n);
    CHECK(std::equal(b.begin(), b.end(), a.begin()));
  }
}

TEST_CASE("frames must arrive in order") {
  Fixture fx;
  auto state = init_state(no_prefill(), {}, *fx.text);
  const auto ctx = fx.context();
  CHECK_THROWS_AS(process_frame(state, make_frame("Normal001_synth", 1, 0.6, 30.0), ctx), OrderError);
  process_frame(state, make_frame("Normal001_synth", 0, 0.6, 30.0), ctx);
  CHECK_THROWS_AS(process_frame(state, make_frame("Normal001_synth", 0, 0.6, 30.0), ctx), OrderError);
  CHECK_NOTHROW(process_frame(state, make_frame("Normal001_synth", 1, 0.6, 30.0), ctx));
}

TEST_CASE("image embedding failure degrades but continues") {
  Fixture fx;
  auto ctx = fx.context();
  ctx.providers.image_embedder = std::make_shared<ThrowingImages>();
  const auto res = run_video("Fighting001_synth", Fixture::frames("Fighting001_synth", 25), no_prefill(), {}, ctx);
  REQUIRE_FALSE(res.error.has_value());
  REQUIRE(res.records.size() == 25);
  for (const auto& r : res.records) CHECK(r.degraded);
}

TEST_CASE("captioning failure aborts the video") {
  Fixture fx;
  auto ctx = fx.context();
  ctx.providers.captioner = std::make_shared<ThrowingCaptioner>();
  const auto res = run_video("Fighting001_synth", Fixture::frames("Fighting001_synth", 5), no_prefill(), {}, ctx);
  REQUIRE(res.error.has_value());
  CHECK(res.error->find("captioning failed") != std::string::npos);
  CHECK(res.records.empty());
}

TEST_CASE("summary failure: abort on the first frame, reuse later") {
  Fixture fx;
  auto ctx = fx.context();
  auto chat = std::make_shared<StagedChat>();
  ctx.providers.chat = chat;
  chat->replies[Stage::kSummarize] = {"<throw>"};
  auto state = init_state(no_prefill(), {}, *fx.text);
  CHECK_THROWS_AS(process_frame(state, make_frame("Normal001_synth", 0, 0.6, 30.0), ctx), VideoAborted);

  auto state2 = init_state(no_prefill(), {}, *fx.text);
  const auto r0 = process_frame(state2, make_frame("Normal001_synth", 0, 0.6, 30.0), ctx);
  CHECK_FALSE(r0.degraded);
  const auto s0 = state2.prev_summary->text;
  chat->replies[Stage::kSummarize] = {"<throw>"};
  const auto r1 = process_frame(state2, make_frame("Normal001_synth", 1, 0.6, 30.0), ctx);
  CHECK(r1.degraded);
  CHECK(state2.prev_summary->text == s0);
  CHECK(state2.prev_summary->frame_index == 1);
}

TEST_CASE("unparsable score is retried once, then falls back") {
  Fixture fx;
  auto ctx = fx.context();
  auto chat = std::make_shared<StagedChat>();
  ctx.providers.chat = chat;
  auto state = init_state(no_prefill(), {}, *fx.text);

  chat->replies[Stage::kScore] = {"hmm", "0.4"};
  const auto r0 = process_frame(state, make_frame("Normal001_synth", 0, 0.6, 30.0), ctx);
  CHECK(r0.raw == 0.4);
  CHECK_FALSE(r0.degraded);
  std::vector<std::string> score_texts;
  for (const auto& r : chat->seen) {
    if (r.tag == Stage::kScore) score_texts.push_back(r.user_text);
  }
  REQUIRE(score_texts.size() == 2);
  CHECK(score_texts[1] == score_texts[0] + "\n" + std::string(kScoreRetryLine));

  chat->replies[Stage::kScore] = {"no", "still no"};
  const auto r1 = process_frame(state, make_frame("Normal001_synth", 1, 0.6, 30.0), ctx);
  CHECK(r1.degraded);
  CHECK(r1.raw == 0.4);

  auto fresh = init_state(no_prefill(), {}, *fx.text);
  chat->replies[Stage::kScore] = {"<throw>"};
  const auto first = process_frame(fresh, make_frame("Normal001_synth", 0, 0.6, 30.0), ctx);
  CHECK(first.degraded);
  CHECK(first.raw == 0.0);
}

TEST_CASE("prefill strategies") {
  HashEmbedder emb;
  const auto path = MONITOR_TEST_DATA_DIR "/prefill/default_prefill.txt";
  PipelineConfig cfg;
  for (auto strategy : {PrefillStrategy::kNone, PrefillStrategy::kQueueOnly, PrefillStrategy::kMemoryOnly,
                        PrefillStrategy::kBoth}) {
    const auto spec = PrefillSpec::load(path, strategy);
    const auto state = init_state(cfg, spec, emb);
    const bool q = strategy == PrefillStrategy::kQueueOnly || strategy == PrefillStrategy::kBoth;
    const bool m = strategy == PrefillStrategy::kMemoryOnly || strategy == PrefillStrategy::kBoth;
    CHECK(state.queue.occupied() == (q ? 11u : 0u));
    CHECK(state.memory.long_buffer().size() == (m ? 4u : 0u));
    CHECK(state.memory.short_buffer().empty());
  }
  // Low slots describe normal scenes, high slots anomalous ones.
  const auto spec = PrefillSpec::load(path, PrefillStrategy::kBoth);
  REQUIRE(spec.queue_exemplars.size() == 11);
  for (const auto& [slot, text] : spec.queue_exemplars) {
    const bool anomalous = oracle::mentions_anomaly(text);
    CHECK(anomalous == (slot >= 4));
  }

  CHECK_THROWS_AS(PrefillSpec::parse("queue x: a", PrefillStrategy::kBoth), PrefillError);
  CHECK_THROWS_AS(PrefillSpec::parse("queue 1:", PrefillStrategy::kBoth), PrefillError);
  CHECK_THROWS_AS(PrefillSpec::parse("bogus: a", PrefillStrategy::kBoth), PrefillError);
  const auto bad = PrefillSpec::parse("queue 11: too high", PrefillStrategy::kBoth);
  CHECK_THROWS_AS(init_state(cfg, bad, emb), PrefillError);
}

TEST_CASE("corpus concurrency stays within num_jobs") {
  class GateChat final : public ChatCompleter {
   public:
    std::string chat_complete(const ChatRequest& req) override {
      const int now = ++in_flight;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::microseconds(200));
      std::string reply;
      {
        std::lock_guard lock(mu);
        reply = inner.chat_complete(req);
      }
      --in_flight;
      return reply;
    }
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    std::mutex mu;
    ScriptedChat inner = ScriptedChat::keyword_default();
  };

  Fixture fx;
  std::vector<VideoJob> jobs;
  for (int i = 0; i < 5; ++i) {
    const auto& v = fx.corpus[static_cast<std::size_t>(i) % 3];
    auto frames = Fixture::frames(v.captions.video_id, 12);
    jobs.push_back({v.captions.video_id + "#" + std::to_string(i), frames});
  }
  auto ctx = fx.context();
  auto gate = std::make_shared<GateChat>();
  ctx.providers.chat = gate;
  auto cfg = no_prefill();
  cfg.num_jobs = 2;
  const auto res = run_corpus(jobs, cfg, {}, ctx);
  CHECK(res.failed() == 0);
  REQUIRE(res.videos.size() == 5);
  CHECK(gate->peak.load() <= 2);
  CHECK(gate->peak.load() >= 1);
  CHECK(std::is_sorted(res.videos.begin(), res.videos.end(),
                       [](const auto& a, const auto& b) { return a.video_id < b.video_id; }));
}

TEST_CASE("parallel corpus matches sequential runs") {
  const auto run = [](int jobs) {
    Fixture fx;
    std::vector<VideoJob> videos;
    for (const auto& v : fx.corpus) videos.push_back({v.captions.video_id, Fixture::frames(v.captions.video_id, 60)});
    PipelineConfig cfg;
    cfg.num_jobs = jobs;
    const auto prefill = PrefillSpec::load(MONITOR_TEST_DATA_DIR "/prefill/default_prefill.txt", PrefillStrategy::kBoth);
    std::vector<std::vector<std::string>> out;
    for (const auto& v : run_corpus(videos, cfg, prefill, fx.context()).videos) out.push_back(masked(v.records));
    return out;
  };
  const auto seq = run(1);
  CHECK(seq == run(3));
  CHECK(seq == run(190));
}

TEST_CASE("latency report") {
  std::vector<ScoreRecord> records(4);
  for (auto& r : records) {
    r.latency.capture_ms = 20.0;
    r.latency.score_ms = 9.3;
    r.latency.finalize(600.0);
  }
  const auto rep = latency_report(records);
  CHECK(rep.pt_f_ms == doctest::Approx(29.3));
  CHECK(rep.pt_s_ms == doctest::Approx(5860.0));
  CHECK(format_latency_report(rep).find("PT(S)=5.86 s") != std::string::npos);
  CHECK(rep.l_total_ms == doctest::Approx(629.3));

  std::vector<ScoreRecord> zero(3);
  for (auto& r : zero) r.latency.finalize(600.0);
  const auto z = latency_report(zero);
  CHECK(z.pt_f_ms == 0.0);
  CHECK(z.l_total_ms == 600.0);

  LatencyRecord l;
  l.score_ms = 100.0;
  l.finalize(600.0);
  CHECK(l.l_total_ms == 700.0);
  CHECK_THROWS_AS(latency_report({}), PreconditionError);
}

TEST_CASE("score record json") {
  ScoreRecord r;
  r.video_id = "v";
  r.frame_index = 3;
  r.source_frame = 54;
  r.time_s = 1.8;
  r.raw = 0.9;
  r.smoothed = 0.66;
  r.degraded = true;
  r.prediction_used = Prediction{2, "a fight may start"};
  r.latency.capture_ms = 1.5;
  r.latency.finalize(600.0);
  const auto line = record_to_json(r);
  const auto back = record_from_json(line);
  CHECK(record_to_json(back) == line);
  CHECK(back.prediction_used->text == "a fight may start");
  const auto doc = nlohmann::json::parse(line);
  std::vector<std::string> keys;
  for (const auto& [k, _] : doc.items()) keys.push_back(k);
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  CHECK(line.find("\"degraded\":true,\"frame_index\":3") != std::string::npos);
  CHECK(mask_latency(line).find("latency_ms") == std::string::npos);
  CHECK_THROWS_AS(record_from_json("{"), InputError);
}

TEST_CASE("each flag changes only its own prompt block") {
  const auto prompts_for = [](const FeatureFlags& flags) {
    Fixture fx;
    auto cfg = no_prefill();
    cfg.flags = flags;
    const auto res = run_video("Fighting001_synth", Fixture::frames("Fighting001_synth", 30), cfg, {}, fx.context());
    REQUIRE_FALSE(res.error.has_value());
    return std::make_pair(fx.chat->score_prompts(), res.records);
  };
  const auto [full, full_records] = prompts_for({});
  REQUIRE(full.size() == 30);

  const auto check_removed = [&](FeatureFlags flags, std::vector<std::string> headers) {
    const auto [cut, records] = prompts_for(flags);
    REQUIRE(cut.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
      std::vector<std::string> expected;
      for (const auto& b : blocks(full[i])) {
        const bool dropped = std::any_of(headers.begin(), headers.end(),
                                         [&](const auto& h) { return b.rfind(h, 0) == 0; });
        if (!dropped) expected.push_back(b);
      }
      REQUIRE(blocks(cut[i]) == expected);
    }
    for (std::size_t i = 0; i < records.size(); ++i) REQUIRE(records[i].raw == full_records[i].raw);
  };

  FeatureFlags f;
  f.enable_queue = false;
  check_removed(f, {std::string(kQueueHeader)});
  f = {};
  f.enable_priors = false;
  check_removed(f, {std::string(kPriorsHeader)});
  f = {};
  f.enable_prediction = false;
  check_removed(f, {std::string(kPredictionLabel)});
  f = {};
  f.enable_memory = false;
  check_removed(f, {std::string(kLongTermHeader), std::string(kShortTermHeader)});
  f = {};
  f.enable_long_term = false;
  check_removed(f, {std::string(kLongTermHeader)});
  f = {};
  f.enable_short_term = false;
  check_removed(f, {std::string(kShortTermHeader)});

  // Weighting changes no prompt, only the smoothed series.
  f = {};
  f.enable_weighting = false;
  const auto [unweighted, records] = prompts_for(f);
  CHECK(unweighted == full);
  for (const auto& r : records) CHECK(r.smoothed == r.raw);
  CHECK(full_records[20].smoothed != full_records[20].raw);
}

TEST_CASE("memory digests appear in the prompt once summaries exist") {
  Fixture fx;
  const auto res = run_video("Fighting001_synth", Fixture::frames("Fighting001_synth", 3), no_prefill(), {},
                             fx.context());
  const auto prompts = fx.chat->score_prompts();
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[0].find(kShortTermHeader) == std::string::npos);
  CHECK(prompts[0].find(kQueueHeader) == std::string::npos);
  CHECK(prompts[0].find(kPredictionLabel) == std::string::npos);
  CHECK(prompts[1].find(kShortTermHeader) != std::string::npos);
  CHECK(prompts[1].find(kQueueHeader) != std::string::npos);
  CHECK(prompts[1].find("score=0.1 → ") != std::string::npos);
  CHECK(prompts[1].find(kPredictionLabel) != std::string::npos);
  CHECK(res.records[1].prediction_used.has_value());
}
