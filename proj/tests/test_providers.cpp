#include <doctest.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "monitor/caches.hpp"
#include "monitor/errors.hpp"
#include "monitor/mock_providers.hpp"
#include "monitor/replay.hpp"
#include "oracles.hpp"

using namespace monitor;

namespace {

double norm(const Embedding& e) {
  double s = 0.0;
  for (double v : e.values()) s += v * v;
  return std::sqrt(s);
}

std::string random_text(std::mt19937_64& rng, std::size_t n) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789     ";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
  return s;
}

ChatRequest request(Stage tag, std::string user) {
  ChatRequest r;
  r.system_text = "sys";
  r.user_text = std::move(user);
  r.tag = tag;
  return r;
}

/// Counts calls and answers with a fixed string.
class CountingChat final : public ChatCompleter {
 public:
  std::string chat_complete(const ChatRequest& req) override {
    ++calls;
    return "reply to " + req.user_text;
  }
  std::atomic<int> calls{0};
};

}  // namespace

TEST_CASE("hash embedder is deterministic and unit norm") {
  HashEmbedder emb;
  const auto a = emb.embed_text("abc");
  CHECK(a == emb.embed_text("abc"));
  CHECK(a == HashEmbedder().embed_text("abc"));
  CHECK(std::abs(norm(a) - 1.0) < 1e-6);
  CHECK(a.dim() == 128);
  CHECK(a.dot(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(HashEmbedder(64).embed_text("abc").dim() == 64);
  CHECK(emb.embed_text("Two Men FIGHT") == emb.embed_text("two men fight"));
  CHECK(emb.embed_text("!!!").dim() == 128);
  CHECK_THROWS_AS(emb.embed_text(""), PreconditionError);
}

TEST_CASE("hash embedder separates random texts") {
  HashEmbedder emb;
  std::mt19937_64 rng(99);
  double worst = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_text(rng, 1000);
    const auto b = random_text(rng, 1000);
    worst = std::max(worst, emb.embed_text(a).dot(emb.embed_text(b)));
  }
  CHECK(worst < 0.99);
}

TEST_CASE("request digest") {
  auto r = request(Stage::kScore, "hello");
  const auto d = request_digest(r);
  CHECK(d == request_digest(r));
  CHECK(to_hex(d).size() == 64);
  auto changed = r;
  changed.user_text = "hello ";
  CHECK(request_digest(changed) != d);
  changed = r;
  changed.system_text = "sys2";
  CHECK(request_digest(changed) != d);
  changed = r;
  changed.temperature = 0.61;
  CHECK(request_digest(changed) != d);
  changed = r;
  changed.max_tokens = 255;
  CHECK(request_digest(changed) != d);
  changed = r;
  changed.tag = Stage::kPredict;
  CHECK(request_digest(changed) != d);
  // Length prefixes keep field boundaries apart.
  auto x = request(Stage::kScore, "bc");
  x.system_text = "a";
  auto y = request(Stage::kScore, "c");
  y.system_text = "ab";
  CHECK(request_digest(x) != request_digest(y));
  CHECK(embedding_digest("abc") != embedding_digest("abd"));
  // Known SHA-256 vector: digest of the canonical form is plain SHA-256.
  CHECK(canonicalize(r).find("5:score") != std::string::npos);
}

TEST_CASE("request validation") {
  auto r = request(Stage::kScore, "");
  CHECK_THROWS_AS(validate_request(r), PreconditionError);
  r.user_text = "x";
  r.max_tokens = 0;
  CHECK_THROWS_AS(validate_request(r), PreconditionError);
}

TEST_CASE("scripted chat rules") {
  ScriptedChat chat({{Stage::kScore, "fighting", "0.8", std::nullopt}}, {{Stage::kScore, "0.1"}});
  CHECK(chat.chat_complete(request(Stage::kScore, "two men FIGHTING")) == "0.8");
  CHECK(chat.chat_complete(request(Stage::kScore, "calm street")) == "0.1");
  // Rules only apply to their own stage.
  CHECK(chat.chat_complete(request(Stage::kPredict, "fighting")) == "");
}

TEST_CASE("scripted chat templates") {
  ScriptedChat chat({}, {{Stage::kSummarize, "{echo_first_item}"},
                         {Stage::kLongTerm, "{echo_items}"},
                         {Stage::kPredict, "{echo}"}});
  CHECK(chat.chat_complete(request(Stage::kSummarize, "instr\nfirst\n\nsecond")) == "first");
  CHECK(chat.chat_complete(request(Stage::kSummarize, "instr only")) == "");
  CHECK(chat.chat_complete(request(Stage::kLongTerm, "instr\na\n b \nc")) == "a b c");
  CHECK(chat.chat_complete(request(Stage::kPredict, "x\ny")) == "x\ny");
}

TEST_CASE("scripted chat block scoping") {
  const auto chat = ScriptedChat::keyword_default();
  auto c = chat;
  const std::string priors = "Anomaly definitions:\nFighting: people fight\nArson: setting fire";
  CHECK(c.chat_complete(request(Stage::kScore, "P1\n\n" + priors + "\n\nCurrent scene:\ncalm street")) == "0.1");
  CHECK(c.chat_complete(request(Stage::kScore, "P1\n\n" + priors + "\n\nCurrent scene:\ntwo men fight")) == "0.9");
  CHECK(c.chat_complete(request(Stage::kScore, "P1\n\nCurrent scene:\na car on fire\n\nPrevious prediction: calm")) == "0.9");
  CHECK(c.chat_complete(request(Stage::kScore, "P1\n\nCurrent scene:\ncalm\n\nPrevious prediction: a fight")) == "0.1");
  CHECK(find_block("a\nH:\nbody\nmore\n\nnext", "H:").value() == "body\nmore");
  CHECK_FALSE(find_block("a\nb", "H:").has_value());
}

TEST_CASE("scripted chat json round trip") {
  const auto original = ScriptedChat::keyword_default();
  auto loaded = ScriptedChat::from_json(original.to_json());
  CHECK(loaded.to_json() == original.to_json());
  CHECK(loaded.chat_complete(request(Stage::kScore, "x\n\nCurrent scene:\nfight")) == "0.9");
  CHECK_THROWS_AS(ScriptedChat::from_json("{"), InputError);
  CHECK_THROWS_AS(ScriptedChat::from_json(R"({"defaults":{"bogus":"x"}})"), InputError);
}

TEST_CASE("caption cache passthrough") {
  auto cache = CaptionCache::parse(
      R"({"video_id":"v","frames":{"0":["a man walks in a store","b","c","d","e"]}})");
  CachedCaptioner cap(5);
  cap.add(cache);
  const auto f0 = make_frame("v", 0, 0.6, 30.0);
  CHECK(cap.caption_image(f0, 0) == "a man walks in a store");
  CHECK(cap.channels() == 5);
  CHECK_THROWS_AS(cap.caption_image(f0, 7), PreconditionError);
  CHECK_THROWS_AS(cap.caption_image(make_frame("v", 1, 0.6, 30.0), 0), CacheMiss);
  CHECK_THROWS_AS(cap.caption_image(make_frame("w", 0, 0.6, 30.0), 0), CacheMiss);
  CHECK(CaptionCache::parse(cache.to_json()).frames == cache.frames);
}

TEST_CASE("embedding cache renormalizes and passes through") {
  auto cache = EmbeddingCache::parse(R"({"video_id":"v","frames":{"0":[3,4],"1":[0.6,0.8]}})");
  CachedImageEmbedder emb;
  emb.add(cache);
  const auto e0 = emb.embed_image(make_frame("v", 0, 0.6, 30.0));
  CHECK(e0.values()[0] == doctest::Approx(0.6));
  CHECK(std::abs(norm(e0) - 1.0) < 1e-6);
  const auto e1 = emb.embed_image(make_frame("v", 1, 0.6, 30.0));
  CHECK(e1 == cache.frames.at(1));
  CHECK_THROWS_AS(emb.embed_image(make_frame("v", 2, 0.6, 30.0)), CacheMiss);
  // Serializing and reloading keeps every bit.
  const auto reloaded = EmbeddingCache::parse(cache.to_json());
  CHECK(reloaded.frames == cache.frames);
}

TEST_CASE("record then replay returns identical responses") {
  const auto dir = oracle::temp_dir("replay");
  auto cache = std::make_shared<ReplayCache>(dir);
  auto inner = std::make_shared<CountingChat>();
  RecordingChat rec(inner, cache);
  const auto req = request(Stage::kSummarize, "hello");
  const auto first = rec.chat_complete(req);
  REQUIRE(rec.calls().size() == 1);
  CHECK(rec.calls()[0].stage == "summarize");
  CHECK(rec.calls()[0].request_digest == request_digest(req));

  ReplayChat replay(ReplayCache::open_existing(dir));
  CHECK(replay.chat_complete(req) == first);
  CHECK(inner->calls == 1);
  CHECK_THROWS_AS(replay.chat_complete(request(Stage::kSummarize, "unseen")), CacheMiss);

  std::ifstream index(dir / "index.tsv");
  std::string line;
  std::getline(index, line);
  CHECK(line == to_hex(request_digest(req)) + "\tsummarize");

  auto text = std::make_shared<HashEmbedder>();
  RecordingTextEmbedder rec_text(text, cache);
  const auto v = rec_text.embed_text("a man walks");
  ReplayTextEmbedder replay_text(cache);
  CHECK(replay_text.embed_text("a man walks") == v);
  CHECK_THROWS_AS(replay_text.embed_text("unseen"), CacheMiss);
  CHECK_THROWS_AS(ReplayCache::open_existing(dir / "missing"), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("vector payload encoding is exact") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> v(300);
  for (auto& x : v) x = g(rng);
  CHECK(decode_vector(encode_vector(v)) == v);
}

TEST_CASE("replay cache tolerates concurrent writers") {
  const auto dir = oracle::temp_dir("replay_mt");
  auto cache = std::make_shared<ReplayCache>(dir);
  auto inner = std::make_shared<CountingChat>();
  RecordingChat rec(inner, cache);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) {
          rec.chat_complete(request(Stage::kScore, "q" + std::to_string((t * 50 + i) % 120)));
        }
      });
    }
  }
  ReplayChat replay(cache);
  for (int i = 0; i < 120; ++i) {
    const auto q = "q" + std::to_string(i);
    CHECK(replay.chat_complete(request(Stage::kScore, q)) == "reply to " + q);
  }
  std::filesystem::remove_all(dir);
}
