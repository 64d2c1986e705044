#include <doctest.h>

#include <cmath>
#include <random>

#include "monitor/errors.hpp"
#include "monitor/memory.hpp"
#include "monitor/mock_providers.hpp"
#include "monitor/prompts.hpp"

using namespace monitor;

namespace {

/// Unit vector whose dot with (1, 0) is exactly `d`.
FrameSummary at_similarity(FrameIndex idx, double d) {
  return {idx, "s" + std::to_string(idx), Embedding({d, std::sqrt(1.0 - d * d)})};
}

const FrameSummary kCurrent{99, "current", Embedding({1.0, 0.0})};

class CountingChat final : public ChatCompleter {
 public:
  std::string chat_complete(const ChatRequest& req) override {
    requests.push_back(req);
    return ScriptedChat({}, {{Stage::kLongTerm, "{echo_items}"}, {Stage::kShortTerm, "{echo_items}"}})
        .chat_complete(req);
  }
  std::vector<ChatRequest> requests;
};

FrameSummary summary(FrameIndex idx) {
  static HashEmbedder emb;
  const auto text = "summary " + std::to_string(idx);
  return {idx, text, emb.embed_text(text)};
}

}  // namespace

TEST_CASE("gate keeps strictly similar entries") {
  const std::deque<FrameSummary> buffer = {at_similarity(0, 0.6), at_similarity(1, 0.5), at_similarity(2, 0.2)};
  REQUIRE(kCurrent.embedding.dot(buffer[0].embedding) == 0.6);
  REQUIRE(kCurrent.embedding.dot(buffer[1].embedding) == 0.5);
  const auto kept = forgetting_gate(kCurrent, buffer, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].frame_index == 0);
}

TEST_CASE("gate threshold at theta plus or minus epsilon") {
  const double eps = 1e-9;
  for (double theta : {-0.7, -0.25, 0.0, 0.3, 0.5, 0.9}) {
    const std::deque<FrameSummary> buffer = {at_similarity(0, theta - eps), at_similarity(1, theta),
                                             at_similarity(2, theta + eps)};
    const auto kept = forgetting_gate(kCurrent, buffer, theta);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].frame_index == 2);
  }
}

TEST_CASE("gate boundaries") {
  HashEmbedder emb;
  std::deque<FrameSummary> buffer;
  for (int i = 0; i < 10; ++i) buffer.push_back(summary(i));
  const auto current = summary(42);
  CHECK(forgetting_gate(current, buffer, -1.0).size() == 10);
  CHECK(forgetting_gate(current, buffer, 1.0).empty());
  // Order is preserved.
  const auto all = forgetting_gate(current, buffer, -1.0);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].frame_index == static_cast<FrameIndex>(i));
}

TEST_CASE("gate is monotone in theta") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> th(-1.0, 1.0);
  const auto random_emb = [&] {
    std::vector<double> v(8);
    for (auto& x : v) x = g(rng);
    return Embedding(v);
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::deque<FrameSummary> buffer;
    for (FrameIndex i = 0; i < 10; ++i) buffer.push_back({i, "s", random_emb()});
    const FrameSummary current{10, "c", random_emb()};
    auto t1 = th(rng), t2 = th(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto loose = forgetting_gate(current, buffer, t1);
    const auto tight = forgetting_gate(current, buffer, t2);
    for (const auto& s : tight) {
      REQUIRE(std::any_of(loose.begin(), loose.end(),
                          [&](const auto& o) { return o.frame_index == s.frame_index; }));
    }
  }
}

TEST_CASE("long-term digest") {
  CountingChat chat;
  CHECK(build_long_term({}, chat, 0.6).empty());
  CHECK(chat.requests.empty());

  const std::vector<FrameSummary> one = {summary(4)};
  CHECK(build_long_term(one, chat, 0.6) == "summary 4");
  REQUIRE(chat.requests.size() == 1);
  CHECK(chat.requests[0].tag == Stage::kLongTerm);
  CHECK(chat.requests[0].user_text == std::string(kLongTermPrompt) + "\nsummary 4");

  const std::vector<FrameSummary> two = {summary(1), summary(2)};
  CHECK(join_texts(two) == "summary 1\nsummary 2");
}

TEST_CASE("short-term digest") {
  CountingChat chat;
  MemoryState mem(10, 2);
  CHECK(build_short_term(mem.short_buffer(), chat, 0.6).empty());
  CHECK(chat.requests.empty());
  mem.push_summary(summary(0));
  CHECK(build_short_term(mem.short_buffer(), chat, 0.6) == "summary 0");
  mem.push_summary(summary(1));
  CHECK(build_short_term(mem.short_buffer(), chat, 0.6) == "summary 0 summary 1");
  CHECK(chat.requests.back().tag == Stage::kShortTerm);
  CHECK(chat.requests.back().user_text == std::string(kShortTermPrompt) + "\nsummary 0\nsummary 1");
}

TEST_CASE("buffers are FIFOs") {
  MemoryState mem(10, 2);
  for (FrameIndex i = 0; i < 12; ++i) mem.push_summary(summary(i));
  REQUIRE(mem.long_buffer().size() == 10);
  CHECK(mem.long_buffer().front().frame_index == 2);
  CHECK(mem.long_buffer().back().frame_index == 11);

  MemoryState small(10, 2);
  for (FrameIndex i = 0; i < 3; ++i) small.push_summary(summary(i));
  REQUIRE(small.short_buffer().size() == 2);
  CHECK(small.short_buffer()[0].frame_index == 1);
  CHECK(small.short_buffer()[1].frame_index == 2);
  CHECK(small.last_pushed() == 2);
}

TEST_CASE("push order is enforced") {
  MemoryState mem(10, 2);
  CHECK_THROWS_AS(mem.push_summary(summary(1)), OrderError);
  mem.push_summary(summary(0));
  CHECK_THROWS_AS(mem.push_summary(summary(2)), OrderError);
  CHECK_THROWS_AS(mem.push_summary(summary(0)), OrderError);
  mem.set_digests({"l", "s"});
  mem.push_summary(summary(1));
  CHECK_FALSE(mem.last_digests().has_value());
}

TEST_CASE("short buffer is a suffix of the long buffer") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 2 + rng() % 9;
    const std::size_t s = 1 + rng() % w;
    MemoryState mem(w, s);
    const auto n = static_cast<FrameIndex>(rng() % 30);
    for (FrameIndex i = 0; i < n; ++i) {
      mem.push_summary(summary(i));
      REQUIRE(mem.long_buffer().size() <= w);
      REQUIRE(mem.short_buffer().size() <= s);
      const auto offset = mem.long_buffer().size() - mem.short_buffer().size();
      for (std::size_t k = 0; k < mem.short_buffer().size(); ++k) {
        REQUIRE(mem.short_buffer()[k] == mem.long_buffer()[offset + k]);
      }
    }
  }
}

TEST_CASE("seeding") {
  MemoryState mem(3, 2);
  mem.seed_long_term({summary(7), summary(8), summary(9), summary(10)});
  REQUIRE(mem.long_buffer().size() == 3);
  for (const auto& s : mem.long_buffer()) CHECK(s.frame_index == kPrefillFrame);
  CHECK(mem.short_buffer().empty());
  mem.push_summary(summary(0));
  CHECK(mem.long_buffer().back().frame_index == 0);
  CHECK_THROWS_AS(mem.seed_long_term({summary(1)}), PrefillError);
}
