#include "monitor/caches.hpp"

#include <json.hpp>

#include "monitor/errors.hpp"
#include "monitor/util.hpp"

namespace monitor {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

FrameIndex parse_key(const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(key, &used);
    if (used != key.size() || v < 0) throw InputError("bad frame key '" + key + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InputError("bad frame key '" + key + "'");
  }
}

}  // namespace

CaptionCache CaptionCache::parse(std::string_view json_text) {
  const auto doc = parse_json(json_text, "caption cache");
  CaptionCache cache;
  cache.video_id = doc.value("video_id", "");
  for (const auto& [key, captions] : doc.at("frames").items()) {
    cache.frames[parse_key(key)] = captions.get<std::vector<std::string>>();
  }
  return cache;
}

CaptionCache CaptionCache::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string CaptionCache::to_json() const {
  json frames_obj = json::object();
  for (const auto& [idx, caps] : frames) frames_obj[std::to_string(idx)] = caps;
  return json{{"video_id", video_id}, {"frames", frames_obj}}.dump(1) + "\n";
}

EmbeddingCache EmbeddingCache::parse(std::string_view json_text) {
  const auto doc = parse_json(json_text, "embedding cache");
  EmbeddingCache cache;
  cache.video_id = doc.value("video_id", "");
  std::size_t dim = 0;
  for (const auto& [key, values] : doc.at("frames").items()) {
    Embedding e(values.get<std::vector<double>>());
    if (dim == 0) dim = e.dim();
    if (e.dim() != dim) throw InputError("embedding cache mixes dimensions at frame " + key);
    cache.frames.emplace(parse_key(key), std::move(e));
  }
  return cache;
}

EmbeddingCache EmbeddingCache::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string EmbeddingCache::to_json() const {
  json frames_obj = json::object();
  for (const auto& [idx, e] : frames) {
    frames_obj[std::to_string(idx)] = std::vector<double>(e.values().begin(), e.values().end());
  }
  return json{{"video_id", video_id}, {"frames", frames_obj}}.dump() + "\n";
}

void CachedCaptioner::add(CaptionCache cache) {
  std::lock_guard lock(mu_);
  auto id = cache.video_id;
  videos_[id] = std::make_shared<const CaptionCache>(std::move(cache));
}

std::string CachedCaptioner::caption_image(const FrameSample& frame, std::size_t channel) {
  if (channel >= n_captioners_) {
    throw PreconditionError("captioner channel " + std::to_string(channel) + " >= " +
                            std::to_string(n_captioners_));
  }
  std::shared_ptr<const CaptionCache> cache;
  {
    std::lock_guard lock(mu_);
    auto it = videos_.find(frame.video_id);
    if (it == videos_.end()) throw CacheMiss("no caption cache for video " + frame.video_id);
    cache = it->second;
  }
  auto it = cache->frames.find(frame.frame_index);
  if (it == cache->frames.end() || channel >= it->second.size()) {
    throw CacheMiss("no caption for " + frame.video_id + " frame " +
                    std::to_string(frame.frame_index) + " channel " + std::to_string(channel));
  }
  return it->second[channel];
}

void CachedImageEmbedder::add(EmbeddingCache cache) {
  std::lock_guard lock(mu_);
  auto id = cache.video_id;
  videos_[id] = std::make_shared<const EmbeddingCache>(std::move(cache));
}

Embedding CachedImageEmbedder::embed_image(const FrameSample& frame) {
  std::shared_ptr<const EmbeddingCache> cache;
  {
    std::lock_guard lock(mu_);
    auto it = videos_.find(frame.video_id);
    if (it == videos_.end()) throw CacheMiss("no embedding cache for video " + frame.video_id);
    cache = it->second;
  }
  auto it = cache->frames.find(frame.frame_index);
  if (it == cache->frames.end()) {
    throw CacheMiss("no image embedding for " + frame.video_id + " frame " +
                    std::to_string(frame.frame_index));
  }
  return it->second;
}

Embedding CaptionImageEmbedder::embed_image(const FrameSample& frame) {
  return text_->embed_text(captioner_->caption_image(frame, 0));
}

}  // namespace monitor
