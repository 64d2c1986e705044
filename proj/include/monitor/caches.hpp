#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "monitor/mock_providers.hpp"
#include "monitor/providers.hpp"

namespace monitor {

/// Per-video captions keyed by frame_index.
/// File form: {"video_id": ..., "frames": {"<frame_index>": ["caption", ...]}}.
struct CaptionCache {
  std::string video_id;
  std::map<FrameIndex, std::vector<std::string>> frames;

  static CaptionCache parse(std::string_view json_text);
  static CaptionCache load(const std::filesystem::path& path);
  std::string to_json() const;
};

/// Per-video image embeddings keyed by frame_index, renormalized on load.
/// File form: {"video_id": ..., "frames": {"<frame_index>": [numbers]}}.
struct EmbeddingCache {
  std::string video_id;
  std::map<FrameIndex, Embedding> frames;

  static EmbeddingCache parse(std::string_view json_text);
  static EmbeddingCache load(const std::filesystem::path& path);
  std::string to_json() const;
};

/// Serves captions from registered per-video caches.
class CachedCaptioner final : public Captioner {
 public:
  explicit CachedCaptioner(std::size_t n_captioners) : n_captioners_(n_captioners) {}

  void add(CaptionCache cache);
  std::string caption_image(const FrameSample& frame, std::size_t channel) override;
  std::size_t channels() const override { return n_captioners_; }

 private:
  std::size_t n_captioners_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const CaptionCache>> videos_;
};

class CachedImageEmbedder final : public ImageEmbedder {
 public:
  void add(EmbeddingCache cache);
  Embedding embed_image(const FrameSample& frame) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const EmbeddingCache>> videos_;
};

/// Mock-mode image embedder: embeds the frame's channel-0 caption with a
/// text embedder, standing in for a missing embedding file.
class CaptionImageEmbedder final : public ImageEmbedder {
 public:
  CaptionImageEmbedder(std::shared_ptr<Captioner> captioner, std::shared_ptr<TextEmbedder> text)
      : captioner_(std::move(captioner)), text_(std::move(text)) {}

  Embedding embed_image(const FrameSample& frame) override;

 private:
  std::shared_ptr<Captioner> captioner_;
  std::shared_ptr<TextEmbedder> text_;
};

}  // namespace monitor
