#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "monitor/caches.hpp"
#include "monitor/domain.hpp"

namespace monitor {

/// A generated video: captions, image embeddings (hash embedding of the true
/// scene text) and a frame-aligned ground-truth annotation.
struct SyntheticVideo {
  CaptionCache captions;
  EmbeddingCache embeddings;
  VideoAnnotation annotation;
  std::vector<std::string> scenes;  // true scene text per sampled frame
};

struct SyntheticSpec {
  std::size_t n_frames = 60;
  double fps = 30.0;
  double sample_period_s = 0.6;
  std::size_t n_captioners = 5;
  std::size_t embed_dim = 128;
  std::uint64_t seed = 7;
};

/// Three videos: a fight (anomalous sampled frames 20..34), an arson
/// (35..49) and an all-normal one. Anomalous scenes mention "fight" or
/// "fire"; normal scenes mention neither.
std::vector<SyntheticVideo> make_synthetic_corpus(const SyntheticSpec& spec = {});

/// One video with a random scene sequence; used by property tests.
SyntheticVideo make_random_video(const std::string& video_id, const SyntheticSpec& spec,
                                 std::uint64_t seed);

/// Writes captions/, embeddings/, annotations.txt, metadata.txt and
/// manifest.json under `dir`.
void write_synthetic_corpus(const std::filesystem::path& dir,
                            const std::vector<SyntheticVideo>& videos, const SyntheticSpec& spec);

}  // namespace monitor
