#include "monitor/synthetic.hpp"

#include <json.hpp>
#include <random>
#include <sstream>

#include "monitor/mock_providers.hpp"
#include "monitor/util.hpp"

namespace monitor {

namespace {

const std::vector<std::string> kNormalScenes = {
    "a man walks along the sidewalk past parked cars",
    "customers browse shelves inside a convenience store",
    "a woman waits at a bus stop holding an umbrella",
    "cars drive slowly through a quiet intersection",
    "a cashier talks with a customer at the counter",
    "two people chat calmly on a park bench",
};

const std::vector<std::string> kFightScenes = {
    "two men fight violently in the parking lot",
    "a group of people fight outside the bar entrance",
};

const std::vector<std::string> kFireScenes = {
    "a car is on fire next to the gas station",
    "flames and smoke rise as a shop catches fire",
};

const std::vector<std::string> kChannelPrefixes = {
    "", "a surveillance camera view of ", "a blurry photo showing ", "security footage where ",
};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

/// Scene text per sampled frame: normal scenes in runs of 4..9 frames, with
/// the anomalous range [a_begin, a_end] drawn from `anomalous`.
std::vector<std::string> scene_track(std::mt19937_64& rng, std::size_t n_frames,
                                     std::optional<std::pair<std::size_t, std::size_t>> range,
                                     const std::vector<std::string>& anomalous) {
  std::vector<std::string> scenes;
  std::string current = kNormalScenes[pick(rng, kNormalScenes.size())];
  std::size_t run_left = 4 + pick(rng, 6);
  std::string anomaly = anomalous.empty() ? "" : anomalous[pick(rng, anomalous.size())];
  for (std::size_t i = 0; i < n_frames; ++i) {
    if (range && i >= range->first && i <= range->second) {
      if (pick(rng, 8) == 0) anomaly = anomalous[pick(rng, anomalous.size())];
      scenes.push_back(anomaly);
      continue;
    }
    if (run_left == 0) {
      current = kNormalScenes[pick(rng, kNormalScenes.size())];
      run_left = 4 + pick(rng, 6);
    }
    --run_left;
    scenes.push_back(current);
  }
  return scenes;
}

SyntheticVideo build_video(const std::string& video_id, const std::string& label,
                           const std::vector<std::string>& scenes,
                           std::optional<std::pair<std::size_t, std::size_t>> range,
                           const SyntheticSpec& spec, std::mt19937_64& rng) {
  HashEmbedder embedder(spec.embed_dim);
  SyntheticVideo v;
  v.scenes = scenes;
  v.captions.video_id = video_id;
  v.embeddings.video_id = video_id;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto idx = static_cast<FrameIndex>(i);
    std::vector<std::string> caps;
    for (std::size_t ch = 0; ch < spec.n_captioners; ++ch) {
      if (ch == 4 || (ch > 4 && ch % 4 == 0)) {
        // A noisy channel describing some unrelated normal scene.
        caps.push_back(kNormalScenes[pick(rng, kNormalScenes.size())]);
      } else {
        caps.push_back(kChannelPrefixes[ch % kChannelPrefixes.size()] + scenes[i]);
      }
    }
    v.captions.frames[idx] = std::move(caps);
    v.embeddings.frames.emplace(idx, embedder.embed_text(scenes[i]));
  }
  const auto stride_frame = [&](std::size_t i) {
    return make_frame(video_id, static_cast<FrameIndex>(i), spec.sample_period_s, spec.fps).source_frame;
  };
  v.annotation.video_id = video_id;
  v.annotation.fps = spec.fps;
  v.annotation.total_frames = stride_frame(scenes.size());
  v.annotation.label = label;
  if (range) {
    v.annotation.anomalous_intervals.push_back(
        {stride_frame(range->first), stride_frame(range->second + 1) - 1});
  }
  return v;
}

}  // namespace

std::vector<SyntheticVideo> make_synthetic_corpus(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<SyntheticVideo> out;
  const auto n = spec.n_frames;
  const std::pair<std::size_t, std::size_t> fight{n / 3, n / 3 + n / 4 - 1};
  const std::pair<std::size_t, std::size_t> fire{n / 3 + n / 4, n / 3 + n / 2 - 1};
  out.push_back(build_video("Fighting001_synth", "Fighting",
                            scene_track(rng, n, fight, kFightScenes), fight, spec, rng));
  out.push_back(build_video("Arson001_synth", "Arson", scene_track(rng, n, fire, kFireScenes),
                            fire, spec, rng));
  out.push_back(build_video("Normal001_synth", "Normal", scene_track(rng, n, std::nullopt, {}),
                            std::nullopt, spec, rng));
  return out;
}

SyntheticVideo make_random_video(const std::string& video_id, const SyntheticSpec& spec,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = spec.n_frames;
  std::optional<std::pair<std::size_t, std::size_t>> range;
  const auto& pool = pick(rng, 2) == 0 ? kFightScenes : kFireScenes;
  if (n >= 4 && pick(rng, 3) != 0) {
    const auto a = pick(rng, n - 2);
    range = std::make_pair(a, a + 1 + pick(rng, n - a - 1));
  }
  return build_video(video_id, range ? "Fighting" : "Normal", scene_track(rng, n, range, pool),
                     range, spec, rng);
}

void write_synthetic_corpus(const std::filesystem::path& dir,
                            const std::vector<SyntheticVideo>& videos, const SyntheticSpec& spec) {
  std::ostringstream ann;
  std::ostringstream meta;
  ann << "# <video> <label> <start> <end> <start> <end>  (-1 -1 = unused)\n";
  meta << "# <video_id> <total_frames> <fps>\n";
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& v : videos) {
    const auto& a = v.annotation;
    const auto id = a.video_id;
    write_file_atomic(dir / "captions" / (id + ".json"), v.captions.to_json());
    write_file_atomic(dir / "embeddings" / (id + ".json"), v.embeddings.to_json());
    ann << id << ".mp4  " << a.label;
    for (std::size_t k = 0; k < 2; ++k) {
      if (k < a.anomalous_intervals.size()) {
        ann << "  " << a.anomalous_intervals[k].start << "  " << a.anomalous_intervals[k].end;
      } else {
        ann << "  -1  -1";
      }
    }
    ann << '\n';
    meta << id << ' ' << a.total_frames << ' ' << a.fps << '\n';
    entries.push_back({{"video_id", id},
                       {"captions", "captions/" + id + ".json"},
                       {"embeddings", "embeddings/" + id + ".json"},
                       {"total_frames", a.total_frames},
                       {"fps", a.fps}});
  }
  write_file_atomic(dir / "annotations.txt", ann.str());
  write_file_atomic(dir / "metadata.txt", meta.str());
  write_file_atomic(dir / "mock_script.json", ScriptedChat::keyword_default().to_json());
  nlohmann::json manifest = {{"mode", "mock"},
                             {"mock_script", "mock_script.json"},
                             {"annotations", "annotations.txt"},
                             {"metadata", "metadata.txt"},
                             {"embed_dim", spec.embed_dim},
                             {"videos", entries}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace monitor
