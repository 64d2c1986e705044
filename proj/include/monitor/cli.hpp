#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monitor/config.hpp"
#include "monitor/eval.hpp"
#include "monitor/pipeline.hpp"
#include "monitor/synthetic.hpp"

namespace monitor {

enum class ProviderMode { kLive, kRecord, kReplay, kMock };

std::string_view to_string(ProviderMode m);
std::optional<ProviderMode> parse_provider_mode(std::string_view s);

struct ManifestVideo {
  std::string video_id;
  std::filesystem::path captions;
  std::optional<std::filesystem::path> embeddings;
  std::int64_t total_frames = 0;
  double fps = 0.0;
};

/// JSON run description. Relative paths are resolved against the manifest's
/// directory.
///
///   {"config": "...", "priors": "...", "prefill": "...", "mode": "mock",
///    "mock_script": "...", "cache_dir": "...", "output_dir": "...",
///    "annotations": "...", "metadata": "...", "embed_dim": 128,
///    "videos": [{"video_id", "captions", "embeddings", "total_frames", "fps"}]}
struct RunManifest {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> priors;
  std::optional<std::filesystem::path> prefill;
  ProviderMode mode = ProviderMode::kMock;
  std::optional<std::filesystem::path> mock_script;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> metadata;
  std::size_t embed_dim = 128;
  std::vector<ManifestVideo> videos;

  static RunManifest parse(std::string_view json_text, const std::filesystem::path& base_dir);
  static RunManifest load(const std::filesystem::path& path);
  std::string to_json() const;
};

/// Command-line values that take precedence over the manifest.
struct RunOverrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> priors;
  std::optional<std::filesystem::path> prefill;
  std::optional<std::string> mode;
  std::optional<std::string> record_from;  // live | mock, for record mode
  std::optional<std::filesystem::path> out;
  std::optional<int> num_jobs;
  bool realtime = false;
};

/// Everything a corpus run needs, after merging manifest, overrides and defaults.
struct RunSetup {
  RunManifest manifest;
  PipelineConfig config;
  PrefillSpec prefill;
  std::string priors_block;
  ProviderMode record_from = ProviderMode::kMock;
  std::filesystem::path out_dir;
  bool realtime = false;
};

/// Merges and validates; checks that every listed video has its cache files
/// (the embedding file may be absent only in mock mode) and that replay mode
/// has an existing cache directory. Throws ConfigError / InputError.
RunSetup resolve_run(const RunManifest& manifest, const RunOverrides& overrides);

/// Provider set for the setup's mode. Captions and image embeddings always
/// come from the per-video cache files.
Providers build_providers(const RunSetup& setup);

std::vector<VideoJob> make_jobs(const RunManifest& manifest, double sample_period_s);

/// One row of an ablation table.
struct AblationRow {
  std::string label;
  FeatureFlags flags;
};

/// Row grammar: letters from W S A M P switch the matching component on;
/// M may carry a memory subset such as M[LG] (L long-term, S short-term,
/// G forgetting gate; bare M means M[LSG]); "none" is everything off.
/// A comma list of rows, where "table4" and "table5" expand to preset rows.
std::vector<AblationRow> parse_ablation_rows(std::string_view spec);
std::vector<AblationRow> table4_rows();
std::vector<AblationRow> table5_rows();

/// Frame-level labeled series for one video's records.
LabeledSeries label_series(const std::string& video_id, std::span<const ScoreRecord> records,
                           const VideoAnnotation& annotation, bool use_raw);

struct EvalOptions {
  std::filesystem::path scores;  // directory of <video_id>.jsonl, or a run output dir
  std::filesystem::path annotations;
  std::filesystem::path metadata;
  bool raw = false;
  std::optional<std::filesystem::path> out;  // metrics.json location; defaults next to scores
};

struct PlotOptions {
  std::filesystem::path scores;
  std::filesystem::path annotations;
  std::filesystem::path metadata;
  std::filesystem::path out;
};

struct AblateOptions {
  std::filesystem::path manifest;
  RunOverrides run;
  std::string rows = "table4";
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> metadata;
  bool raw = false;
};

struct SynthOptions {
  std::filesystem::path out;
  SyntheticSpec spec;
};

/// Exit codes: 0 success, 1 some videos failed, 2 configuration or input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInput = 2;

int cmd_run(const std::filesystem::path& manifest, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);
int cmd_plot_data(const PlotOptions& options, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateOptions& options, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err);

}  // namespace monitor
