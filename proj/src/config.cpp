#include "monitor/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "monitor/errors.hpp"
#include "monitor/util.hpp"

namespace monitor {

std::string_view to_string(PrefillStrategy s) {
  switch (s) {
    case PrefillStrategy::kNone: return "none";
    case PrefillStrategy::kQueueOnly: return "queue_only";
    case PrefillStrategy::kMemoryOnly: return "memory_only";
    case PrefillStrategy::kBoth: return "both";
  }
  return "none";
}

std::optional<PrefillStrategy> parse_prefill_strategy(std::string_view s) {
  for (auto v : {PrefillStrategy::kNone, PrefillStrategy::kQueueOnly,
                 PrefillStrategy::kMemoryOnly, PrefillStrategy::kBoth}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::size_t PipelineConfig::queue_slots() const {
  return static_cast<std::size_t>(std::llround(1.0 / queue_granularity)) + 1;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("cannot format double");
  return std::string(buf.data(), end);
}

PipelineConfig validate_config(const PipelineConfig& cfg) {
  const auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(cfg.alpha, 0.0, 1.0)) throw ConfigError("alpha out of [0,1]");
  if (!in(cfg.theta, -1.0, 1.0)) throw ConfigError("theta out of [-1,1]");
  if (!(cfg.temperature >= 0.0) || !std::isfinite(cfg.temperature)) {
    throw ConfigError("temperature must be >= 0");
  }
  if (cfg.window_w <= 0) throw ConfigError("window_w must be positive");
  if (cfg.short_window <= 0) throw ConfigError("short_window must be positive");
  if (cfg.top_k <= 0) throw ConfigError("top_k must be positive");
  if (cfg.n_captioners <= 0) throw ConfigError("n_captioners must be positive");
  if (cfg.caption_history_frames < 0) {
    throw ConfigError("caption_history_frames must be non-negative");
  }
  if (!(cfg.sample_period_s > 0.0) || !std::isfinite(cfg.sample_period_s)) {
    throw ConfigError("sample_period_s must be positive");
  }
  if (cfg.num_jobs <= 0) throw ConfigError("num_jobs must be positive");
  if (!(cfg.queue_granularity > 0.0) || cfg.queue_granularity > 1.0) {
    throw ConfigError("queue_granularity must be in (0,1]");
  }
  const double inv = 1.0 / cfg.queue_granularity;
  if (std::abs(inv - std::round(inv)) > 1e-9) throw ConfigError("1/granularity not integer");
  if (cfg.window_w < cfg.short_window) throw ConfigError("window_w < short_window");
  return cfg;
}

namespace {

struct Field {
  std::string_view key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("bad real value for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("bad integer value for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean value for " + std::string(key) + ": '" + std::string(v) + "'");
}

template <auto Member>
Field real_field(std::string_view key) {
  return {key, [key](PipelineConfig& c, std::string_view v) { c.*Member = parse_real(key, v); },
          [](const PipelineConfig& c) { return format_double(c.*Member); }};
}

template <auto Member>
Field int_field(std::string_view key) {
  return {key, [key](PipelineConfig& c, std::string_view v) { c.*Member = parse_int(key, v); },
          [](const PipelineConfig& c) { return std::to_string(c.*Member); }};
}

template <auto Member>
Field flag_field(std::string_view key) {
  return {key,
          [key](PipelineConfig& c, std::string_view v) { c.flags.*Member = parse_bool(key, v); },
          [](const PipelineConfig& c) { return std::string(c.flags.*Member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      real_field<&PipelineConfig::alpha>("alpha"),
      real_field<&PipelineConfig::theta>("theta"),
      real_field<&PipelineConfig::temperature>("temperature"),
      int_field<&PipelineConfig::window_w>("window_w"),
      int_field<&PipelineConfig::short_window>("short_window"),
      int_field<&PipelineConfig::top_k>("top_k"),
      int_field<&PipelineConfig::n_captioners>("n_captioners"),
      int_field<&PipelineConfig::caption_history_frames>("caption_history_frames"),
      real_field<&PipelineConfig::sample_period_s>("sample_period_s"),
      int_field<&PipelineConfig::num_jobs>("num_jobs"),
      real_field<&PipelineConfig::queue_granularity>("queue_granularity"),
      {"prefill_strategy",
       [](PipelineConfig& c, std::string_view v) {
         auto s = parse_prefill_strategy(v);
         if (!s) throw ConfigError("bad prefill_strategy: '" + std::string(v) + "'");
         c.prefill_strategy = *s;
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.prefill_strategy)); }},
      flag_field<&FeatureFlags::enable_weighting>("enable_weighting"),
      flag_field<&FeatureFlags::enable_queue>("enable_queue"),
      flag_field<&FeatureFlags::enable_priors>("enable_priors"),
      flag_field<&FeatureFlags::enable_memory>("enable_memory"),
      flag_field<&FeatureFlags::enable_prediction>("enable_prediction"),
      flag_field<&FeatureFlags::enable_long_term>("enable_long_term"),
      flag_field<&FeatureFlags::enable_short_term>("enable_short_term"),
      flag_field<&FeatureFlags::enable_forgetting_gate>("enable_forgetting_gate"),
  };
  return table;
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) throw ConfigError("duplicate key '" + std::string(key) + "'");
    it->set(cfg, value);
  }
  return validate_config(cfg);
}

PipelineConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  for (const auto& f : fields()) out << f.key << '=' << f.get(cfg) << '\n';
  return out.str();
}

}  // namespace monitor
