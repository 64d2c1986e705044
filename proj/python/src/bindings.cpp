#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "monitor/cli.hpp"
#include "monitor/errors.hpp"
#include "monitor/eval.hpp"
#include "monitor/memory.hpp"
#include "monitor/mock_providers.hpp"
#include "monitor/pipeline.hpp"
#include "monitor/scoring.hpp"

namespace py = pybind11;
using namespace monitor;

namespace {

/// Runs a command, returning (exit code, stdout, stderr).
template <typename F>
py::tuple captured(F&& fn) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = fn(out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::dict record_dict(const ScoreRecord& r) {
  py::dict d;
  d["video_id"] = r.video_id;
  d["frame_index"] = r.frame_index;
  d["source_frame"] = r.source_frame;
  d["time_s"] = r.time_s;
  d["raw"] = r.raw;
  d["smoothed"] = r.smoothed;
  d["degraded"] = r.degraded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Online video anomaly monitor: metrics, scoring helpers and CLI commands.";

  py::register_exception<Error>(m, "MonitorError");
  py::register_exception<UndefinedMetric>(m, "UndefinedMetric");

  m.def("roc_auc", [](const std::vector<double>& s, const std::vector<std::uint8_t>& y) { return roc_auc(s, y); },
        py::arg("scores"), py::arg("labels"));
  m.def("average_precision",
        [](const std::vector<double>& s, const std::vector<std::uint8_t>& y) { return average_precision(s, y); },
        py::arg("scores"), py::arg("labels"));
  m.def("smooth", &smooth, py::arg("raw"), py::arg("previous"), py::arg("alpha"));
  m.def("quantize_score", &quantize_score, py::arg("score"), py::arg("granularity") = 0.1);
  m.def("parse_score", &parse_score, py::arg("response"));
  m.def("format_double", &format_double);

  m.def("embed_text", [](const std::string& text, std::size_t dim) {
    HashEmbedder e(dim);
    const auto emb = e.embed_text(text);
    return std::vector<double>(emb.values().begin(), emb.values().end());
  }, py::arg("text"), py::arg("dim") = 128);

  m.def("gate", [](const std::vector<double>& current, const std::vector<std::vector<double>>& buffer, double theta) {
    const FrameSummary cur{0, "", Embedding(current)};
    std::deque<FrameSummary> buf;
    for (std::size_t i = 0; i < buffer.size(); ++i) buf.push_back({static_cast<FrameIndex>(i), "", Embedding(buffer[i])});
    std::vector<std::size_t> kept;
    for (const auto& s : forgetting_gate(cur, buf, theta)) kept.push_back(static_cast<std::size_t>(s.frame_index));
    return kept;
  }, py::arg("current"), py::arg("buffer"), py::arg("theta"),
     "Indices of buffer entries retained by the forgetting gate.");

  m.def("default_config", [] { return serialize_config(PipelineConfig{}); });
  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); });

  m.def("read_scores", [](const std::filesystem::path& path) {
    py::list out;
    for (const auto& r : read_score_file(path)) out.append(record_dict(r));
    return out;
  });

  m.def("synth", [](const std::filesystem::path& out) {
    return captured([&](std::ostream& o, std::ostream& e) { return cmd_synth({out, {}}, o, e); });
  }, py::arg("out"));

  m.def("run", [](const std::filesystem::path& manifest, std::optional<std::filesystem::path> out,
                  std::optional<std::string> mode, std::optional<std::filesystem::path> config,
                  std::optional<int> num_jobs) {
    RunOverrides o;
    o.out = std::move(out);
    o.mode = std::move(mode);
    o.config = std::move(config);
    o.num_jobs = num_jobs;
    return captured([&](std::ostream& so, std::ostream& se) { return cmd_run(manifest, o, so, se); });
  }, py::arg("manifest"), py::arg("out") = py::none(), py::arg("mode") = py::none(),
     py::arg("config") = py::none(), py::arg("num_jobs") = py::none());

  m.def("evaluate", [](const std::filesystem::path& scores, const std::filesystem::path& annotations,
                       const std::filesystem::path& metadata, bool raw) {
    EvalOptions o;
    o.scores = scores;
    o.annotations = annotations;
    o.metadata = metadata;
    o.raw = raw;
    return captured([&](std::ostream& so, std::ostream& se) { return cmd_eval(o, so, se); });
  }, py::arg("scores"), py::arg("annotations"), py::arg("metadata"), py::arg("raw") = false);
}
