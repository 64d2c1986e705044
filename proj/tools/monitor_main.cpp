// monitor: online video anomaly scoring over cached captions.
//
//   monitor synth --out data/synthetic
//   monitor run data/synthetic/manifest.json --out runs/demo
//   monitor eval runs/demo --annotations data/synthetic/annotations.txt \
//       --metadata data/synthetic/metadata.txt
//   monitor plot-data runs/demo --annotations ... --metadata ... --out runs/demo/curves
//   monitor ablate data/synthetic/manifest.json --out runs/ablate --flags table4,table5

#include <CLI11.hpp>
#include <iostream>

#include "monitor/cli.hpp"

namespace {

void add_run_options(CLI::App* cmd, monitor::RunOverrides& o) {
  cmd->add_option_function<std::string>("--config", [&o](const std::string& v) { o.config = v; },
                                        "key=value pipeline config");
  cmd->add_option_function<std::string>("--priors", [&o](const std::string& v) { o.priors = v; },
                                        "anomaly definitions file, or 'none'");
  cmd->add_option_function<std::string>("--prefill", [&o](const std::string& v) { o.prefill = v; },
                                        "cold-start exemplar file, or 'none'");
  cmd->add_option_function<std::string>("--mode", [&o](const std::string& v) { o.mode = v; },
                                        "provider mode")
      ->check(CLI::IsMember({"live", "record", "replay", "mock"}));
  cmd->add_option_function<std::string>("--record-from",
                                        [&o](const std::string& v) { o.record_from = v; },
                                        "services recorded in record mode")
      ->check(CLI::IsMember({"live", "mock"}));
  cmd->add_option_function<std::string>("--out", [&o](const std::string& v) { o.out = v; },
                                        "output directory");
  cmd->add_option_function<int>("--num-jobs", [&o](int v) { o.num_jobs = v; },
                                "videos processed concurrently");
  cmd->add_flag("--realtime", o.realtime, "pace frames at the decision period");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online video anomaly monitor"};
  app.require_subcommand(1);

  std::string run_manifest;
  monitor::RunOverrides run_overrides;
  auto* run = app.add_subcommand("run", "score every video in a manifest");
  run->add_option("manifest", run_manifest, "run manifest (JSON)")->required();
  add_run_options(run, run_overrides);

  monitor::EvalOptions eval_opts;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "frame-level AUC/AP against annotations");
  eval->add_option("scores", eval_opts.scores, "score directory or run output directory")->required();
  eval->add_option("--annotations", eval_opts.annotations, "temporal annotation file")->required();
  eval->add_option("--metadata", eval_opts.metadata, "video metadata sidecar")->required();
  eval->add_flag("--raw", eval_opts.raw, "use raw instead of smoothed scores");
  eval->add_option("--out", eval_out, "metrics.json path");

  monitor::PlotOptions plot_opts;
  auto* plot = app.add_subcommand("plot-data", "per-video CSV score curves");
  plot->add_option("scores", plot_opts.scores, "score directory or run output directory")->required();
  plot->add_option("--annotations", plot_opts.annotations)->required();
  plot->add_option("--metadata", plot_opts.metadata)->required();
  plot->add_option("--out", plot_opts.out, "CSV output directory")->required();

  monitor::AblateOptions ablate_opts;
  std::string ablate_ann, ablate_meta;
  auto* ablate = app.add_subcommand("ablate", "rerun the corpus per component combination");
  ablate->add_option("manifest", ablate_opts.manifest, "run manifest (JSON)")->required();
  add_run_options(ablate, ablate_opts.run);
  ablate->add_option("--flags", ablate_opts.rows,
                     "comma list of rows (e.g. none,W,M[LG],WSAMP) or table4/table5")
      ->capture_default_str();
  ablate->add_option("--annotations", ablate_ann);
  ablate->add_option("--metadata", ablate_meta);
  ablate->add_flag("--raw", ablate_opts.raw, "evaluate raw instead of smoothed scores");

  monitor::SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "write the synthetic keyword corpus");
  synth->add_option("--out", synth_opts.out, "output directory")->required();
  synth->add_option("--frames", synth_opts.spec.n_frames, "sampled frames per video")
      ->capture_default_str();
  synth->add_option("--seed", synth_opts.spec.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : monitor::kExitInput;
  }

  if (run->parsed()) return monitor::cmd_run(run_manifest, run_overrides, std::cout, std::cerr);
  if (eval->parsed()) {
    if (!eval_out.empty()) eval_opts.out = eval_out;
    return monitor::cmd_eval(eval_opts, std::cout, std::cerr);
  }
  if (plot->parsed()) return monitor::cmd_plot_data(plot_opts, std::cout, std::cerr);
  if (ablate->parsed()) {
    if (!ablate_ann.empty()) ablate_opts.annotations = ablate_ann;
    if (!ablate_meta.empty()) ablate_opts.metadata = ablate_meta;
    return monitor::cmd_ablate(ablate_opts, std::cout, std::cerr);
  }
  if (synth->parsed()) return monitor::cmd_synth(synth_opts, std::cout, std::cerr);
  return monitor::kExitInput;
}
