#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmplan/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path,
                  "key=value config file (see configs/)");
  cmd->add_option("-s,--set", opts.overrides,
                  "config override, key=value (repeatable)");
}

qmplan::ExperimentConfig resolve(const CommonOpts& opts) {
  qmplan::ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = qmplan::load_config(opts.config_path);
  for (const std::string& kv : opts.overrides)
    qmplan::apply_config_line(cfg, kv);
  return cfg;
}

void print_curve(const qmplan::SuccessCurve& curve) {
  for (std::size_t i = 0; i < curve.bin_upper.size(); ++i)
    std::printf("  bin <= %-6g  pairs %-5d  success %.4f\n",
                curve.bin_upper[i], curve.pair_count[i],
                curve.success_rate[i]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Temporal distances, quasimetric projection, and waypoint planning "
      "in gridworlds, with distance-stratified evaluation"};
  app.require_subcommand(1);

  CommonOpts opts;
  CLI::App* generate = app.add_subcommand(
      "generate", "collect a random-walk trajectory dataset");
  CLI::App* estimate = app.add_subcommand(
      "estimate", "estimate a distance table from the dataset");
  CLI::App* project = app.add_subcommand(
      "project", "project the raw distance table onto the quasimetrics");
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "run the full pipeline: estimate, project, roll out, "
                  "report success by distance");
  CLI::App* invariance = app.add_subcommand(
      "invariance", "success ratio with vs without waypoint planning");
  CLI::App* bellman = app.add_subcommand(
      "bellman", "Bellman-error probe of exact and noise-corrupted critics");
  CLI::App* report = app.add_subcommand(
      "report", "emit gnuplot-ready .dat views of an existing run");
  for (CLI::App* cmd : {generate, estimate, project, evaluate, invariance,
                        bellman, report})
    add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    qmplan::ExperimentConfig cfg = resolve(opts);
    if (generate->parsed()) {
      qmplan::Dataset ds = qmplan::cmd_generate(cfg);
      std::printf("wrote %s (%d trajectories, coverage %.4f)\n",
                  qmplan::run_path(cfg, "dataset.csv").c_str(),
                  ds.meta.num_trajectories, ds.meta.coverage_fraction);
    } else if (estimate->parsed()) {
      qmplan::cmd_estimate(cfg);
      std::printf("wrote %s (estimator: %s)\n",
                  qmplan::run_path(cfg, "distance_raw.csv").c_str(),
                  cfg.estimator.c_str());
    } else if (project->parsed()) {
      qmplan::cmd_project(cfg);
      std::printf("wrote %s (certified quasimetric)\n",
                  qmplan::run_path(cfg, "distance_projected.csv").c_str());
    } else if (evaluate->parsed()) {
      qmplan::EvalOutputs out = qmplan::cmd_evaluate(cfg);
      std::printf("method: %s\n", out.method.c_str());
      print_curve(out.run.curve);
      std::printf("eta_aggregate %.4f  reach %s\n",
                  out.horizon.eta_aggregate,
                  qmplan::io::format_double(out.horizon.reach).c_str());
      if (out.has_invariance)
        std::printf("invariance ratio %s (base %.4f, planned %.4f)\n",
                    qmplan::io::format_double(out.invariance.ratio).c_str(),
                    out.invariance.base_rate, out.invariance.planned_rate);
      std::printf("outputs in %s\n", cfg.output_dir.c_str());
    } else if (invariance->parsed()) {
      qmplan::InvarianceResult res = qmplan::cmd_invariance(cfg);
      std::printf("base %.4f  planned %.4f  ratio %s\n", res.base_rate,
                  res.planned_rate,
                  qmplan::io::format_double(res.ratio).c_str());
    } else if (bellman->parsed()) {
      qmplan::BellmanTrace trace = qmplan::cmd_bellman(cfg);
      for (const qmplan::BellmanCheckpoint& c : trace)
        std::printf("  %-12s error %-12.6g easy %.4f distant %.4f\n",
                    c.checkpoint.c_str(), c.error, c.easy_success,
                    c.distant_success);
      std::printf("wrote %s\n",
                  qmplan::run_path(cfg, "bellman.csv").c_str());
    } else if (report->parsed()) {
      for (const std::string& p : qmplan::cmd_report(cfg))
        std::printf("wrote %s\n", p.c_str());
    }
  } catch (const qmplan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const qmplan::ComputeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
