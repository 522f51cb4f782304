#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qmplan/bellman.hpp"
#include "qmplan/closure.hpp"
#include "qmplan/config.hpp"
#include "qmplan/dataset.hpp"
#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/evaluate.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/hitting_time.hpp"
#include "qmplan/io.hpp"
#include "qmplan/occupancy.hpp"
#include "qmplan/planner.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/rng.hpp"
#include "qmplan/rollout.hpp"
#include "qmplan/successor_distance.hpp"

// The command layer: everything the CLI does, as plain functions over
// ExperimentConfig, so tests drive the exact same code paths. All
// randomness flows from cfg.seed through named streams; outputs land in
// cfg.output_dir with fixed file names and are byte-reproducible.

namespace qmplan {

// One tag per consumer of the master seed. Adding a consumer never
// perturbs the streams of existing ones.
namespace streams {
inline constexpr std::uint64_t kDataset = 0xDA7A;
inline constexpr std::uint64_t kTieBreak = 0x71E;
inline constexpr std::uint64_t kEval = 0xEA1;
inline constexpr std::uint64_t kInvariance = 0x1BA7;
inline constexpr std::uint64_t kAdversarial = 0xAD7;
inline constexpr std::uint64_t kBellmanNoise = 0xB0157;
inline constexpr std::uint64_t kBellmanEval = 0xBEA1;
}  // namespace streams

inline std::string run_path(const ExperimentConfig& cfg,
                            const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

inline void ensure_output_dir(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec)
    throw ConfigError("cannot create output_dir '" + cfg.output_dir +
                      "': " + ec.message());
}

inline void archive_config(const ExperimentConfig& cfg) {
  io::write_text_file(run_path(cfg, "resolved_config.json"),
                      config_to_json(cfg).dump(2) + "\n");
}

// JSON value for a double that survives non-finite cases: finite numbers
// stay numbers, inf/nan become their sentinel strings (JSON itself has no
// encoding for them).
inline nlohmann::json json_double(double x) {
  if (std::isfinite(x)) return x;
  return io::format_double(x);
}

inline double json_to_double(const nlohmann::json& j) {
  if (j.is_string()) return io::parse_double(j.get<std::string>());
  return j.get<double>();
}

// ---- datasets ----

struct Dataset {
  std::vector<Trajectory> trajectories;
  DatasetMeta meta;
};

inline Dataset generate_dataset(const GridWorld& world,
                                const ExperimentConfig& cfg) {
  RandomPolicy behavior;
  Dataset ds;
  ds.trajectories =
      collect_trajectories(world, behavior, cfg.num_trajectories,
                           cfg.trajectory_length,
                           derive_seed(cfg.seed, streams::kDataset));
  ds.meta.seed = cfg.seed;
  ds.meta.num_trajectories = cfg.num_trajectories;
  ds.meta.trajectory_length = cfg.trajectory_length;
  ds.meta.coverage_fraction =
      coverage_fraction(ds.trajectories, world.num_states());
  return ds;
}

inline void write_dataset(const ExperimentConfig& cfg, const Dataset& ds) {
  io::write_dataset_csv(run_path(cfg, "dataset.csv"), ds.trajectories);
  io::write_dataset_meta(run_path(cfg, "dataset_meta.json"), ds.meta);
}

// Reuses output_dir/dataset.csv when it matches the configuration;
// otherwise generates (and persists) a fresh one. A present-but-different
// dataset is an error rather than something to silently overwrite.
inline Dataset load_or_generate_dataset(const GridWorld& world,
                                        const ExperimentConfig& cfg) {
  std::string csv = run_path(cfg, "dataset.csv");
  std::string meta = run_path(cfg, "dataset_meta.json");
  if (std::filesystem::exists(csv) && std::filesystem::exists(meta)) {
    Dataset ds;
    ds.meta = io::read_dataset_meta(meta);
    if (ds.meta.seed != cfg.seed ||
        ds.meta.num_trajectories != cfg.num_trajectories ||
        ds.meta.trajectory_length != cfg.trajectory_length)
      throw ConfigError(csv + " was generated under a different config; "
                              "remove it or change output_dir");
    ds.trajectories = io::read_dataset_csv(csv);
    for (const Trajectory& t : ds.trajectories)
      if (!t.consistent_with(world))
        throw ConfigError(csv + " does not replay under this maze");
    return ds;
  }
  Dataset ds = generate_dataset(world, cfg);
  ensure_output_dir(cfg);
  write_dataset(cfg, ds);
  return ds;
}

// ---- estimation ----

inline DistanceTable estimate_distance(const GridWorld& world,
                                       const ExperimentConfig& cfg,
                                       const std::vector<Trajectory>& trajs) {
  if (cfg.estimator == "hitting_time") {
    if (trajs.empty())
      throw ConfigError("hitting_time estimator needs a dataset");
    return empirical_hitting_time(trajs, world.num_states());
  }
  return successor_distance_exact(world, cfg.gamma).state;
}

// ---- method assembly ----

struct MethodSetup {
  std::unique_ptr<DistanceTable> table;  // policy/planner belief distances
  std::unique_ptr<ActionDistanceTable> lift;
  std::unique_ptr<Policy> base;
  std::unique_ptr<Planner> planner;
  std::unique_ptr<Policy> composed;  // PlanComposed(base, planner)
  std::string method;
};

inline bool method_needs_distances(const ExperimentConfig& cfg) {
  return cfg.policy == "greedy" || cfg.policy == "boltzmann" ||
         cfg.planner != "none";
}

inline bool method_needs_dataset(const ExperimentConfig& cfg) {
  return method_needs_distances(cfg) && cfg.estimator == "hitting_time";
}

inline MethodSetup build_method(const GridWorld& world,
                                const ExperimentConfig& cfg,
                                const std::vector<Trajectory>& trajs) {
  MethodSetup m;
  if (method_needs_distances(cfg)) {
    DistanceTable d = estimate_distance(world, cfg, trajs);
    m.method = cfg.estimator;
    if (cfg.project) {
      d = path_relaxation_closure(d).d;
      m.method += "_projected";
    }
    m.table = std::make_unique<DistanceTable>(std::move(d));
    m.lift = std::make_unique<ActionDistanceTable>(
        action_distance_from_state(world, *m.table));
  }

  if (cfg.policy == "random") {
    m.base = std::make_unique<RandomPolicy>();
    m.method = m.method.empty() ? "random" : m.method + "+random";
  } else if (cfg.policy == "adversarial") {
    m.base = std::make_unique<AdversarialPolicy>(
        world, cfg.adversarial_horizon,
        derive_seed(cfg.seed, streams::kAdversarial));
    std::string name =
        "adversarial_h" + std::to_string(cfg.adversarial_horizon);
    m.method = m.method.empty() ? name : m.method + "+" + name;
  } else if (cfg.policy == "greedy") {
    m.base = std::make_unique<GreedyPolicy>(
        *m.lift, derive_seed(cfg.seed, streams::kTieBreak));
    m.method += "+greedy";
  } else {
    m.base = std::make_unique<BoltzmannPolicy>(*m.lift, cfg.boltzmann_coeff);
    m.method += "+boltzmann";
  }

  if (cfg.planner != "none") {
    if (cfg.planner == "optimal_waypoint")
      m.planner = std::make_unique<OptimalWaypointPlanner>(*m.table);
    else if (cfg.planner == "midpoint")
      m.planner =
          std::make_unique<MidpointPlanner>(*m.table, cfg.midpoint_slack);
    else
      m.planner = std::make_unique<IdentityPlanner>();
    m.composed = std::make_unique<PlanComposedPolicy>(*m.base, *m.planner);
  }
  return m;
}

// ---- resolved evaluation parameters ----

inline double max_finite_distance(const DistanceTable& d) {
  double m = 0.0;
  for (State s = 0; s < d.n; ++s)
    for (State g = 0; g < d.n; ++g) {
      double v = d.at(s, g);
      if (v != kInf) m = std::max(m, v);
    }
  return m;
}

inline int resolve_max_steps(const ExperimentConfig& cfg,
                             const GridWorld& world) {
  return cfg.max_steps > 0 ? cfg.max_steps : default_max_steps(world);
}

inline double resolve_distant_threshold(const ExperimentConfig& cfg,
                                        const DistanceTable& dstar) {
  if (cfg.distant_threshold > 0.0) return cfg.distant_threshold;
  return std::max(2.0, std::floor(max_finite_distance(dstar) / 2.0));
}

// ---- commands ----

inline Dataset cmd_generate(const ExperimentConfig& cfg) {
  validate_config(cfg);
  GridWorld world = io::load_maze(cfg.maze_path);
  Dataset ds = generate_dataset(world, cfg);
  ensure_output_dir(cfg);
  write_dataset(cfg, ds);
  archive_config(cfg);
  return ds;
}

inline void cmd_estimate(const ExperimentConfig& cfg) {
  validate_config(cfg);
  GridWorld world = io::load_maze(cfg.maze_path);
  std::vector<Trajectory> trajs;
  if (cfg.estimator == "hitting_time")
    trajs = load_or_generate_dataset(world, cfg).trajectories;
  DistanceTable d = estimate_distance(world, cfg, trajs);
  ensure_output_dir(cfg);
  io::write_distance_csv(run_path(cfg, "distance_raw.csv"), d);
  archive_config(cfg);
}

inline void cmd_project(const ExperimentConfig& cfg) {
  validate_config(cfg);
  GridWorld world = io::load_maze(cfg.maze_path);
  std::string raw_path = run_path(cfg, "distance_raw.csv");
  DistanceTable raw = std::filesystem::exists(raw_path)
                          ? io::read_distance_csv(raw_path)
                          : [&] {
                              std::vector<Trajectory> trajs;
                              if (cfg.estimator == "hitting_time")
                                trajs = load_or_generate_dataset(world, cfg)
                                            .trajectories;
                              return estimate_distance(world, cfg, trajs);
                            }();
  QuasimetricTable qm = path_relaxation_closure(raw);
  ensure_output_dir(cfg);
  io::write_distance_csv(run_path(cfg, "distance_projected.csv"), qm.d);
  io::write_quasimetric_meta(run_path(cfg, "quasimetric_meta.json"), qm);
  archive_config(cfg);
}

struct EvalOutputs {
  std::string method;
  bool used_dataset = false;
  DatasetMeta meta;
  EvalRun run;
  HorizonReport horizon;
  bool has_invariance = false;
  InvarianceResult invariance;
  double distant_threshold = 0.0;
  int max_steps = 0;
};

inline EvalOutputs run_evaluate(const GridWorld& world,
                                const ExperimentConfig& cfg) {
  DistanceTable dstar = shortest_path_distances(world);
  EvalOutputs out;
  out.max_steps = resolve_max_steps(cfg, world);
  out.distant_threshold = resolve_distant_threshold(cfg, dstar);

  std::vector<Trajectory> trajs;
  if (method_needs_dataset(cfg)) {
    Dataset ds = load_or_generate_dataset(world, cfg);
    out.used_dataset = true;
    out.meta = ds.meta;
    trajs = std::move(ds.trajectories);
  }
  MethodSetup m = build_method(world, cfg, trajs);
  out.method = m.method;

  out.run = stratified_success(world, *m.base, dstar, cfg.bins, cfg.n_pairs,
                               out.max_steps,
                               derive_seed(cfg.seed, streams::kEval));
  out.horizon = eta_and_reach(out.run.curve, cfg.bins.front());

  if (m.planner) {
    out.has_invariance = true;
    out.invariance = planning_invariance_ratio(
        world, *m.base, *m.composed, dstar, out.distant_threshold,
        cfg.n_pairs, out.max_steps,
        derive_seed(cfg.seed, streams::kInvariance));
  }
  return out;
}

inline nlohmann::json summary_to_json(const EvalOutputs& out) {
  nlohmann::json j;
  if (out.used_dataset)
    j["coverage_fraction"] = out.meta.coverage_fraction;
  j["curve"]["bin_upper"] = nlohmann::json::array();
  j["curve"]["n_pairs"] = nlohmann::json::array();
  j["curve"]["success_rate"] = nlohmann::json::array();
  for (std::size_t i = 0; i < out.run.curve.bin_upper.size(); ++i) {
    j["curve"]["bin_upper"].push_back(out.run.curve.bin_upper[i]);
    j["curve"]["n_pairs"].push_back(out.run.curve.pair_count[i]);
    j["curve"]["success_rate"].push_back(out.run.curve.success_rate[i]);
  }
  j["distant_threshold"] = out.distant_threshold;
  j["eta_aggregate"] = json_double(out.horizon.eta_aggregate);
  j["eta_per_doubling"] = nlohmann::json::array();
  for (const auto& [c, eta] : out.horizon.eta_per_doubling)
    j["eta_per_doubling"].push_back({c, eta});
  if (out.has_invariance) {
    j["invariance"]["base_rate"] = out.invariance.base_rate;
    j["invariance"]["n_pairs"] = out.invariance.n_pairs;
    j["invariance"]["planned_rate"] = out.invariance.planned_rate;
    j["invariance"]["ratio"] = json_double(out.invariance.ratio);
  } else {
    j["invariance"] = nullptr;
  }
  j["max_steps"] = out.max_steps;
  j["method"] = out.method;
  j["reach_wc"] = json_double(out.horizon.reach);
  return j;
}

inline void write_eval_outputs(const ExperimentConfig& cfg,
                               const EvalOutputs& out) {
  ensure_output_dir(cfg);
  io::write_curve_csv(run_path(cfg, "curve.csv"), out.run.curve);
  io::write_pairs_csv(run_path(cfg, "pairs.csv"), out.run.pairs);
  double ratio = out.has_invariance ? out.invariance.ratio : std::nan("");
  io::write_report_csv(run_path(cfg, "report.csv"),
                       {{out.method, out.horizon, ratio}});
  io::write_scatter_csv(
      run_path(cfg, "scatter.csv"),
      {{out.method, out.horizon.eta_aggregate, ratio}});
  io::write_text_file(run_path(cfg, "summary.json"),
                      summary_to_json(out).dump(2) + "\n");
  archive_config(cfg);
}

inline EvalOutputs cmd_evaluate(const ExperimentConfig& cfg) {
  validate_config(cfg);
  GridWorld world = io::load_maze(cfg.maze_path);
  EvalOutputs out = run_evaluate(world, cfg);
  write_eval_outputs(cfg, out);
  return out;
}

inline InvarianceResult cmd_invariance(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.planner == "none")
    throw ConfigError("invariance needs a planner (set planner=...)");
  GridWorld world = io::load_maze(cfg.maze_path);
  DistanceTable dstar = shortest_path_distances(world);
  int max_steps = resolve_max_steps(cfg, world);
  double threshold = resolve_distant_threshold(cfg, dstar);

  std::vector<Trajectory> trajs;
  if (method_needs_dataset(cfg))
    trajs = load_or_generate_dataset(world, cfg).trajectories;
  MethodSetup m = build_method(world, cfg, trajs);

  InvarianceResult res = planning_invariance_ratio(
      world, *m.base, *m.composed, dstar, threshold, cfg.n_pairs, max_steps,
      derive_seed(cfg.seed, streams::kInvariance));

  ensure_output_dir(cfg);
  nlohmann::json j;
  j["base_rate"] = res.base_rate;
  j["distant_threshold"] = threshold;
  j["max_steps"] = max_steps;
  j["method"] = m.method;
  j["n_pairs"] = res.n_pairs;
  j["planned_rate"] = res.planned_rate;
  j["ratio"] = json_double(res.ratio);
  io::write_text_file(run_path(cfg, "invariance.json"), j.dump(2) + "\n");
  archive_config(cfg);
  return res;
}

// Noise sweep standing in for training checkpoints: the exact critic,
// then the same critic with one fixed normal perturbation scaled by each
// sigma. Success columns come from greedy control on the checkpoint's own
// scores, over shared easy/distant pair sets.
inline const std::vector<double>& bellman_noise_levels() {
  static const std::vector<double> levels = {0.01, 0.05, 0.1, 0.5};
  return levels;
}

namespace detail {

// Greedy control on a critic checkpoint: higher score must mean cheaper,
// so costs are negated scores with the diagonal pinned to zero (stepping
// onto the goal then dominates hovering next to it). Entries may go
// negative under noise, which argmin handles fine; this table is never
// validated as a distance.
inline DistanceTable cost_table_from_scores(const Logits& scores) {
  DistanceTable d(scores.rows);
  for (State s = 0; s < scores.rows; ++s)
    for (State g = 0; g < scores.cols; ++g)
      d.at(s, g) = s == g ? 0.0 : -scores.at(s, g);
  return d;
}

inline double success_rate_over_pairs(
    const GridWorld& world, const Policy& policy, const DistanceTable& dstar,
    double lo, double hi, int n, int max_steps, std::uint64_t seed) {
  auto pool = eligible_pairs(dstar, lo, hi);
  if (pool.empty())
    throw ComputeError("no evaluation pair with distance in [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  Rng pick(derive_seed(seed, 0x71CC));
  int won = 0;
  for (int i = 0; i < n; ++i) {
    auto [s, g] = pool[pick.uniform_index(pool.size())];
    won += rollout(world, policy, s, g, max_steps,
                   derive_seed(seed, 0x0117, i))
               .success
               ? 1
               : 0;
  }
  return static_cast<double>(won) / n;
}

}  // namespace detail

inline BellmanTrace run_bellman(const GridWorld& world,
                                const ExperimentConfig& cfg) {
  Dataset ds = load_or_generate_dataset(world, cfg);
  DiscountedOccupancy occ = discounted_occupancy_uniform(world, cfg.gamma);
  BellmanBatch batch =
      build_bellman_batch(world, ds.trajectories, cfg.seed);
  DistanceTable dstar = shortest_path_distances(world);
  int max_steps = resolve_max_steps(cfg, world);
  double thr = resolve_distant_threshold(cfg, dstar);
  std::uint64_t eval_seed = derive_seed(cfg.seed, streams::kBellmanEval);

  Logits exact = state_critic_scores(occ);
  std::vector<double> noise(exact.v.size());
  Rng noise_rng(derive_seed(cfg.seed, streams::kBellmanNoise));
  for (double& e : noise) e = noise_rng.normal();

  BellmanTrace trace;
  auto add_checkpoint = [&](const std::string& name, double sigma) {
    Logits scores = exact;
    for (std::size_t k = 0; k < scores.v.size(); ++k)
      scores.v[k] += sigma * noise[k];
    CriticLogits cl = sigma == 0.0
                          ? exact_critic_logits(world, occ, batch)
                          : critic_logits_from_scores(world, scores, batch);
    BellmanCheckpoint cp;
    cp.checkpoint = name;
    cp.sigma = sigma;
    cp.error =
        bellman_error(cl.l, cl.l_next, batch.x1, batch.xT, cfg.gamma);

    DistanceTable cost = detail::cost_table_from_scores(scores);
    ActionDistanceTable lift = action_distance_from_state(world, cost);
    GreedyPolicy greedy(lift, derive_seed(cfg.seed, streams::kTieBreak));
    cp.easy_success = detail::success_rate_over_pairs(
        world, greedy, dstar, 1.0, thr - 1.0, cfg.n_pairs, max_steps,
        derive_seed(eval_seed, 0xEA57));
    cp.distant_success = detail::success_rate_over_pairs(
        world, greedy, dstar, thr, kInf, cfg.n_pairs, max_steps,
        derive_seed(eval_seed, 0xFA2));
    trace.push_back(std::move(cp));
  };

  add_checkpoint("exact", 0.0);
  for (double sigma : bellman_noise_levels()) {
    char label[32];
    std::snprintf(label, sizeof(label), "noise_%g", sigma);
    add_checkpoint(label, sigma);
  }
  return trace;
}

inline BellmanTrace cmd_bellman(const ExperimentConfig& cfg) {
  validate_config(cfg);
  GridWorld world = io::load_maze(cfg.maze_path);
  BellmanTrace trace = run_bellman(world, cfg);
  ensure_output_dir(cfg);
  io::write_bellman_csv(run_path(cfg, "bellman.csv"), trace);
  archive_config(cfg);
  return trace;
}

// Gnuplot-ready views over an existing run directory. Deliberately does
// not touch resolved_config.json: that file documents the run that
// produced the data, and reporting must not repaint it.
inline std::vector<std::string> cmd_report(const ExperimentConfig& cfg) {
  std::vector<std::string> written;
  std::string curve_path = run_path(cfg, "curve.csv");
  if (std::filesystem::exists(curve_path)) {
    SuccessCurve c = io::read_curve_csv(curve_path);
    std::string out = "# bin_upper success_rate n_pairs\n";
    for (std::size_t i = 0; i < c.bin_upper.size(); ++i)
      out += io::format_double(c.bin_upper[i]) + " " +
             io::format_double(c.success_rate[i]) + " " +
             std::to_string(c.pair_count[i]) + "\n";
    std::string p = run_path(cfg, "plot_curve.dat");
    io::write_text_file(p, out);
    written.push_back(p);
  }
  std::string scatter_path = run_path(cfg, "scatter.csv");
  if (std::filesystem::exists(scatter_path)) {
    auto rows = io::read_csv(scatter_path,
                             "method,eta_aggregate,invariance_ratio");
    std::string out = "# eta_aggregate invariance_ratio method\n";
    for (const auto& r : rows)
      out += r[1] + " " + r[2] + " " + r[0] + "\n";
    std::string p = run_path(cfg, "plot_scatter.dat");
    io::write_text_file(p, out);
    written.push_back(p);
  }
  std::string bellman_path = run_path(cfg, "bellman.csv");
  if (std::filesystem::exists(bellman_path)) {
    BellmanTrace t = io::read_bellman_csv(bellman_path);
    std::string out = "# index error easy_success distant_success label\n";
    for (std::size_t i = 0; i < t.size(); ++i)
      out += std::to_string(i) + " " + io::format_double(t[i].error) + " " +
             io::format_double(t[i].easy_success) + " " +
             io::format_double(t[i].distant_success) + " " +
             t[i].checkpoint + "\n";
    std::string p = run_path(cfg, "plot_bellman.dat");
    io::write_text_file(p, out);
    written.push_back(p);
  }
  if (written.empty())
    throw ConfigError("nothing to report: no curve.csv, scatter.csv, or "
                      "bellman.csv under " + cfg.output_dir);
  return written;
}

}  // namespace qmplan
