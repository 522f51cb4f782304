#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmplan/error.hpp"
#include "qmplan/io.hpp"

// Experiment configuration: a flat key=value text file ('#' starts a
// comment) plus command-line overrides of the same form. Every run
// archives the fully resolved configuration next to its outputs so a
// result directory is self-describing.

namespace qmplan {

struct ExperimentConfig {
  std::string maze_path;
  std::uint64_t seed = 1;
  int num_trajectories = 3000;
  int trajectory_length = 50;
  double gamma = 0.99;
  std::string estimator = "hitting_time";  // hitting_time | successor_exact
  bool project = false;
  std::string policy = "greedy";  // greedy | boltzmann | random | adversarial
  double boltzmann_coeff = 0.1;
  int adversarial_horizon = 5;
  std::string planner = "none";  // none | optimal_waypoint | midpoint | identity
  double midpoint_slack = 1.0;
  int n_pairs = 1000;
  std::vector<double> bins = {1, 2, 4, 8, 16, 32, 64};
  // 0 means auto: half the maze diameter, decided where d* is available.
  double distant_threshold = 0.0;
  int max_steps = 0;  // 0 means auto: 4 * |S|
  std::string output_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& key,
                                             const std::string& v) {
  std::vector<double> out;
  std::string cur;
  for (char ch : v + ",") {
    if (ch == ',') {
      std::string tok = trim(cur);
      if (!tok.empty()) out.push_back(io::parse_double(tok));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (out.empty()) throw ConfigError(key + ": expected a list of numbers");
  return out;
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  using detail::parse_bool;
  if (key == "maze_path")
    cfg.maze_path = value;
  else if (key == "seed")
    cfg.seed = static_cast<std::uint64_t>(
        std::stoull(value));
  else if (key == "num_trajectories")
    cfg.num_trajectories = static_cast<int>(io::parse_int(value));
  else if (key == "trajectory_length")
    cfg.trajectory_length = static_cast<int>(io::parse_int(value));
  else if (key == "gamma")
    cfg.gamma = io::parse_double(value);
  else if (key == "estimator")
    cfg.estimator = value;
  else if (key == "project")
    cfg.project = parse_bool(key, value);
  else if (key == "policy")
    cfg.policy = value;
  else if (key == "boltzmann_coeff")
    cfg.boltzmann_coeff = io::parse_double(value);
  else if (key == "adversarial_horizon")
    cfg.adversarial_horizon = static_cast<int>(io::parse_int(value));
  else if (key == "planner")
    cfg.planner = value;
  else if (key == "midpoint_slack")
    cfg.midpoint_slack = io::parse_double(value);
  else if (key == "n_pairs")
    cfg.n_pairs = static_cast<int>(io::parse_int(value));
  else if (key == "bins")
    cfg.bins = detail::parse_double_list(key, value);
  else if (key == "distant_threshold")
    cfg.distant_threshold = io::parse_double(value);
  else if (key == "max_steps")
    cfg.max_steps = static_cast<int>(io::parse_int(value));
  else if (key == "output_dir")
    cfg.output_dir = value;
  else
    throw ConfigError("unknown config key: '" + key + "'");
}

// Parses "key=value" (used both for config file lines and --set overrides).
inline void apply_config_line(ExperimentConfig& cfg, const std::string& line) {
  std::size_t eq = line.find('=');
  if (eq == std::string::npos)
    throw ConfigError("expected key=value, got '" + line + "'");
  std::string key = detail::trim(line.substr(0, eq));
  std::string value = detail::trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key in '" + line + "'");
  try {
    apply_config_entry(cfg, key, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse value '" + value + "'");
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  std::istringstream in(io::read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      apply_config_line(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return cfg;
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.maze_path.empty()) throw ConfigError("maze_path is required");
  if (!std::ifstream(cfg.maze_path).good())
    throw ConfigError("maze_path does not exist: " + cfg.maze_path);
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
    throw ConfigError("gamma must lie in (0,1)");
  if (cfg.estimator != "hitting_time" && cfg.estimator != "successor_exact")
    throw ConfigError("estimator must be hitting_time or successor_exact");
  if (cfg.policy != "greedy" && cfg.policy != "boltzmann" &&
      cfg.policy != "random" && cfg.policy != "adversarial")
    throw ConfigError("policy must be greedy, boltzmann, random, or "
                      "adversarial");
  if (cfg.planner != "none" && cfg.planner != "optimal_waypoint" &&
      cfg.planner != "midpoint" && cfg.planner != "identity")
    throw ConfigError("planner must be none, optimal_waypoint, midpoint, or "
                      "identity");
  if (cfg.num_trajectories < 1)
    throw ConfigError("num_trajectories must be >= 1");
  if (cfg.trajectory_length < 1)
    throw ConfigError("trajectory_length must be >= 1");
  if (cfg.boltzmann_coeff <= 0.0)
    throw ConfigError("boltzmann_coeff must be > 0");
  if (cfg.adversarial_horizon < 1)
    throw ConfigError("adversarial_horizon must be >= 1");
  if (cfg.midpoint_slack < 0.0)
    throw ConfigError("midpoint_slack must be >= 0");
  if (cfg.n_pairs < 1) throw ConfigError("n_pairs must be >= 1");
  for (std::size_t i = 0; i < cfg.bins.size(); ++i) {
    if (cfg.bins[i] <= 0.0) throw ConfigError("bins must be positive");
    if (i > 0 && cfg.bins[i] <= cfg.bins[i - 1])
      throw ConfigError("bins must be strictly ascending");
  }
  if (cfg.bins.empty()) throw ConfigError("bins must be nonempty");
  if (cfg.distant_threshold < 0.0)
    throw ConfigError("distant_threshold must be >= 0");
  if (cfg.max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["adversarial_horizon"] = cfg.adversarial_horizon;
  j["bins"] = cfg.bins;
  j["boltzmann_coeff"] = cfg.boltzmann_coeff;
  j["distant_threshold"] = cfg.distant_threshold;
  j["estimator"] = cfg.estimator;
  j["gamma"] = cfg.gamma;
  j["max_steps"] = cfg.max_steps;
  j["maze_path"] = cfg.maze_path;
  j["midpoint_slack"] = cfg.midpoint_slack;
  j["n_pairs"] = cfg.n_pairs;
  j["num_trajectories"] = cfg.num_trajectories;
  j["output_dir"] = cfg.output_dir;
  j["planner"] = cfg.planner;
  j["policy"] = cfg.policy;
  j["project"] = cfg.project;
  j["seed"] = cfg.seed;
  j["trajectory_length"] = cfg.trajectory_length;
  return j;
}

}  // namespace qmplan
