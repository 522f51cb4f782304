#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmplan/bellman.hpp"
#include "qmplan/closure.hpp"
#include "qmplan/dataset.hpp"
#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/evaluate.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/transport.hpp"

// File formats. Everything here is deterministic: fixed column orders,
// '\n' line endings, doubles printed with 17 significant digits so they
// round-trip bit-exactly, and "inf"/"-inf"/"nan" sentinels for the
// non-finite values. JSON goes through nlohmann::json, whose objects
// keep keys sorted, so repeated runs produce identical bytes.

namespace qmplan::io {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& tok) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  if (tok == "nan") return std::nan("");
  // Strict decimal forms only: strtod would also take "Infinity", "NAN"
  // and hex floats, none of which the writer ever emits. std::stod is out
  // because it throws on subnormal results, which do round-trip fine.
  if (tok.find_first_not_of("0123456789+-.eE") != std::string::npos)
    throw ConfigError("malformed number: '" + tok + "'");
  errno = 0;
  const char* s = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw ConfigError("malformed number: '" + tok + "'");
  if (errno == ERANGE && (v == HUGE_VAL || v == -HUGE_VAL))
    throw ConfigError("number out of range: '" + tok + "'");
  return v;
}

inline long long parse_int(const std::string& tok) {
  std::size_t used = 0;
  long long v;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw ConfigError("malformed integer: '" + tok + "'");
  }
  if (used != tok.size())
    throw ConfigError("malformed integer: '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  if (!out.good()) throw ConfigError("write failed: " + path);
}

inline GridWorld load_maze(const std::string& path) {
  return GridWorld::from_text(read_text_file(path));
}

// Reads a CSV with the expected header, returning data rows split into
// fields (header validated, blank trailing lines ignored).
inline std::vector<std::vector<std::string>> read_csv(
    const std::string& path, const std::string& expected_header) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty CSV file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw ConfigError(path + ": expected header '" + expected_header +
                      "', got '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  const std::size_t width = split_csv_line(expected_header).size();
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != width)
      throw ConfigError(path + ": row with " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(width));
    rows.push_back(std::move(fields));
  }
  return rows;
}

// ---- datasets ----

inline void write_dataset_csv(const std::string& path,
                              const std::vector<Trajectory>& trajs) {
  std::ostringstream out;
  out << "traj_id,t,s,a,s_next\n";
  for (std::size_t id = 0; id < trajs.size(); ++id) {
    const Trajectory& tr = trajs[id];
    for (std::size_t t = 0; t < tr.actions.size(); ++t)
      out << id << ',' << t << ',' << tr.states[t] << ','
          << static_cast<int>(tr.actions[t]) << ',' << tr.states[t + 1]
          << '\n';
  }
  write_text_file(path, out.str());
}

inline std::vector<Trajectory> read_dataset_csv(const std::string& path) {
  auto rows = read_csv(path, "traj_id,t,s,a,s_next");
  std::vector<Trajectory> trajs;
  for (const auto& r : rows) {
    std::size_t id = static_cast<std::size_t>(parse_int(r[0]));
    long long t = parse_int(r[1]);
    if (id >= trajs.size()) trajs.resize(id + 1);
    Trajectory& tr = trajs[id];
    if (t != static_cast<long long>(tr.actions.size()))
      throw ConfigError(path + ": transitions out of order in trajectory " +
                        std::to_string(id));
    int a = static_cast<int>(parse_int(r[3]));
    if (a < 0 || a >= kNumActions)
      throw ConfigError(path + ": action id out of range: " + r[3]);
    if (tr.states.empty())
      tr.states.push_back(static_cast<State>(parse_int(r[2])));
    else if (tr.states.back() != parse_int(r[2]))
      throw ConfigError(path + ": state chain broken in trajectory " +
                        std::to_string(id));
    tr.actions.push_back(static_cast<Action>(a));
    tr.states.push_back(static_cast<State>(parse_int(r[4])));
  }
  for (const Trajectory& tr : trajs)
    if (tr.states.empty())
      throw ConfigError(path + ": missing trajectory id in sequence");
  return trajs;
}

inline void write_dataset_meta(const std::string& path,
                               const DatasetMeta& meta) {
  nlohmann::json j;
  j["coverage_fraction"] = meta.coverage_fraction;
  j["num_trajectories"] = meta.num_trajectories;
  j["seed"] = meta.seed;
  j["trajectory_length"] = meta.trajectory_length;
  write_text_file(path, j.dump(2) + "\n");
}

inline DatasetMeta read_dataset_meta(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  DatasetMeta meta;
  try {
    meta.coverage_fraction = j.at("coverage_fraction").get<double>();
    meta.num_trajectories = j.at("num_trajectories").get<int>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.trajectory_length = j.at("trajectory_length").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return meta;
}

// ---- distance tables ----

inline void write_distance_csv(const std::string& path,
                               const DistanceTable& d) {
  std::ostringstream out;
  out << "s,g,value\n";
  for (State s = 0; s < d.n; ++s)
    for (State g = 0; g < d.n; ++g)
      out << s << ',' << g << ',' << format_double(d.at(s, g)) << '\n';
  write_text_file(path, out.str());
}

inline DistanceTable read_distance_csv(const std::string& path) {
  auto rows = read_csv(path, "s,g,value");
  double root = std::sqrt(static_cast<double>(rows.size()));
  int n = static_cast<int>(std::llround(root));
  if (rows.empty() || static_cast<std::size_t>(n) * n != rows.size())
    throw ConfigError(path + ": row count is not a full n x n table");
  DistanceTable d(n);
  std::size_t k = 0;
  for (State s = 0; s < n; ++s)
    for (State g = 0; g < n; ++g, ++k) {
      if (parse_int(rows[k][0]) != s || parse_int(rows[k][1]) != g)
        throw ConfigError(path + ": rows out of row-major order");
      d.at(s, g) = parse_double(rows[k][2]);
    }
  d.validate();
  return d;
}

inline void write_quasimetric_meta(const std::string& path,
                                   const QuasimetricTable& q) {
  nlohmann::json j;
  j["audit_eps"] = q.audit_eps;
  j["certified"] = q.certified;
  j["n"] = q.d.n;
  write_text_file(path, j.dump(2) + "\n");
}

// ---- evaluation outputs ----

inline void write_curve_csv(const std::string& path,
                            const SuccessCurve& curve) {
  std::ostringstream out;
  out << "bin_upper,n_pairs,success_rate\n";
  for (std::size_t i = 0; i < curve.bin_upper.size(); ++i)
    out << format_double(curve.bin_upper[i]) << ',' << curve.pair_count[i]
        << ',' << format_double(curve.success_rate[i]) << '\n';
  write_text_file(path, out.str());
}

inline SuccessCurve read_curve_csv(const std::string& path) {
  auto rows = read_csv(path, "bin_upper,n_pairs,success_rate");
  SuccessCurve c;
  for (const auto& r : rows) {
    c.bin_upper.push_back(parse_double(r[0]));
    c.pair_count.push_back(static_cast<int>(parse_int(r[1])));
    c.success_rate.push_back(parse_double(r[2]));
  }
  return c;
}

inline void write_pairs_csv(const std::string& path,
                            const std::vector<PairOutcome>& pairs) {
  std::ostringstream out;
  out << "s,g,dstar,success,steps\n";
  for (const PairOutcome& p : pairs)
    out << p.s << ',' << p.g << ',' << format_double(p.dstar) << ','
        << (p.success ? 1 : 0) << ',' << p.steps << '\n';
  write_text_file(path, out.str());
}

inline std::vector<PairOutcome> read_pairs_csv(const std::string& path) {
  auto rows = read_csv(path, "s,g,dstar,success,steps");
  std::vector<PairOutcome> pairs;
  for (const auto& r : rows)
    pairs.push_back({static_cast<State>(parse_int(r[0])),
                     static_cast<State>(parse_int(r[1])), parse_double(r[2]),
                     parse_int(r[3]) != 0,
                     static_cast<int>(parse_int(r[4]))});
  return pairs;
}

struct MethodReport {
  std::string method;
  HorizonReport horizon;
  double invariance_ratio = std::nan("");
};

inline void write_report_csv(const std::string& path,
                             const std::vector<MethodReport>& reports) {
  std::ostringstream out;
  out << "method,c,eta_c,eta_aggregate,reach_wc,invariance_ratio\n";
  for (const MethodReport& r : reports)
    for (const auto& [c, eta] : r.horizon.eta_per_doubling)
      out << r.method << ',' << format_double(c) << ',' << format_double(eta)
          << ',' << format_double(r.horizon.eta_aggregate) << ','
          << format_double(r.horizon.reach) << ','
          << format_double(r.invariance_ratio) << '\n';
  write_text_file(path, out.str());
}

inline void write_scatter_csv(const std::string& path,
                              const std::vector<ScatterRow>& rows) {
  std::ostringstream out;
  out << "method,eta_aggregate,invariance_ratio\n";
  for (const ScatterRow& r : rows)
    out << r.method << ',' << format_double(r.eta_aggregate) << ','
        << format_double(r.invariance_ratio) << '\n';
  write_text_file(path, out.str());
}

inline void write_bellman_csv(const std::string& path,
                              const BellmanTrace& trace) {
  std::ostringstream out;
  out << "checkpoint,error,easy_success,distant_success\n";
  for (const BellmanCheckpoint& c : trace)
    out << c.checkpoint << ',' << format_double(c.error) << ','
        << format_double(c.easy_success) << ','
        << format_double(c.distant_success) << '\n';
  write_text_file(path, out.str());
}

inline BellmanTrace read_bellman_csv(const std::string& path) {
  auto rows = read_csv(path, "checkpoint,error,easy_success,distant_success");
  BellmanTrace trace;
  for (const auto& r : rows) {
    BellmanCheckpoint c;
    c.checkpoint = r[0];
    c.error = parse_double(r[1]);
    c.easy_success = parse_double(r[2]);
    c.distant_success = parse_double(r[3]);
    trace.push_back(c);
  }
  return trace;
}

// ---- distributions and transport ----

inline void write_distribution_csv(const std::string& path,
                                   const DiscreteDistribution& dist) {
  std::ostringstream out;
  out << "state_id,prob\n";
  for (std::size_t i = 0; i < dist.support.size(); ++i)
    out << dist.support[i] << ',' << format_double(dist.prob[i]) << '\n';
  write_text_file(path, out.str());
}

inline DiscreteDistribution read_distribution_csv(const std::string& path) {
  auto rows = read_csv(path, "state_id,prob");
  DiscreteDistribution d;
  for (const auto& r : rows) {
    d.support.push_back(static_cast<State>(parse_int(r[0])));
    d.prob.push_back(parse_double(r[1]));
  }
  return d;
}

inline void write_dqmd_json(const std::string& path, const DqmdResult& res) {
  nlohmann::json j;
  j["duality_gap"] = res.duality_gap;
  j["plan"] = nlohmann::json::array();
  for (const TransportEntry& e : res.plan.entries)
    j["plan"].push_back({{"i", e.i}, {"j", e.j}, {"mass", e.mass}});
  j["value"] = res.value;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace qmplan::io
