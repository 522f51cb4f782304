#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "qmplan/error.hpp"

// Deterministic gridworld over an ASCII maze ('#' wall, '.' free cell).
// States are the free cells, numbered in row-major scan order. The five
// actions are total: a move into a wall or off the map leaves the state
// unchanged, and NoOp always self-loops.

namespace qmplan {

using State = int;

enum class Action : int { North = 0, South = 1, East = 2, West = 3, NoOp = 4 };

inline constexpr int kNumActions = 5;

inline constexpr Action kAllActions[kNumActions] = {
    Action::North, Action::South, Action::East, Action::West, Action::NoOp};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline const char* action_name(Action a) {
  switch (a) {
    case Action::North: return "North";
    case Action::South: return "South";
    case Action::East: return "East";
    case Action::West: return "West";
    case Action::NoOp: return "NoOp";
  }
  return "?";
}

class GridWorld {
 public:
  // Parses an ASCII maze. Rows must share one width, characters must be
  // '#' or '.', and at least one cell must be free. Trailing newline and
  // blank trailing lines are tolerated; blank interior lines are not.
  static GridWorld from_text(const std::string& text) {
    std::vector<std::string> rows;
    std::string line;
    for (char ch : text) {
      if (ch == '\n') {
        rows.push_back(line);
        line.clear();
      } else if (ch != '\r') {
        line.push_back(ch);
      }
    }
    if (!line.empty()) rows.push_back(line);
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty()) throw ConfigError("maze: empty input");

    GridWorld w;
    w.height_ = static_cast<int>(rows.size());
    w.width_ = static_cast<int>(rows[0].size());
    if (w.width_ == 0) throw ConfigError("maze: empty first row");
    w.state_of_cell_.assign(static_cast<std::size_t>(w.height_) * w.width_, -1);
    for (int r = 0; r < w.height_; ++r) {
      if (static_cast<int>(rows[r].size()) != w.width_)
        throw ConfigError("maze: rows are not all the same width (row " +
                          std::to_string(r) + ")");
      for (int c = 0; c < w.width_; ++c) {
        char ch = rows[r][c];
        if (ch == '.') {
          w.state_of_cell_[static_cast<std::size_t>(r) * w.width_ + c] =
              static_cast<State>(w.cells_.size());
          w.cells_.push_back({r, c});
        } else if (ch != '#') {
          throw ConfigError(std::string("maze: illegal character '") + ch +
                            "' at row " + std::to_string(r) + " col " +
                            std::to_string(c));
        }
      }
    }
    if (w.cells_.empty()) throw ConfigError("maze: no free cells");
    w.build_transitions();
    return w;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int num_states() const { return static_cast<int>(cells_.size()); }

  std::pair<int, int> cell_of(State s) const { return cells_[s]; }

  std::optional<State> state_at(int r, int c) const {
    if (r < 0 || r >= height_ || c < 0 || c >= width_) return std::nullopt;
    State s = state_of_cell_[static_cast<std::size_t>(r) * width_ + c];
    if (s < 0) return std::nullopt;
    return s;
  }

  State step(State s, Action a) const {
    return step_[static_cast<std::size_t>(s) * kNumActions +
                 static_cast<int>(a)];
  }

  // Emits the maze in the same ASCII dialect from_text accepts, so
  // from_text(render()) reproduces the world.
  std::string render() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(height_) * (width_ + 1));
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        State s = state_of_cell_[static_cast<std::size_t>(r) * width_ + c];
        out.push_back(s >= 0 ? '.' : '#');
      }
      out.push_back('\n');
    }
    return out;
  }

  bool is_connected() const {
    const int n = num_states();
    std::vector<char> seen(n, 0);
    std::queue<State> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
      State s = q.front();
      q.pop();
      for (Action a : kAllActions) {
        State t = step(s, a);
        if (!seen[t]) {
          seen[t] = 1;
          ++reached;
          q.push(t);
        }
      }
    }
    return reached == n;
  }

 private:
  void build_transitions() {
    // North decreases the row index (row 0 is the top line of the text).
    static constexpr int dr[kNumActions] = {-1, 1, 0, 0, 0};
    static constexpr int dc[kNumActions] = {0, 0, 1, -1, 0};
    const int n = num_states();
    step_.assign(static_cast<std::size_t>(n) * kNumActions, -1);
    for (State s = 0; s < n; ++s) {
      auto [r, c] = cells_[s];
      for (int ai = 0; ai < kNumActions; ++ai) {
        auto t = state_at(r + dr[ai], c + dc[ai]);
        step_[static_cast<std::size_t>(s) * kNumActions + ai] =
            t.value_or(s);  // blocked moves self-transition
      }
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::pair<int, int>> cells_;   // state -> (row, col)
  std::vector<State> state_of_cell_;         // (row, col) -> state or -1
  std::vector<State> step_;                  // n x kNumActions
};

}  // namespace qmplan
