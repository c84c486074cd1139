#pragma once

// Stochastic grid maze.
//
// Text format: one row per line, '#' barrier, '.' open floor, 'G' goal.
// The outer border must be entirely '#', the grid must be rectangular,
// and there must be at least one goal and at least one open cell.
//
// Dynamics: the chosen direction is applied with probability 0.9;
// otherwise a direction is drawn uniformly at random from all four.
// Moving into a barrier leaves the position unchanged and counts as a
// wall hit. Entering a goal cell ends the episode.
//
// Reward: every step draws the step cost; a wall hit adds the wall
// penalty; reaching the goal adds the goal bonus.

#include <cstddef>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/rewards.hpp"
#include "fets/rng.hpp"

namespace fets {

enum class Cell : char { Open = '.', Barrier = '#', Goal = 'G' };

struct MazeState {
  int x = 0;
  int y = 0;
  friend bool operator==(const MazeState& a, const MazeState& b) {
    return a.x == b.x && a.y == b.y;
  }
};

// Directions: 0 = up (y-1), 1 = right (x+1), 2 = down (y+1), 3 = left (x-1).
inline constexpr int kMazeDirections = 4;
inline constexpr int kMazeDx[kMazeDirections] = {0, 1, 0, -1};
inline constexpr int kMazeDy[kMazeDirections] = {-1, 0, 1, 0};

class MazeSpec {
 public:
  static MazeSpec parse(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (!line.empty()) rows.push_back(line);
    }
    if (rows.size() < 3) throw std::invalid_argument("maze: fewer than 3 rows");
    const std::size_t w = rows.front().size();
    if (w < 3) throw std::invalid_argument("maze: fewer than 3 columns");
    std::size_t goals = 0, opens = 0;
    for (std::size_t y = 0; y < rows.size(); ++y) {
      if (rows[y].size() != w)
        throw std::invalid_argument("maze: rows have unequal length");
      for (std::size_t x = 0; x < w; ++x) {
        const char c = rows[y][x];
        if (c != '#' && c != '.' && c != 'G')
          throw std::invalid_argument(std::string("maze: bad character '") + c + "'");
        const bool border =
            x == 0 || y == 0 || x + 1 == w || y + 1 == rows.size();
        if (border && c != '#')
          throw std::invalid_argument("maze: border must be solid");
        if (c == 'G') ++goals;
        if (c == '.') ++opens;
      }
    }
    if (goals == 0) throw std::invalid_argument("maze: no goal cell");
    if (opens == 0) throw std::invalid_argument("maze: no open cell");
    MazeSpec spec;
    spec.rows_ = std::move(rows);
    return spec;
  }

  static MazeSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("maze: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  int width() const { return static_cast<int>(rows_.front().size()); }
  int height() const { return static_cast<int>(rows_.size()); }

  Cell at(int x, int y) const {
    if (x < 0 || y < 0 || x >= width() || y >= height())
      return Cell::Barrier;
    return static_cast<Cell>(rows_[static_cast<std::size_t>(y)]
                                  [static_cast<std::size_t>(x)]);
  }

  bool open(int x, int y) const { return at(x, y) == Cell::Open; }
  bool goal(int x, int y) const { return at(x, y) == Cell::Goal; }
  bool barrier(int x, int y) const { return at(x, y) == Cell::Barrier; }

  std::string text() const {
    std::string out;
    for (const auto& r : rows_) {
      out += r;
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> rows_;
};

struct MazeStepResult {
  MazeState next;
  double reward = 0.0;
  bool terminal = false;
  bool wall_hit = false;
  int realized_direction = 0;
};

// Deterministic movement part: where a realized direction leads.
inline std::pair<MazeState, bool> maze_move(const MazeSpec& spec,
                                            const MazeState& s, int dir) {
  if (dir < 0 || dir >= kMazeDirections)
    throw std::invalid_argument("maze_move: bad direction");
  const int nx = s.x + kMazeDx[dir];
  const int ny = s.y + kMazeDy[dir];
  if (spec.barrier(nx, ny)) return {s, true};
  return {MazeState{nx, ny}, false};
}

// One stochastic step. Randomness is consumed in a fixed order:
// action-noise draw, then the realized-direction draw if the noise fires,
// then the reward samples (step cost, wall penalty, goal bonus).
inline MazeStepResult maze_step(const MazeSpec& spec, const MazeState& s,
                                int action, Rng& rng) {
  if (action < 0 || action >= kMazeDirections)
    throw std::invalid_argument("maze_step: bad action");
  if (!spec.open(s.x, s.y))
    throw std::invalid_argument("maze_step: state is not an open cell");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int dir = action;
  if (unit(rng) >= 0.9) {
    std::uniform_int_distribution<int> pick(0, kMazeDirections - 1);
    dir = pick(rng);
  }
  MazeStepResult out;
  out.realized_direction = dir;
  auto [next, hit] = maze_move(spec, s, dir);
  out.next = next;
  out.wall_hit = hit;
  out.reward = reward_rs().sample(rng);
  if (hit) out.reward += reward_rw().sample(rng);
  if (spec.goal(next.x, next.y)) {
    out.reward += reward_rg().sample(rng);
    out.terminal = true;
  }
  return out;
}

// Uniform start over open (non-goal) cells.
inline MazeState maze_random_start(const MazeSpec& spec, Rng& rng) {
  std::vector<MazeState> cells;
  for (int y = 0; y < spec.height(); ++y)
    for (int x = 0; x < spec.width(); ++x)
      if (spec.open(x, y)) cells.push_back(MazeState{x, y});
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  return cells[pick(rng)];
}

// Dense ids for the primary task state set: open cells, plus one absorbing
// sink that every goal entry maps to.
class MazeIndexer {
 public:
  explicit MazeIndexer(const MazeSpec& spec)
      : width_(spec.width()), cell_to_id_(static_cast<std::size_t>(
                                              spec.width() * spec.height()),
                                          kNone) {
    for (int y = 0; y < spec.height(); ++y)
      for (int x = 0; x < spec.width(); ++x)
        if (spec.open(x, y)) {
          cell_to_id_[flat(x, y)] = id_to_cell_.size();
          id_to_cell_.push_back(MazeState{x, y});
        }
  }

  std::size_t n_states() const { return id_to_cell_.size() + 1; }
  std::size_t sink() const { return id_to_cell_.size(); }

  std::size_t id(const MazeState& s) const {
    if (s.x < 0 || s.y < 0 || s.x >= width_)
      throw std::out_of_range("MazeIndexer: cell outside grid");
    const std::size_t f = flat(s.x, s.y);
    if (f >= cell_to_id_.size() || cell_to_id_[f] == kNone)
      throw std::out_of_range("MazeIndexer: cell is not an open floor cell");
    return cell_to_id_[f];
  }

  const MazeState& cell(std::size_t id) const { return id_to_cell_.at(id); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t flat(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  int width_;
  std::vector<std::size_t> cell_to_id_;
  std::vector<MazeState> id_to_cell_;
};

// Coordinate projections used as candidate subspaces: keep only x, or only y.
struct MazeProjection {
  enum class Axis { X, Y };
  Axis axis = Axis::X;
  int extent = 0;  // width for X, height for Y
  std::string name;

  std::size_t n_states() const { return static_cast<std::size_t>(extent) + 1; }
  std::size_t sink() const { return static_cast<std::size_t>(extent); }
  std::size_t id(const MazeState& s, bool terminal) const {
    if (terminal) return sink();
    const int v = axis == Axis::X ? s.x : s.y;
    if (v < 0 || v >= extent)
      throw std::out_of_range("MazeProjection: coordinate outside grid");
    return static_cast<std::size_t>(v);
  }
};

inline std::vector<MazeProjection> maze_subspaces(const MazeSpec& spec) {
  return {MazeProjection{MazeProjection::Axis::X, spec.width(), "phi_x"},
          MazeProjection{MazeProjection::Axis::Y, spec.height(), "phi_y"}};
}

// Built-in layouts. Names describe the structure:
//   room_east    open room, goal on the east side (x alone nearly decides)
//   room_center  open room, goal at the center
//   two_rooms    two rooms joined by one door, goal in the east room
//   zigzag       serpentine corridors; both coordinates matter
//   corridors    shelf obstacles, goal east; mostly x decides
//   rings        concentric walls with offset gaps; both coordinates matter
//   corridor_x   single east-west corridor; y is constant
//   corridor_y   single north-south corridor; x is constant
//   plus5        five-cell plus; goal on the east arm
inline const std::map<std::string, std::string>& builtin_maze_texts() {
  static const std::map<std::string, std::string> m = {
      {"room_east",
       "##########\n"
       "#........#\n"
       "#........#\n"
       "#........#\n"
       "#........#\n"
       "#.......G#\n"
       "#........#\n"
       "#........#\n"
       "#........#\n"
       "##########\n"},
      {"room_center",
       "##########\n"
       "#........#\n"
       "#........#\n"
       "#........#\n"
       "#....G...#\n"
       "#........#\n"
       "#........#\n"
       "#........#\n"
       "#........#\n"
       "##########\n"},
      {"two_rooms",
       "##########\n"
       "#....#...#\n"
       "#....#...#\n"
       "#....#...#\n"
       "#....#...#\n"
       "#........#\n"
       "#....#...#\n"
       "#....#..G#\n"
       "#....#...#\n"
       "##########\n"},
      {"zigzag",
       "##########\n"
       "#..#.....#\n"
       "#..#..#..#\n"
       "#..#..#..#\n"
       "#..#..#..#\n"
       "#..#..#..#\n"
       "#..#..#..#\n"
       "#..#..#..#\n"
       "#.....#.G#\n"
       "##########\n"},
      {"corridors",
       "##########\n"
       "#........#\n"
       "#..##....#\n"
       "#........#\n"
       "#....##..#\n"
       "#.......G#\n"
       "#..##....#\n"
       "#........#\n"
       "#....##..#\n"
       "##########\n"},
      {"rings",
       "##########\n"
       "#........#\n"
       "#.##.###.#\n"
       "#.#....#.#\n"
       "#.#.##.#.#\n"
       "#.#.#G.#.#\n"
       "#.#.##.#.#\n"
       "#.#....#.#\n"
       "#.######.#\n"
       "##########\n"},
      {"corridor_x",
       "##########\n"
       "#.......G#\n"
       "##########\n"},
      {"corridor_y",
       "###\n"
       "#.#\n"
       "#.#\n"
       "#.#\n"
       "#.#\n"
       "#.#\n"
       "#.#\n"
       "#.#\n"
       "#G#\n"
       "###\n"},
      {"plus5",
       "#####\n"
       "##.##\n"
       "#..G#\n"
       "##.##\n"
       "#####\n"},
  };
  return m;
}

inline MazeSpec builtin_maze(const std::string& name) {
  const auto& m = builtin_maze_texts();
  auto it = m.find(name);
  if (it == m.end())
    throw std::invalid_argument("builtin_maze: unknown layout '" + name + "'");
  return MazeSpec::parse(it->second);
}

}  // namespace fets
