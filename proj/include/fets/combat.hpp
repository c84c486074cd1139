#pragma once

// Turn-based grid combat against stationary enemies.
//
// Actions, for E enemies (2E+1 total):
//   0 .. E-1    step toward enemy i (x is corrected first on diagonal ties)
//   E           step toward the start cell (same tie rule)
//   E+1 .. 2E   shoot enemy i
//
// A shot at a live enemy within distance theta deals fixed damage; a shot
// that is out of range or at a dead enemy draws the wasted-shot penalty
// into the side-reward channel. After the action (unless every enemy is
// already dead) each living enemy within its attack range deals fixed
// damage to the agent. Distances are Manhattan. Moving off the grid
// leaves the position unchanged and draws the wall penalty into the side
// channel; killing the last enemy draws the goal bonus and ends the
// episode, as does the agent's hitpoints reaching zero.
//
// Reward: r = 10 * (damage dealt - damage taken) + side rewards - 1.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/rewards.hpp"
#include "fets/rng.hpp"

namespace fets {

struct GridPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridPos& a, const GridPos& b) {
    return a.x == b.x && a.y == b.y;
  }
};

inline int manhattan(const GridPos& a, const GridPos& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

struct CombatSpec {
  int grid_w = 16;
  int grid_h = 16;
  GridPos start{2, 2};
  std::vector<GridPos> enemies;  // fixed positions
  int max_hp = 100;              // agent hitpoints at episode start
  int enemy_max_hp = 100;
  int shoot_damage = 25;   // dealt by the agent per landed shot
  int enemy_damage = 25;   // dealt by each enemy in range per step
  int theta = 3;           // maximum shooting distance
  int enemy_range = 2;     // enemy attack distance
  int step_cap = 1000;     // episode truncation bound (enforced by the runner)

  int n_enemies() const { return static_cast<int>(enemies.size()); }
  int n_actions() const { return 2 * n_enemies() + 1; }

  void validate() const {
    if (grid_w < 2 || grid_h < 2)
      throw std::invalid_argument("combat: grid too small");
    if (enemies.empty()) throw std::invalid_argument("combat: no enemies");
    if (max_hp <= 0 || enemy_max_hp <= 0)
      throw std::invalid_argument("combat: hitpoints must be positive");
    if (shoot_damage <= 0 || enemy_damage <= 0)
      throw std::invalid_argument("combat: damage must be positive");
    if (theta < 0 || enemy_range < 0)
      throw std::invalid_argument("combat: negative distance bound");
    if (step_cap <= 0) throw std::invalid_argument("combat: bad step cap");
    auto inside = [&](const GridPos& p) {
      return p.x >= 0 && p.y >= 0 && p.x < grid_w && p.y < grid_h;
    };
    if (!inside(start)) throw std::invalid_argument("combat: start off grid");
    for (const auto& e : enemies)
      if (!inside(e)) throw std::invalid_argument("combat: enemy off grid");
  }

  static CombatSpec parse(const std::string& text) {
    CombatSpec spec;
    spec.enemies.clear();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key) || key.empty() || key[0] == '#') continue;
      auto want = [&](int& v) {
        if (!(ls >> v))
          throw std::invalid_argument("combat: bad value for key '" + key + "'");
      };
      if (key == "grid") {
        want(spec.grid_w);
        want(spec.grid_h);
      } else if (key == "start") {
        want(spec.start.x);
        want(spec.start.y);
      } else if (key == "enemy") {
        GridPos p;
        want(p.x);
        want(p.y);
        spec.enemies.push_back(p);
      } else if (key == "hp") {
        want(spec.max_hp);
      } else if (key == "enemy_hp") {
        want(spec.enemy_max_hp);
      } else if (key == "damage") {
        want(spec.shoot_damage);
      } else if (key == "enemy_damage") {
        want(spec.enemy_damage);
      } else if (key == "theta") {
        want(spec.theta);
      } else if (key == "range") {
        want(spec.enemy_range);
      } else if (key == "cap") {
        want(spec.step_cap);
      } else {
        throw std::invalid_argument("combat: unknown key '" + key + "'");
      }
    }
    spec.validate();
    return spec;
  }

  static CombatSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("combat: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }
};

struct CombatState {
  GridPos pos;
  int hp = 0;
  std::vector<int> enemy_hp;

  bool all_enemies_dead() const {
    for (int h : enemy_hp)
      if (h > 0) return false;
    return true;
  }
};

inline CombatState combat_reset(const CombatSpec& spec) {
  CombatState s;
  s.pos = spec.start;
  s.hp = spec.max_hp;
  s.enemy_hp.assign(spec.enemies.size(), spec.enemy_max_hp);
  return s;
}

struct CombatStepResult {
  CombatState next;
  double reward = 0.0;
  bool terminal = false;
  bool goal = false;      // terminal because every enemy died
  bool wall_hit = false;
  int damage_dealt = 0;
  int damage_taken = 0;
  double side_reward = 0.0;  // wasted-shot / wall / goal samples
};

// One deterministic cell step from `from` toward `target`, x first.
inline GridPos step_toward(const GridPos& from, const GridPos& target) {
  GridPos p = from;
  if (p.x != target.x)
    p.x += target.x > p.x ? 1 : -1;
  else if (p.y != target.y)
    p.y += target.y > p.y ? 1 : -1;
  return p;
}

inline CombatStepResult combat_step(const CombatSpec& spec,
                                    const CombatState& s, int action,
                                    Rng& rng) {
  if (action < 0 || action >= spec.n_actions())
    throw std::invalid_argument("combat_step: bad action");
  if (s.hp <= 0 || s.all_enemies_dead())
    throw std::invalid_argument("combat_step: episode already over");

  const int e = spec.n_enemies();
  CombatStepResult out;
  out.next = s;

  if (action < e || action == e) {
    const GridPos target = action < e ? spec.enemies[action] : spec.start;
    const GridPos to = step_toward(out.next.pos, target);
    if (to.x < 0 || to.y < 0 || to.x >= spec.grid_w || to.y >= spec.grid_h) {
      out.wall_hit = true;
      out.side_reward += reward_rw().sample(rng);
    } else {
      out.next.pos = to;
    }
  } else {
    const int i = action - e - 1;
    const bool alive = out.next.enemy_hp[i] > 0;
    const bool in_range = manhattan(out.next.pos, spec.enemies[i]) <= spec.theta;
    if (alive && in_range) {
      const int before = out.next.enemy_hp[i];
      out.next.enemy_hp[i] = std::max(0, before - spec.shoot_damage);
      out.damage_dealt = before - out.next.enemy_hp[i];
    } else {
      out.side_reward += reward_ra().sample(rng);
    }
  }

  if (out.next.all_enemies_dead()) {
    out.goal = true;
    out.terminal = true;
    out.side_reward += reward_rg().sample(rng);
  } else {
    const int before = out.next.hp;
    for (int i = 0; i < e; ++i)
      if (out.next.enemy_hp[i] > 0 &&
          manhattan(out.next.pos, spec.enemies[i]) <= spec.enemy_range)
        out.next.hp = std::max(0, out.next.hp - spec.enemy_damage);
    out.damage_taken = before - out.next.hp;
    if (out.next.hp <= 0) out.terminal = true;
  }

  out.reward = 10.0 * (out.damage_dealt - out.damage_taken) +
               out.side_reward - 1.0;
  return out;
}

namespace detail {
// Hitpoint values move on a fixed lattice (full hitpoints minus whole
// multiples of one damage amount, clamped at zero), so they index densely.
inline int hp_levels(int max_hp, int damage) {
  return (max_hp + damage - 1) / damage + 1;
}
inline int hp_level(int hp, int damage) {
  return (hp + damage - 1) / damage;
}
}  // namespace detail

// Dense ids over (position, agent hitpoint level, enemy hitpoint levels),
// plus one absorbing sink for both terminal outcomes.
class CombatIndexer {
 public:
  explicit CombatIndexer(const CombatSpec& spec)
      : spec_(spec),
        agent_levels_(detail::hp_levels(spec.max_hp, spec.enemy_damage)),
        enemy_levels_(detail::hp_levels(spec.enemy_max_hp, spec.shoot_damage)) {
    n_ = static_cast<std::size_t>(spec.grid_w) * spec.grid_h * agent_levels_;
    for (int i = 0; i < spec.n_enemies(); ++i) n_ *= enemy_levels_;
  }

  std::size_t n_states() const { return n_ + 1; }
  std::size_t sink() const { return n_; }

  std::size_t id(const CombatState& s) const {
    std::size_t v = static_cast<std::size_t>(s.pos.y) * spec_.grid_w + s.pos.x;
    v = v * agent_levels_ + detail::hp_level(s.hp, spec_.enemy_damage);
    for (int h : s.enemy_hp)
      v = v * enemy_levels_ + detail::hp_level(h, spec_.shoot_damage);
    return v;
  }

 private:
  CombatSpec spec_;
  int agent_levels_;
  int enemy_levels_;
  std::size_t n_ = 0;
};

// Candidate subspaces: position only, hitpoints only, or the Manhattan
// distance to one enemy.
struct CombatProjection {
  enum class Kind { XY, HP, Dist };
  Kind kind = Kind::XY;
  int enemy_index = 0;
  int grid_w = 0, grid_h = 0, max_hp = 0;
  GridPos enemy_pos{};
  std::string name;

  std::size_t n_states() const {
    switch (kind) {
      case Kind::XY:
        return static_cast<std::size_t>(grid_w) * grid_h + 1;
      case Kind::HP:
        return static_cast<std::size_t>(max_hp) + 2;
      case Kind::Dist:
      default:
        return static_cast<std::size_t>(grid_w + grid_h - 1) + 1;
    }
  }
  std::size_t sink() const { return n_states() - 1; }

  std::size_t id(const CombatState& s, bool terminal) const {
    if (terminal) return sink();
    switch (kind) {
      case Kind::XY:
        return static_cast<std::size_t>(s.pos.y) * grid_w + s.pos.x;
      case Kind::HP:
        return static_cast<std::size_t>(s.hp);
      case Kind::Dist:
      default:
        return static_cast<std::size_t>(manhattan(s.pos, enemy_pos));
    }
  }
};

inline std::vector<CombatProjection> combat_subspaces(const CombatSpec& spec) {
  std::vector<CombatProjection> out;
  CombatProjection xy;
  xy.kind = CombatProjection::Kind::XY;
  xy.grid_w = spec.grid_w;
  xy.grid_h = spec.grid_h;
  xy.name = "phi_xy";
  out.push_back(xy);
  CombatProjection hp;
  hp.kind = CombatProjection::Kind::HP;
  hp.max_hp = spec.max_hp;
  hp.name = "phi_hp";
  out.push_back(hp);
  for (int i = 0; i < spec.n_enemies(); ++i) {
    CombatProjection d;
    d.kind = CombatProjection::Kind::Dist;
    d.enemy_index = i;
    d.grid_w = spec.grid_w;
    d.grid_h = spec.grid_h;
    d.enemy_pos = spec.enemies[static_cast<std::size_t>(i)];
    d.name = "phi_dist" + std::to_string(i + 1);
    out.push_back(d);
  }
  return out;
}

}  // namespace fets
