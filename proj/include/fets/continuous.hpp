#pragma once

// Continuous foraging world ("waterworld").
//
// The agent is a disc moving at fixed speed in a walled rectangle that
// contains food and poison discs. Nine eyes fan evenly across a 120-degree
// field of view centred on the heading; each eye reports three proximity
// channels (wall, food, poison) as hit-distance / eye-range, or 1.0 when
// nothing of that kind is within range, giving a 27-value observation laid
// out eye-major: [wall, food, poison] for eye 0, then eye 1, and so on.
//
// Actions (all advance one speed unit after turning):
//   0 forward   1 left 15deg   2 right 15deg   3 left 45deg   4 right 45deg
//
// Reward per step, returned both summed and split into parts:
//   r_clear   mean wall channel over the nine eyes (1 when clear)
//   r_fwd     0.1 * r_clear, only for action 0 when r_clear > 0.75
//   r_items   +5 per food eaten, -6 per poison eaten
// Eaten items respawn immediately at a uniformly random free spot, so the
// item population is constant. Episodes do not terminate; the runner stops
// them after a fixed number of steps.
//
// Multi-agent worlds advance agents one at a time in index order; agents
// are invisible to each other's sensors and never collide.

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/rng.hpp"

namespace fets {

inline constexpr int kEyeCount = 9;
inline constexpr int kEyeChannels = 3;  // wall, food, poison
inline constexpr int kContObsDim = kEyeCount * kEyeChannels;
inline constexpr int kContActions = 5;
inline constexpr double kPi = 3.14159265358979323846;

struct Segment {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

enum class ItemKind : int { Food = 0, Poison = 1 };

struct Item {
  double x = 0, y = 0;
  ItemKind kind = ItemKind::Food;
};

struct AgentBody {
  double x = 0, y = 0;
  double heading = 0;  // radians, 0 along +x
};

namespace geo {

// Distance along a unit-direction ray to a segment, if it hits.
inline std::optional<double> ray_segment(double ox, double oy, double dx,
                                         double dy, const Segment& s) {
  const double ax = s.x2 - s.x1, ay = s.y2 - s.y1;
  const double denom = dx * ay - dy * ax;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double wx = s.x1 - ox, wy = s.y1 - oy;
  const double t = (wx * ay - wy * ax) / denom;
  const double u = (wx * dy - wy * dx) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

// Distance along a unit-direction ray to a circle, if it hits.
inline std::optional<double> ray_circle(double ox, double oy, double dx,
                                        double dy, double cx, double cy,
                                        double r) {
  const double fx = ox - cx, fy = oy - cy;
  const double b = dx * fx + dy * fy;
  const double c = fx * fx + fy * fy - r * r;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  double t = -b - root;
  if (t < 0.0) t = -b + root;  // origin inside the circle
  if (t < 0.0) return std::nullopt;
  return t;
}

inline double point_segment_distance(double px, double py, const Segment& s) {
  const double ax = s.x2 - s.x1, ay = s.y2 - s.y1;
  const double len2 = ax * ax + ay * ay;
  double u = 0.0;
  if (len2 > 0.0)
    u = ((px - s.x1) * ax + (py - s.y1) * ay) / len2;
  u = std::max(0.0, std::min(1.0, u));
  const double qx = s.x1 + u * ax, qy = s.y1 + u * ay;
  return std::hypot(px - qx, py - qy);
}

}  // namespace geo

struct WorldSpec {
  double width = 700, height = 500;
  std::vector<Segment> walls;  // interior walls; the border is implicit
  int n_food = 50, n_poison = 50;
  double eye_range = 85;
  double agent_radius = 10;
  double item_radius = 10;
  double speed = 3;

  void validate() const {
    if (!(width > 0) || !(height > 0))
      throw std::invalid_argument("world: bounds must be positive");
    if (n_food < 0 || n_poison < 0)
      throw std::invalid_argument("world: negative item count");
    if (!(eye_range > 0) || !(agent_radius > 0) || !(item_radius > 0) ||
        !(speed > 0))
      throw std::invalid_argument("world: geometry values must be positive");
  }

  static WorldSpec parse(const std::string& text) {
    WorldSpec spec;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key) || key.empty() || key[0] == '#') continue;
      if (key == "bounds") {
        if (!(ls >> spec.width >> spec.height))
          throw std::invalid_argument("world: bad bounds line");
      } else if (key == "wall") {
        Segment s;
        if (!(ls >> s.x1 >> s.y1 >> s.x2 >> s.y2))
          throw std::invalid_argument("world: bad wall line");
        spec.walls.push_back(s);
      } else if (key == "items") {
        std::string k1, k2;
        int n1 = 0, n2 = 0;
        if (!(ls >> k1 >> n1 >> k2 >> n2) || k1 != "food" || k2 != "poison")
          throw std::invalid_argument("world: bad items line");
        spec.n_food = n1;
        spec.n_poison = n2;
      } else {
        throw std::invalid_argument("world: unknown key '" + key + "'");
      }
    }
    spec.validate();
    return spec;
  }

  static WorldSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("world: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  // Interior wall presets on the default 700x500 bounds:
  //   open      no interior walls
  //   bar       one horizontal wall across the middle, gaps at both ends
  //   cross     a horizontal and a vertical wall meeting at the centre
  //   pillars   four short free-standing walls
  static WorldSpec builtin(const std::string& name) {
    WorldSpec spec;
    if (name == "open") {
      // no interior walls
    } else if (name == "bar") {
      spec.walls.push_back({150, 250, 550, 250});
    } else if (name == "cross") {
      spec.walls.push_back({150, 250, 550, 250});
      spec.walls.push_back({350, 100, 350, 400});
    } else if (name == "pillars") {
      spec.walls.push_back({175, 125, 275, 125});
      spec.walls.push_back({425, 125, 525, 125});
      spec.walls.push_back({175, 375, 275, 375});
      spec.walls.push_back({425, 375, 525, 375});
    } else {
      throw std::invalid_argument("world: unknown preset '" + name + "'");
    }
    return spec;
  }
};

class World {
 public:
  World(WorldSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    walls_ = spec_.walls;
    walls_.push_back({0, 0, spec_.width, 0});
    walls_.push_back({spec_.width, 0, spec_.width, spec_.height});
    walls_.push_back({spec_.width, spec_.height, 0, spec_.height});
    walls_.push_back({0, spec_.height, 0, 0});
    for (int i = 0; i < spec_.n_food; ++i)
      items_.push_back(spawn_item(ItemKind::Food, rng));
    for (int i = 0; i < spec_.n_poison; ++i)
      items_.push_back(spawn_item(ItemKind::Poison, rng));
  }

  const WorldSpec& spec() const { return spec_; }
  const std::vector<Segment>& walls() const { return walls_; }
  const std::vector<Item>& items() const { return items_; }
  const std::vector<AgentBody>& agents() const { return agents_; }
  AgentBody& agent(std::size_t i) { return agents_.at(i); }

  std::size_t add_agent(double x, double y, double heading) {
    agents_.push_back(AgentBody{x, y, heading});
    return agents_.size() - 1;
  }

  std::size_t spawn_agent(Rng& rng) {
    std::uniform_real_distribution<double> ux(spec_.agent_radius,
                                              spec_.width - spec_.agent_radius);
    std::uniform_real_distribution<double> uy(
        spec_.agent_radius, spec_.height - spec_.agent_radius);
    std::uniform_real_distribution<double> uh(0.0, 2.0 * kPi);
    for (int guard = 0; guard < 100000; ++guard) {
      const double x = ux(rng), y = uy(rng);
      if (clear_of_walls(x, y, spec_.agent_radius))
        return add_agent(x, y, uh(rng));
    }
    throw std::runtime_error("world: no free space for an agent");
  }

  bool clear_of_walls(double x, double y, double radius) const {
    for (const auto& w : walls_)
      if (geo::point_segment_distance(x, y, w) < radius) return false;
    return true;
  }

  Item spawn_item(ItemKind kind, Rng& rng) {
    std::uniform_real_distribution<double> ux(spec_.item_radius,
                                              spec_.width - spec_.item_radius);
    std::uniform_real_distribution<double> uy(
        spec_.item_radius, spec_.height - spec_.item_radius);
    for (int guard = 0; guard < 100000; ++guard) {
      Item it;
      it.x = ux(rng);
      it.y = uy(rng);
      it.kind = kind;
      if (!clear_of_walls(it.x, it.y, spec_.item_radius)) continue;
      bool on_agent = false;
      for (const auto& a : agents_)
        if (std::hypot(a.x - it.x, a.y - it.y) <
            spec_.item_radius + spec_.agent_radius) {
          on_agent = true;
          break;
        }
      if (!on_agent) return it;
    }
    throw std::runtime_error("world: no free space for an item");
  }

  void respawn_item(std::size_t index, Rng& rng) {
    items_.at(index) = spawn_item(items_.at(index).kind, rng);
  }

  // Replace the item population wholesale (deterministic scene setup).
  void set_items(std::vector<Item> items) { items_ = std::move(items); }

 private:
  WorldSpec spec_;
  std::vector<Segment> walls_;
  std::vector<Item> items_;
  std::vector<AgentBody> agents_;
};

inline double eye_offset(int eye) {
  // Nine directions evenly spread over a 120-degree fan: -60, -45, ..., +60.
  return (static_cast<double>(eye) / (kEyeCount - 1) - 0.5) * (2.0 * kPi / 3.0);
}

inline std::array<double, kContObsDim> sense_at(const World& world, double x,
                                                double y, double heading) {
  std::array<double, kContObsDim> obs;
  const double range = world.spec().eye_range;
  for (int e = 0; e < kEyeCount; ++e) {
    const double ang = heading + eye_offset(e);
    const double dx = std::cos(ang), dy = std::sin(ang);
    double best[kEyeChannels] = {range, range, range};
    for (const auto& w : world.walls())
      if (auto t = geo::ray_segment(x, y, dx, dy, w))
        best[0] = std::min(best[0], *t);
    for (const auto& it : world.items()) {
      const int ch = it.kind == ItemKind::Food ? 1 : 2;
      if (auto t = geo::ray_circle(x, y, dx, dy, it.x, it.y,
                                   world.spec().item_radius))
        best[ch] = std::min(best[ch], *t);
    }
    for (int ch = 0; ch < kEyeChannels; ++ch)
      obs[static_cast<std::size_t>(e * kEyeChannels + ch)] = best[ch] / range;
  }
  return obs;
}

inline std::array<double, kContObsDim> sense(const World& world,
                                             std::size_t agent) {
  const AgentBody& a = world.agents().at(agent);
  return sense_at(world, a.x, a.y, a.heading);
}

// Extract one channel (0 wall, 1 food, 2 poison) as a nine-value view.
inline std::vector<double> obs_channel(const std::array<double, kContObsDim>& obs,
                                       int channel) {
  if (channel < 0 || channel >= kEyeChannels)
    throw std::invalid_argument("obs_channel: bad channel");
  std::vector<double> out(kEyeCount);
  for (int e = 0; e < kEyeCount; ++e)
    out[static_cast<std::size_t>(e)] =
        obs[static_cast<std::size_t>(e * kEyeChannels + channel)];
  return out;
}

struct ContStepResult {
  std::array<double, kContObsDim> obs{};
  double reward = 0.0;
  double r_clear = 0.0;
  double r_fwd = 0.0;
  double r_items = 0.0;
  int food_eaten = 0;
  int poison_eaten = 0;
  bool wall_clipped = false;
};

inline ContStepResult cont_step(World& world, std::size_t agent_index,
                                int action, Rng& rng) {
  if (action < 0 || action >= kContActions)
    throw std::invalid_argument("cont_step: bad action");
  AgentBody& a = world.agent(agent_index);
  static const double kTurns[kContActions] = {0.0, kPi / 12.0, -kPi / 12.0,
                                              kPi / 4.0, -kPi / 4.0};
  a.heading += kTurns[action];
  if (a.heading > kPi) a.heading -= 2.0 * kPi;
  if (a.heading < -kPi) a.heading += 2.0 * kPi;

  ContStepResult out;
  const double dx = std::cos(a.heading), dy = std::sin(a.heading);
  double travel = world.spec().speed;
  for (const auto& w : world.walls())
    if (auto t = geo::ray_segment(a.x, a.y, dx, dy, w))
      if (*t < travel + 1e-3) {
        travel = std::max(0.0, *t - 1e-3);
        out.wall_clipped = true;
      }
  a.x += dx * travel;
  a.y += dy * travel;

  const double eat_dist = world.spec().agent_radius + world.spec().item_radius;
  for (std::size_t i = 0; i < world.items().size(); ++i) {
    const Item& it = world.items()[i];
    if (std::hypot(it.x - a.x, it.y - a.y) <= eat_dist) {
      if (it.kind == ItemKind::Food) {
        ++out.food_eaten;
        out.r_items += 5.0;
      } else {
        ++out.poison_eaten;
        out.r_items += -6.0;
      }
      world.respawn_item(i, rng);
    }
  }

  out.obs = sense_at(world, a.x, a.y, a.heading);
  double wall_sum = 0.0;
  for (int e = 0; e < kEyeCount; ++e)
    wall_sum += out.obs[static_cast<std::size_t>(e * kEyeChannels)];
  out.r_clear = wall_sum / kEyeCount;
  out.r_fwd = (action == 0 && out.r_clear > 0.75) ? 0.1 * out.r_clear : 0.0;
  out.reward = out.r_clear + out.r_fwd + out.r_items;
  return out;
}

inline std::vector<ContStepResult> multi_agent_tick(
    World& world, const std::vector<int>& actions, Rng& rng) {
  if (actions.size() != world.agents().size())
    throw std::invalid_argument("multi_agent_tick: one action per agent");
  std::vector<ContStepResult> out;
  out.reserve(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i)
    out.push_back(cont_step(world, i, actions[i], rng));
  return out;
}

}  // namespace fets
