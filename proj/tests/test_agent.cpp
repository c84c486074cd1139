#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <set>

#include "fets/agent.hpp"
#include "fets/maze.hpp"

using fets::ActResult;
using fets::DiscreteAgent;
using fets::DiscreteAgentConfig;
using fets::Method;
using fets::SpaceDef;

namespace {

DiscreteAgentConfig quick_config(Method m) {
  DiscreteAgentConfig cfg;
  cfg.method = m;
  cfg.ts_samples = 256;  // unit tests trade Monte Carlo sharpness for speed
  cfg.reward_span = 14.0;
  return cfg;
}

}  // namespace

TEST_CASE("method names round-trip and partition into families") {
  const auto& names = fets::method_names();
  CHECK(names.size() == 12);
  int mb = 0, mf = 0, ts = 0, fets_count = 0, fe = 0;
  std::set<std::string> seen;
  for (const auto& [tag, name] : names) {
    CHECK(fets::parse_method(name) == tag);
    CHECK(fets::method_name(tag) == name);
    seen.insert(name);
    const bool is_mb = fets::method_model_based(tag);
    const bool is_mf = fets::method_model_free(tag);
    const bool is_ts = fets::method_network(tag);
    CHECK((int(is_mb) + int(is_mf) + int(is_ts)) == 1);
    mb += is_mb;
    mf += is_mf;
    ts += is_ts;
    fets_count += fets::method_uses_selection(tag);
    fe += fets::method_draws_optimum(tag);
  }
  CHECK(seen.size() == 12);
  CHECK(mb == 4);
  CHECK(mf == 4);
  CHECK(ts == 4);
  CHECK(fets_count == 6);
  CHECK(fe == 6);
  CHECK(fets::method_uses_selection(Method::MB_FETS_B));
  CHECK_FALSE(fets::method_uses_selection(Method::MB_FE));
  CHECK(fets::method_draws_optimum(Method::TS_FE));
  CHECK_FALSE(fets::method_draws_optimum(Method::TS_FETS_B));
  CHECK_THROWS_AS(fets::parse_method("MB_FETS_FE"), std::invalid_argument);
}

TEST_CASE("epsilon-greedy spreads mass by the stated formula") {
  const auto one_hot = fets::epsilon_greedy({0.1, 0.9, 0.3}, 0.0);
  CHECK(one_hot.probs == std::vector<double>{0.0, 1.0, 0.0});

  const auto uniform = fets::epsilon_greedy({5.0, 1.0}, 1.0);
  CHECK(uniform[0] == Catch::Approx(0.5).margin(1e-15));
  CHECK(uniform[1] == Catch::Approx(0.5).margin(1e-15));

  const auto mixed = fets::epsilon_greedy({2.0, 1.0, 0.0, -1.0}, 0.1);
  CHECK(mixed[0] == Catch::Approx(0.925).margin(1e-12));
  CHECK(mixed[1] == Catch::Approx(0.025).margin(1e-12));
  CHECK(mixed[2] == Catch::Approx(0.025).margin(1e-12));
  CHECK(mixed[3] == Catch::Approx(0.025).margin(1e-12));

  // Value ties resolve to the lowest index.
  const auto tied = fets::epsilon_greedy({1.0, 1.0, 1.0}, 0.0);
  CHECK(tied.probs == std::vector<double>{1.0, 0.0, 0.0});

  CHECK_THROWS_AS(fets::epsilon_greedy({}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(fets::epsilon_greedy({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("construction validates spaces, methods, and actions") {
  const std::vector<SpaceDef> spaces = {{"main", 5, 4}};
  CHECK_NOTHROW(DiscreteAgent(quick_config(Method::MB), spaces, 4, 1u));
  CHECK_THROWS_AS(DiscreteAgent(quick_config(Method::TS), spaces, 4, 1u),
                  std::invalid_argument);
  CHECK_THROWS_AS(DiscreteAgent(quick_config(Method::MF), {}, 4, 1u),
                  std::invalid_argument);
  CHECK_THROWS_AS(DiscreteAgent(quick_config(Method::MF), spaces, 1, 1u),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      DiscreteAgent(quick_config(Method::MF), {{"main", 5, 9}}, 4, 1u),
      std::invalid_argument);

  DiscreteAgent agent(quick_config(Method::MF), spaces, 4, 1u);
  CHECK_THROWS_AS(agent.act({9}), std::out_of_range);
  CHECK_THROWS_AS(agent.act({0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(agent.observe({0}, 4, 0.0, {1}, false), std::invalid_argument);
  CHECK_THROWS_AS(agent.set_epsilon(1.5), std::invalid_argument);
}

TEST_CASE("act reports one free energy per space and a valid policy") {
  const std::vector<SpaceDef> spaces = {{"main", 6, 5}, {"phi", 3, 2}};
  DiscreteAgent agent(quick_config(Method::MF_FETS_FE), spaces, 4, 7u);
  const ActResult r = agent.act({1, 0});
  CHECK(r.free_energy.size() == 2);
  CHECK(r.selected < 2);
  CHECK(r.action >= 0);
  CHECK(r.action < 4);
  CHECK_NOTHROW(fets::validate_policy(r.policy, "act policy"));
}

TEST_CASE("every action keeps positive sampling probability under exploration") {
  DiscreteAgentConfig cfg = quick_config(Method::MF_FETS_B);
  cfg.ts_samples = 64;
  const std::vector<SpaceDef> spaces = {{"main", 4, 3}, {"phi", 2, 1}};
  DiscreteAgent agent(cfg, spaces, 4, 11u);
  // Push the main-space estimates firmly toward action 2 first.
  for (int k = 0; k < 50; ++k)
    agent.observe({0, 0}, 2, 1.0, {1, 0}, false);
  agent.end_episode();
  std::array<int, 4> counts{0, 0, 0, 0};
  for (int i = 0; i < 100000; ++i)
    ++counts[static_cast<std::size_t>(agent.act({0, 0}).action)];
  for (int a = 0; a < 4; ++a)
    CHECK(counts[static_cast<std::size_t>(a)] > 0);
}

TEST_CASE("identical spaces produce identical free energies and a main tie") {
  // The subspace is an exact copy of the main space, updated with the same
  // stream, so beliefs match bitwise and the tie rule must pick the full
  // space every time.
  for (Method m : {Method::MF_FETS_FE, Method::MB_FETS_FE}) {
    const std::vector<SpaceDef> spaces = {{"main", 4, 3}, {"copy", 4, 3}};
    DiscreteAgent agent(quick_config(m), spaces, 3, 13u);
    fets::Rng drive(5u);
    std::uniform_int_distribution<int> pa(0, 2);
    std::uniform_int_distribution<std::size_t> ps(0, 2);
    for (int step = 0; step < 120; ++step) {
      const std::size_t s = ps(drive);
      const std::size_t sn = ps(drive);
      const int a = pa(drive);
      const bool terminal = step % 17 == 16;
      agent.observe({s, s}, a, -1.0 + 0.1 * a,
                    terminal ? std::vector<std::size_t>{3, 3}
                             : std::vector<std::size_t>{sn, sn},
                    terminal);
    }
    agent.end_episode();
    for (std::size_t s = 0; s < 3; ++s) {
      const ActResult r = agent.act({s, s});
      CHECK(r.free_energy[0] == r.free_energy[1]);
      CHECK(r.selected == 0);
    }
  }
}

TEST_CASE("with only the main space, selection variants match plain variants") {
  // MB-FETS-FE with an empty subspace list must be behaviorally identical to
  // MB-FE: same seed, same transition stream, same actions, step by step.
  const std::vector<SpaceDef> spaces = {{"main", 10, 9}};
  DiscreteAgent a(quick_config(Method::MB_FE), spaces, 4, 99u);
  DiscreteAgent b(quick_config(Method::MB_FETS_FE), spaces, 4, 99u);
  fets::Rng env(3u);
  std::uniform_int_distribution<std::size_t> ps(0, 8);
  std::uniform_real_distribution<double> pr(-1.0, 1.0);
  std::size_t s = 0;
  for (int step = 0; step < 150; ++step) {
    const ActResult ra = a.act({s});
    const ActResult rb = b.act({s});
    REQUIRE(ra.action == rb.action);
    CHECK(ra.policy.probs == rb.policy.probs);
    const bool terminal = step % 23 == 22;
    const std::size_t sn = terminal ? 9 : ps(env);
    const double r = pr(env);
    a.observe({s}, ra.action, r, {sn}, terminal);
    b.observe({s}, rb.action, r, {sn}, terminal);
    s = terminal ? 0 : sn;
  }
}

TEST_CASE("observe projects one transition into every space's learner") {
  const std::vector<SpaceDef> spaces = {{"main", 5, 4}, {"phi", 3, 2}};
  DiscreteAgentConfig cfg = quick_config(Method::MF);
  DiscreteAgent agent(cfg, spaces, 2, 21u);
  DiscreteAgent solo(cfg, {{"main", 5, 4}}, 2, 21u);

  // Main sees 1 -> 2; the subspace aliases both to 1 (a self-loop).
  agent.observe({1, 1}, 0, -1.0, {2, 1}, false);
  solo.observe({1}, 0, -1.0, {2}, false);

  // One Q(lambda) step from zero tables: q(s,a) += eta * r.
  CHECK(agent.point_value(0, 1, 0) == Catch::Approx(-cfg.eta).margin(1e-12));
  CHECK(agent.point_value(1, 1, 0) == Catch::Approx(-cfg.eta).margin(1e-12));
  CHECK(agent.point_value(0, 1, 1) == 0.0);
  // The main space's update equals a single-space agent's update.
  CHECK(agent.point_value(0, 1, 0) == solo.point_value(0, 1, 0));
  CHECK(agent.point_value(0, 2, 0) == solo.point_value(0, 2, 0));
}

TEST_CASE("terminal episodes collapse return beliefs onto observed values") {
  const std::vector<SpaceDef> spaces = {{"main", 3, 2}};
  DiscreteAgentConfig cfg = quick_config(Method::MF);
  DiscreteAgent agent(cfg, spaces, 2, 31u);
  const double prior_std = cfg.reward_span / (1.0 - cfg.gamma);
  CHECK(agent.belief(0, 0, 0).std == Catch::Approx(prior_std).margin(1e-9));

  // Two one-step episodes with identical rewards: the return cell now has
  // two agreeing samples, so the interval collapses to zero width.
  agent.observe({0}, 0, 2.5, {2}, true);
  agent.observe({0}, 0, 2.5, {2}, true);
  CHECK(agent.belief(0, 0, 0).std == Catch::Approx(0.0).margin(1e-12));
  CHECK(agent.belief(0, 0, 1).std == Catch::Approx(prior_std).margin(1e-9));
}

TEST_CASE("interval bounds refresh per episode by default, per step on request") {
  const std::vector<SpaceDef> spaces = {{"main", 3, 2}};
  DiscreteAgentConfig lazy = quick_config(Method::MB);
  lazy.gamma = 0.5;
  DiscreteAgent agent(lazy, spaces, 2, 41u);
  const double before = agent.point_value(0, 0, 0);
  agent.observe({0}, 0, 4.0, {1}, false);
  agent.observe({1}, 0, 4.0, {1}, false);
  CHECK(agent.point_value(0, 0, 0) == before);  // stale until episode end
  agent.end_episode();
  CHECK(agent.point_value(0, 0, 0) != before);

  DiscreteAgentConfig eager = lazy;
  eager.bounds_every_step = true;
  DiscreteAgent agent2(eager, spaces, 2, 41u);
  const double before2 = agent2.point_value(0, 0, 0);
  agent2.observe({0}, 0, 4.0, {1}, false);
  CHECK(agent2.point_value(0, 0, 0) != before2);
}

TEST_CASE("the full space wins on an aliased plus maze and recovers the optimum") {
  // Five-cell plus: the x projection aliases the north and south arms with
  // the centre column, so its value estimates mislead; the full space must
  // dominate selection once both are well estimated, and greedy actions must
  // match the optimal policy computed from the true dynamics.
  const fets::MazeSpec maze = fets::builtin_maze("plus5");
  const fets::MazeIndexer idx(maze);
  const auto subs = fets::maze_subspaces(maze);

  DiscreteAgentConfig cfg = quick_config(Method::MB_FETS_FE);
  cfg.ts_samples = 512;
  cfg.fe = fets::FeParams{4.0, 7.0};
  std::vector<SpaceDef> spaces = {{"main", idx.n_states(), idx.sink()},
                                  {"phi_x", subs[0].n_states(), subs[0].sink()}};
  DiscreteAgent agent(cfg, spaces, fets::kMazeDirections, 3u);
  fets::Rng env_rng(12u);

  auto ids = [&](const fets::MazeState& s) {
    return std::vector<std::size_t>{idx.id(s), subs[0].id(s, false)};
  };
  auto sink_ids = [&]() {
    return std::vector<std::size_t>{idx.sink(), subs[0].sink()};
  };

  for (int episode = 0; episode < 250; ++episode) {
    fets::MazeState s = fets::maze_random_start(maze, env_rng);
    for (int t = 0; t < 60; ++t) {
      const ActResult act = agent.act(ids(s));
      const auto step = fets::maze_step(maze, s, act.action, env_rng);
      agent.observe(ids(s), act.action, step.reward,
                    step.terminal ? sink_ids() : ids(step.next),
                    step.terminal);
      if (step.terminal) break;
      s = step.next;
    }
    agent.end_episode();
  }
  // In the arms the x projection lumps the cell together with the centre row,
  // where "go right" reaches the goal — but from the arms, right is a wall.
  // The unaliased space must dominate selection at exactly those cells.
  for (const fets::MazeState arm : {fets::MazeState{2, 1},
                                    fets::MazeState{2, 3}}) {
    int main_picks = 0;
    const int probes = 40;
    for (int i = 0; i < probes; ++i)
      main_picks += agent.act(ids(arm)).selected == 0;
    CHECK(static_cast<double>(main_picks) / probes > 0.7);
  }
  // And the greedy policy pushes toward the goal from every open cell:
  // east from the centre row, south/north from the arms.
  CHECK(agent.greedy_action(0, idx.id({2, 2})) == 1);  // centre: go right
  CHECK(agent.greedy_action(0, idx.id({1, 2})) == 1);  // west arm: go right
  CHECK(agent.greedy_action(0, idx.id({2, 1})) == 2);  // north arm: go down
  CHECK(agent.greedy_action(0, idx.id({2, 3})) == 0);  // south arm: go up
}
