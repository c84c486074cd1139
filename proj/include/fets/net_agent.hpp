#pragma once

// Multi-space acting agent for dropout Q-networks (the TS method family).
//
// Each space owns a small network over a fixed subset of the observation
// vector (the full observation for the main space) plus a replay buffer.
// The Thompson policy of a space is the dropout argmax vote of its network;
// the behavioral policy IS that Thompson policy, and the two free-energy
// temperatures coincide, so spaces are scored with the specialized
// Thompson-behavioral free energy. As in the tabular agent, the method tag
// only changes which distribution the action is drawn from.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/agent.hpp"
#include "fets/belief.hpp"
#include "fets/free_energy.hpp"
#include "fets/policy.hpp"
#include "fets/qnet.hpp"
#include "fets/rng.hpp"

namespace fets {

// One network space: a name, the observation indices it sees, and its two
// hidden-layer widths.
struct NetSpace {
  std::string name;
  std::vector<std::size_t> inputs;
  std::size_t h1 = 0;
  std::size_t h2 = 0;
};

// Main space over all eyes*channels inputs, plus one subspace per channel
// (channel c keeps observation indices c, c+channels, c+2*channels, ...).
inline std::vector<NetSpace> eye_channel_spaces(
    std::size_t eyes, std::size_t channels, std::size_t h_main,
    std::size_t h_sub, const std::vector<std::string>& channel_names) {
  if (channel_names.size() != channels)
    throw std::invalid_argument("eye_channel_spaces: one name per channel");
  std::vector<NetSpace> out;
  NetSpace main;
  main.name = "main";
  main.h1 = main.h2 = h_main;
  for (std::size_t i = 0; i < eyes * channels; ++i) main.inputs.push_back(i);
  out.push_back(std::move(main));
  for (std::size_t c = 0; c < channels; ++c) {
    NetSpace sub;
    sub.name = channel_names[c];
    sub.h1 = sub.h2 = h_sub;
    for (std::size_t e = 0; e < eyes; ++e) sub.inputs.push_back(e * channels + c);
    out.push_back(std::move(sub));
  }
  return out;
}

struct NetworkAgentConfig {
  Method method = Method::TS_FETS_FE;
  double alpha = 3.0;  // shared temperature (the blend strength equals it)
  double gamma = 0.9;
  double xi = 1e-4;
  std::size_t ts_passes = 100;
  double dropout = 0.1;
  double lr = 0.005;
  std::size_t batch = 32;
  std::size_t buffer_capacity = 10000;
  std::size_t min_buffer = 64;  // transitions required before training starts
};

class NetworkAgent {
 public:
  NetworkAgent(NetworkAgentConfig config, std::size_t n_obs,
               std::size_t n_actions, std::vector<NetSpace> spaces,
               std::uint64_t seed)
      : cfg_(config), n_obs_(n_obs), n_actions_(n_actions),
        spaces_(std::move(spaces)), rng_(make_rng(derive_seed(seed, 18))) {
    if (!method_network(cfg_.method))
      throw std::invalid_argument(
          "NetworkAgent: only TS-family methods use networks");
    if (spaces_.empty())
      throw std::invalid_argument("NetworkAgent: need at least one space");
    if (n_actions_ < 2)
      throw std::invalid_argument("NetworkAgent: need at least two actions");
    if (cfg_.min_buffer < cfg_.batch) cfg_.min_buffer = cfg_.batch;
    for (std::size_t i = 0; i < spaces_[0].inputs.size(); ++i)
      if (spaces_[0].inputs[i] != i)
        throw std::invalid_argument(
            "NetworkAgent: the first space must see the identity observation");
    if (spaces_[0].inputs.size() != n_obs_)
      throw std::invalid_argument(
          "NetworkAgent: the first space must see the full observation");
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      const auto& sp = spaces_[m];
      if (sp.inputs.empty() || sp.h1 == 0 || sp.h2 == 0)
        throw std::invalid_argument("NetworkAgent: bad space definition");
      for (std::size_t i : sp.inputs)
        if (i >= n_obs_)
          throw std::invalid_argument(
              "NetworkAgent: projection index outside the observation");
      nets_.emplace_back(sp.inputs.size(), sp.h1, sp.h2, n_actions_,
                         cfg_.dropout, derive_seed(seed, 100 + m));
      buffers_.emplace_back(cfg_.buffer_capacity);
    }
  }

  std::size_t n_spaces() const { return spaces_.size(); }
  const std::vector<NetSpace>& spaces() const { return spaces_; }
  const NetworkAgentConfig& config() const { return cfg_; }
  const Mlp& net(std::size_t m) const { return nets_.at(m); }
  Mlp& net(std::size_t m) { return nets_.at(m); }

  std::vector<double> project(std::size_t m, const std::vector<double>& obs) const {
    const auto& sp = spaces_.at(m);
    std::vector<double> x(sp.inputs.size());
    for (std::size_t i = 0; i < sp.inputs.size(); ++i) x[i] = obs[sp.inputs[i]];
    return x;
  }

  ActResult act(const std::vector<double>& obs) {
    check_obs(obs);
    const std::uint64_t step_seed = rng_();

    std::vector<ActionPolicy> pi_ts(spaces_.size());
    std::vector<FreeEnergyEval> evals(spaces_.size());
    ActResult out;
    out.free_energy.resize(spaces_.size());

    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      Rng ts_rng = make_rng(step_seed);
      pi_ts[m] = floor_policy(
          dropout_ts(nets_[m], project(m, obs), cfg_.ts_passes, ts_rng),
          cfg_.xi);
    }
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      evals[m] = evaluate_ts_behavioral(pi_ts[m], pi_ts[0], cfg_.alpha);
      out.free_energy[m] = evals[m].free_energy;
    }

    out.selected = select_space(out.free_energy, 0);
    const std::size_t source =
        method_uses_selection(cfg_.method) ? out.selected : 0;
    out.policy = method_draws_optimum(cfg_.method) ? evals[source].policy
                                                   : pi_ts[source];
    out.action = static_cast<int>(sample_action(out.policy, rng_));
    return out;
  }

  // Store the transition in every space's buffer and run one training step
  // per space once its buffer is warm.
  void observe(const std::vector<double>& obs, int action, double reward,
               const std::vector<double>& next_obs, bool terminal) {
    check_obs(obs);
    check_obs(next_obs);
    if (action < 0 || static_cast<std::size_t>(action) >= n_actions_)
      throw std::invalid_argument("observe: action out of range");
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      Transition t;
      t.obs = project(m, obs);
      t.action = static_cast<std::size_t>(action);
      t.reward = reward;
      t.next_obs = project(m, next_obs);
      t.terminal = terminal;
      buffers_[m].push(std::move(t));
      if (buffers_[m].size() >= cfg_.min_buffer) {
        const auto batch = buffers_[m].sample(cfg_.batch, rng_);
        train_step(nets_[m], batch, cfg_.gamma, cfg_.lr);
      }
    }
  }

 private:
  void check_obs(const std::vector<double>& obs) const {
    if (obs.size() != n_obs_)
      throw std::invalid_argument("NetworkAgent: observation size mismatch");
  }

  NetworkAgentConfig cfg_;
  std::size_t n_obs_;
  std::size_t n_actions_;
  std::vector<NetSpace> spaces_;
  Rng rng_;
  std::vector<Mlp> nets_;
  std::vector<ReplayBuffer> buffers_;
};

}  // namespace fets
