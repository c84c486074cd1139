#pragma once

// Multi-space acting agent for the tabular learners.
//
// The agent holds one learner per space (the full state space first, then
// any number of abstract subspaces sharing the action set). Every step it
// converts each space's value intervals into Gaussian beliefs, computes that
// space's Thompson policy by Monte Carlo (all spaces reuse one per-step seed,
// so identical beliefs give bitwise-identical policies), floors it, evaluates
// the variational free energy of acting in that space against the space's
// behavioral policy, and picks the space with minimal free energy (ties fall
// to the full space). The method tag only changes which distribution the
// action is finally drawn from, so baselines and selection variants share one
// code path and one random stream.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/belief.hpp"
#include "fets/free_energy.hpp"
#include "fets/mb_learner.hpp"
#include "fets/mf_learner.hpp"
#include "fets/policy.hpp"
#include "fets/rng.hpp"
#include "fets/stats.hpp"

namespace fets {

// Method tags. Families: MB (interval-bounded model estimate), MF (tabular
// Q(lambda) with return statistics), TS (dropout Q-networks; see net_agent).
// Suffixes: none = draw from the behavioral policy of the full space;
// -FE = draw from the free-energy optimum of the full space; -FETS-B /
// -FETS-FE = select a space by free energy first, then draw from its
// behavioral / optimal policy.
enum class Method {
  MB,
  MB_FE,
  MF,
  MF_FE,
  MB_FETS_B,
  MB_FETS_FE,
  MF_FETS_B,
  MF_FETS_FE,
  TS,
  TS_FE,
  TS_FETS_B,
  TS_FETS_FE,
};

inline const std::vector<std::pair<Method, std::string>>& method_names() {
  static const std::vector<std::pair<Method, std::string>> names = {
      {Method::MB, "MB"},
      {Method::MB_FE, "MB-FE"},
      {Method::MF, "MF"},
      {Method::MF_FE, "MF-FE"},
      {Method::MB_FETS_B, "MB-FETS-B"},
      {Method::MB_FETS_FE, "MB-FETS-FE"},
      {Method::MF_FETS_B, "MF-FETS-B"},
      {Method::MF_FETS_FE, "MF-FETS-FE"},
      {Method::TS, "TS"},
      {Method::TS_FE, "TS-FE"},
      {Method::TS_FETS_B, "TS-FETS-B"},
      {Method::TS_FETS_FE, "TS-FETS-FE"},
  };
  return names;
}

inline std::string method_name(Method m) {
  for (const auto& [tag, name] : method_names())
    if (tag == m) return name;
  throw std::invalid_argument("method_name: unknown method");
}

inline Method parse_method(const std::string& name) {
  for (const auto& [tag, n] : method_names())
    if (n == name) return tag;
  throw std::invalid_argument("parse_method: unknown method '" + name + "'");
}

inline bool method_uses_selection(Method m) {
  return m == Method::MB_FETS_B || m == Method::MB_FETS_FE ||
         m == Method::MF_FETS_B || m == Method::MF_FETS_FE ||
         m == Method::TS_FETS_B || m == Method::TS_FETS_FE;
}

inline bool method_draws_optimum(Method m) {
  return m == Method::MB_FE || m == Method::MF_FE || m == Method::TS_FE ||
         m == Method::MB_FETS_FE || m == Method::MF_FETS_FE ||
         m == Method::TS_FETS_FE;
}

inline bool method_model_based(Method m) {
  return m == Method::MB || m == Method::MB_FE || m == Method::MB_FETS_B ||
         m == Method::MB_FETS_FE;
}

inline bool method_model_free(Method m) {
  return m == Method::MF || m == Method::MF_FE || m == Method::MF_FETS_B ||
         m == Method::MF_FETS_FE;
}

inline bool method_network(Method m) {
  return m == Method::TS || m == Method::TS_FE || m == Method::TS_FETS_B ||
         m == Method::TS_FETS_FE;
}

// Exploration policy: probability 1 - eps + eps/|A| on the greedy action
// (value ties resolved to the lowest index), eps/|A| on every other action.
inline ActionPolicy epsilon_greedy(const std::vector<double>& q_values,
                                   double epsilon) {
  if (q_values.empty())
    throw std::invalid_argument("epsilon_greedy: no action values");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon_greedy: epsilon must lie in [0,1]");
  std::size_t greedy = 0;
  for (std::size_t a = 1; a < q_values.size(); ++a)
    if (q_values[a] > q_values[greedy]) greedy = a;
  ActionPolicy pi;
  pi.probs.assign(q_values.size(), epsilon / static_cast<double>(q_values.size()));
  pi.probs[greedy] += 1.0 - epsilon;
  return pi;
}

// One space of a tabular agent: a name, its abstract state count, and the
// index of the absorbing terminal state within it.
struct SpaceDef {
  std::string name;
  std::size_t n_states = 0;
  std::size_t sink = 0;
};

struct DiscreteAgentConfig {
  Method method = Method::MB_FETS_FE;
  FeParams fe{4.0, 7.0};
  double gamma = 0.9;
  double epsilon = 0.1;
  double xi = 1e-4;       // Thompson policy floor
  int ts_samples = 4096;  // Monte Carlo samples per Thompson policy
  // model-free family
  double eta = 0.1;
  double lambda = 0.8;
  double nu = 0.05;  // confidence level for return intervals
  // model-based family
  double delta = 0.05;  // confidence level for transition/reward radii
  bool bounds_every_step = false;
  double vi_tol = kViTol;
  std::size_t vi_max_iters = kViMaxIters;
  // shared: environment-declared bound on |r|; scales prior widths and radii
  double reward_span = 25.5;
};

struct ActResult {
  int action = 0;
  std::size_t selected = 0;              // index into the space list
  std::vector<double> free_energy;       // one entry per space
  ActionPolicy policy;                   // distribution the action came from
};

class DiscreteAgent {
 public:
  DiscreteAgent(DiscreteAgentConfig config, std::vector<SpaceDef> spaces,
                std::size_t n_actions, std::uint64_t seed)
      : cfg_(config), spaces_(std::move(spaces)), n_actions_(n_actions),
        rng_(make_rng(derive_seed(seed, 17))) {
    if (spaces_.empty())
      throw std::invalid_argument("DiscreteAgent: need at least one space");
    if (n_actions_ < 2)
      throw std::invalid_argument("DiscreteAgent: need at least two actions");
    if (method_network(cfg_.method))
      throw std::invalid_argument(
          "DiscreteAgent: TS-family methods need the network agent");
    for (const auto& sp : spaces_) {
      if (sp.n_states < 2 || sp.sink >= sp.n_states)
        throw std::invalid_argument("DiscreteAgent: bad space definition");
      if (method_model_based(cfg_.method)) {
        models_.emplace_back(sp.n_states, n_actions_, sp.sink);
        bounds_.push_back(QBounds{});
      } else {
        tables_.emplace_back(sp.n_states, n_actions_, 0.0);
        returns_.emplace_back(sp.n_states, n_actions_);
        episode_.emplace_back();
      }
    }
    if (method_model_based(cfg_.method)) refresh_bounds();
  }

  std::size_t n_spaces() const { return spaces_.size(); }
  const std::vector<SpaceDef>& spaces() const { return spaces_; }
  const DiscreteAgentConfig& config() const { return cfg_; }
  void set_epsilon(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0))
      throw std::invalid_argument("set_epsilon: epsilon must lie in [0,1]");
    cfg_.epsilon = eps;
  }

  // Gaussian belief over the value of (state, action) in one space.
  GaussianBelief belief(std::size_t space, std::size_t s, std::size_t a) const {
    check_space(space);
    if (method_model_based(cfg_.method)) {
      const double z = normal_quantile(1.0 - cfg_.delta / 2.0);
      return mb_belief(bounds_[space], s, a, z);
    }
    const double prior_hw = cfg_.reward_span / (1.0 - cfg_.gamma);
    return mf_belief(returns_[space].cell(s, a), tables_[space].q(s, a),
                     cfg_.nu, prior_hw);
  }

  // Point value estimate used by the behavioral policy of a space.
  double point_value(std::size_t space, std::size_t s, std::size_t a) const {
    check_space(space);
    return method_model_based(cfg_.method) ? bounds_[space].q_hat.at(s, a)
                                           : tables_[space].q(s, a);
  }

  std::size_t greedy_action(std::size_t space, std::size_t s) const {
    check_space(space);
    std::size_t best = 0;
    for (std::size_t a = 1; a < n_actions_; ++a)
      if (point_value(space, s, a) > point_value(space, s, best)) best = a;
    return best;
  }

  // One decision. `space_states` holds the current state's id in every space,
  // in space order. All spaces are evaluated; the method tag picks the
  // distribution the action is drawn from.
  ActResult act(const std::vector<std::size_t>& space_states) {
    check_states(space_states);
    const std::uint64_t step_seed = rng_();

    std::vector<ActionPolicy> pi_ts(spaces_.size());
    std::vector<ActionPolicy> pi_b(spaces_.size());
    std::vector<FreeEnergyEval> evals(spaces_.size());
    ActResult out;
    out.free_energy.resize(spaces_.size());

    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      std::vector<GaussianBelief> beliefs(n_actions_);
      for (std::size_t a = 0; a < n_actions_; ++a)
        beliefs[a] = belief(m, space_states[m], a);
      pi_ts[m] = floor_policy(
          thompson_from_beliefs(beliefs, cfg_.ts_samples, step_seed), cfg_.xi);
      std::vector<double> q(n_actions_);
      for (std::size_t a = 0; a < n_actions_; ++a)
        q[a] = point_value(m, space_states[m], a);
      pi_b[m] = epsilon_greedy(q, cfg_.epsilon);
    }
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      evals[m] = evaluate(pi_ts[m], pi_ts[0], pi_b[m], cfg_.fe);
      out.free_energy[m] = evals[m].free_energy;
    }

    out.selected = select_space(out.free_energy, 0);
    const std::size_t source = method_uses_selection(cfg_.method) ? out.selected : 0;
    out.policy = method_draws_optimum(cfg_.method) ? evals[source].policy
                                                   : pi_b[source];
    out.action = static_cast<int>(sample_action(out.policy, rng_));
    return out;
  }

  // Feed one environment transition to every space's learner. Terminal
  // transitions must carry each space's sink id in `next_states`.
  void observe(const std::vector<std::size_t>& states, int action, double reward,
               const std::vector<std::size_t>& next_states, bool terminal) {
    check_states(states);
    check_states(next_states);
    if (action < 0 || static_cast<std::size_t>(action) >= n_actions_)
      throw std::invalid_argument("observe: action out of range");
    const std::size_t a = static_cast<std::size_t>(action);
    ++steps_seen_;
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      if (method_model_based(cfg_.method)) {
        models_[m].update(states[m], a, next_states[m], reward);
      } else {
        const bool greedy = a == tables_[m].greedy_action(states[m]);
        q_update(tables_[m], states[m], a, reward, next_states[m], cfg_.gamma,
                 cfg_.eta, cfg_.lambda, greedy);
        episode_[m].push_back(VisitStep{states[m], a, reward});
      }
    }
    if (method_model_based(cfg_.method) && cfg_.bounds_every_step)
      refresh_bounds();
    if (terminal) finish_episode();
  }

  // Close out an episode that ended by truncation rather than a terminal
  // transition (recording returns and refreshing interval bounds).
  void end_episode() { finish_episode(); }

  // Recompute the interval bounds of every model-based space from the
  // current counts (warm-started from the previous bounds).
  void refresh_bounds() {
    if (!method_model_based(cfg_.method)) return;
    const std::uint64_t t = steps_seen_ == 0 ? 1 : steps_seen_;
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      const QBounds* warm =
          bounds_[m].q_hat.q.empty() ? nullptr : &bounds_[m];
      bounds_[m] = extended_vi(models_[m], cfg_.gamma, cfg_.delta, t,
                               cfg_.reward_span, cfg_.vi_tol,
                               cfg_.vi_max_iters, warm);
    }
  }

  std::uint64_t steps_seen() const { return steps_seen_; }

 private:
  void finish_episode() {
    if (method_model_based(cfg_.method)) {
      if (!cfg_.bounds_every_step) refresh_bounds();
      return;
    }
    for (std::size_t m = 0; m < spaces_.size(); ++m) {
      record_returns(returns_[m], episode_[m], cfg_.gamma);
      episode_[m].clear();
      tables_[m].reset_traces();
    }
  }

  void check_space(std::size_t m) const {
    if (m >= spaces_.size())
      throw std::out_of_range("DiscreteAgent: space index out of range");
  }

  void check_states(const std::vector<std::size_t>& states) const {
    if (states.size() != spaces_.size())
      throw std::invalid_argument("DiscreteAgent: one state id per space");
    for (std::size_t m = 0; m < spaces_.size(); ++m)
      if (states[m] >= spaces_[m].n_states)
        throw std::out_of_range("DiscreteAgent: state id outside its space");
  }

  DiscreteAgentConfig cfg_;
  std::vector<SpaceDef> spaces_;
  std::size_t n_actions_;
  Rng rng_;
  std::uint64_t steps_seen_ = 0;
  // model-based family
  std::vector<MdpEstimate> models_;
  std::vector<QBounds> bounds_;
  // model-free family
  std::vector<QTable> tables_;
  std::vector<ReturnStats> returns_;
  std::vector<std::vector<VisitStep>> episode_;
};

}  // namespace fets
