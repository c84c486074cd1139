#pragma once

// Model-free tabular learner: Watkins Q(lambda) with replacing traces plus
// per-(state, action) Monte Carlo return statistics that feed t-distribution
// confidence intervals, which in turn become Gaussian Thompson beliefs.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/belief.hpp"
#include "fets/stats.hpp"

namespace fets {

struct insufficient_data : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat row-major (state * n_actions + action) tables. Traces are kept sparse
// through an index list so episode sweeps touch only live entries.
class QTable {
 public:
  QTable(std::size_t n_states, std::size_t n_actions, double q_init = 0.0)
      : n_states_(n_states),
        n_actions_(n_actions),
        q_(n_states * n_actions, q_init),
        trace_(n_states * n_actions, 0.0) {
    if (n_states == 0 || n_actions == 0)
      throw std::invalid_argument("QTable: empty state or action set");
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  double q(std::size_t s, std::size_t a) const { return q_[idx(s, a)]; }
  double& q(std::size_t s, std::size_t a) { return q_[idx(s, a)]; }
  double trace(std::size_t s, std::size_t a) const { return trace_[idx(s, a)]; }

  double max_q(std::size_t s) const {
    const double* row = &q_[idx(s, 0)];
    double best = row[0];
    for (std::size_t a = 1; a < n_actions_; ++a) best = std::max(best, row[a]);
    return best;
  }

  // Lowest-index argmax, matching the tie rule used everywhere else.
  std::size_t greedy_action(std::size_t s) const {
    const double* row = &q_[idx(s, 0)];
    std::size_t best = 0;
    for (std::size_t a = 1; a < n_actions_; ++a)
      if (row[a] > row[best]) best = a;
    return best;
  }

  void reset_traces() {
    for (std::size_t i : active_) trace_[i] = 0.0;
    active_.clear();
  }

  void set_trace_one(std::size_t s, std::size_t a) {
    std::size_t i = idx(s, a);
    if (trace_[i] == 0.0) active_.push_back(i);
    trace_[i] = 1.0;
  }

  template <typename Fn>
  void for_each_active(Fn&& fn) {
    for (std::size_t i : active_) fn(i / n_actions_, i % n_actions_, trace_[i]);
  }

  void decay_traces(double factor) {
    if (factor == 0.0) {
      reset_traces();
      return;
    }
    std::size_t kept = 0;
    for (std::size_t i : active_) {
      trace_[i] *= factor;
      if (trace_[i] >= kMinTrace) {
        active_[kept++] = i;
      } else {
        trace_[i] = 0.0;
      }
    }
    active_.resize(kept);
  }

  static constexpr double kMinTrace = 1e-12;

 private:
  std::size_t idx(std::size_t s, std::size_t a) const {
    if (s >= n_states_ || a >= n_actions_)
      throw std::out_of_range("QTable: state or action out of range");
    return s * n_actions_ + a;
  }

  std::size_t n_states_, n_actions_;
  std::vector<double> q_, trace_;
  std::vector<std::size_t> active_;
};

// TD step with replacing traces; the caller says whether the taken action was
// greedy under its own policy, and any exploratory step wipes the traces after
// the sweep (Watkins' rule), so no stale credit leaks across explorations.
inline void q_update(QTable& table, std::size_t s, std::size_t a, double r,
                     std::size_t s_next, double gamma, double eta, double lambda,
                     bool greedy_action_taken) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("q_update: eta must lie in (0,1]");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("q_update: gamma must lie in [0,1)");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("q_update: lambda must lie in [0,1]");

  const double delta = r + gamma * table.max_q(s_next) - table.q(s, a);
  table.set_trace_one(s, a);
  table.for_each_active(
      [&](std::size_t x, std::size_t b, double e) { table.q(x, b) += eta * delta * e; });
  if (greedy_action_taken) {
    table.decay_traces(gamma * lambda);
  } else {
    table.reset_traces();
  }
}

struct ReturnCell {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Accumulated discounted-return samples per (state, action), every visit.
class ReturnStats {
 public:
  ReturnStats(std::size_t n_states, std::size_t n_actions)
      : n_states_(n_states), n_actions_(n_actions), cells_(n_states * n_actions) {
    if (n_states == 0 || n_actions == 0)
      throw std::invalid_argument("ReturnStats: empty state or action set");
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  const ReturnCell& cell(std::size_t s, std::size_t a) const { return cells_[idx(s, a)]; }

  void add_sample(std::size_t s, std::size_t a, double value) {
    ReturnCell& c = cells_[idx(s, a)];
    c.n += 1;
    c.sum += value;
    c.sum_sq += value * value;
  }

 private:
  std::size_t idx(std::size_t s, std::size_t a) const {
    if (s >= n_states_ || a >= n_actions_)
      throw std::out_of_range("ReturnStats: state or action out of range");
    return s * n_actions_ + a;
  }

  std::size_t n_states_, n_actions_;
  std::vector<ReturnCell> cells_;
};

struct VisitStep {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
};

// Accrues one finished episode. Returns are built backward so each visit costs
// O(1): G_k = r_k + gamma * G_{k+1}.
inline void record_returns(ReturnStats& stats, const std::vector<VisitStep>& trajectory,
                           double gamma) {
  double g = 0.0;
  std::vector<double> returns(trajectory.size());
  for (std::size_t i = trajectory.size(); i-- > 0;) {
    g = trajectory[i].reward + gamma * g;
    returns[i] = g;
  }
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    stats.add_sample(trajectory[i].state, trajectory[i].action, returns[i]);
}

inline double sample_std(const ReturnCell& cell) {
  if (cell.n < 2) throw insufficient_data("sample_std: need at least two samples");
  const double n = static_cast<double>(cell.n);
  // Rounding can push the variance a hair below zero for identical samples.
  const double var = std::max(0.0, (n * cell.sum_sq - cell.sum * cell.sum) / (n * (n - 1.0)));
  return std::sqrt(var);
}

struct MfInterval {
  double half_width = 0.0;
  double quantile = 1.0;
};

// Two-sided (1 - nu) confidence half width around q_hat. Under-visited cells
// fall back to the caller's prior half width with a unit quantile, so
// ci_to_gaussian turns it straight into the prior standard deviation.
inline MfInterval mf_interval(const ReturnCell& cell, double q_hat, double nu,
                              double prior_half_width) {
  (void)q_hat;
  if (!(nu > 0.0 && nu < 1.0))
    throw std::invalid_argument("mf_interval: nu must lie in (0,1)");
  if (!(prior_half_width >= 0.0) || !std::isfinite(prior_half_width))
    throw std::invalid_argument("mf_interval: prior half width must be finite and >= 0");
  if (cell.n < 2) return MfInterval{prior_half_width, 1.0};
  const double t = student_t_quantile(1.0 - nu / 2.0, static_cast<double>(cell.n - 1));
  const double hw = t * sample_std(cell) / std::sqrt(static_cast<double>(cell.n));
  return MfInterval{hw, t};
}

// Belief over Q(s,a) for Thompson sampling: mean q_hat, std from the interval.
inline GaussianBelief mf_belief(const ReturnCell& cell, double q_hat, double nu,
                                double prior_half_width) {
  MfInterval iv = mf_interval(cell, q_hat, nu, prior_half_width);
  return ci_to_gaussian(q_hat, iv.half_width, iv.quantile);
}

}  // namespace fets
