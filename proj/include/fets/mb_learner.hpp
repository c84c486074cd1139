#pragma once

// Model-based tabular learner. Transition counts feed smoothed estimates,
// plain value iteration gives point Q values, and UCRL2-style extended value
// iteration over reward and L1 transition confidence sets gives upper and
// lower Q bounds that convert to Gaussian Thompson beliefs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/policy.hpp"

namespace fets {

struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual;
};

// Counts plus incremental mean rewards. Next-state counts are kept as small
// sorted per-(s,a) lists; the +1 smoothing makes the effective transition row
// dense anyway, so solvers combine the sparse observed part with a uniform
// background instead of materializing the full row.
class MdpEstimate {
 public:
  MdpEstimate(std::size_t n_states, std::size_t n_actions,
              std::optional<std::size_t> sink = std::nullopt)
      : n_states_(n_states),
        n_actions_(n_actions),
        sink_(sink),
        n_sa_(n_states * n_actions, 0),
        r_sum_(n_states * n_actions, 0.0),
        obs_(n_states * n_actions) {
    if (n_states == 0 || n_actions == 0)
      throw std::invalid_argument("MdpEstimate: empty state or action set");
    if (sink && *sink >= n_states)
      throw std::invalid_argument("MdpEstimate: sink index out of range");
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::optional<std::size_t> sink() const { return sink_; }

  std::uint64_t n_sa(std::size_t s, std::size_t a) const { return n_sa_[idx(s, a)]; }

  std::uint64_t n_sas(std::size_t s, std::size_t a, std::size_t s_next) const {
    check_state(s_next);
    for (const auto& [next, cnt] : obs_[idx(s, a)])
      if (next == s_next) return cnt;
    return 0;
  }

  double r_hat(std::size_t s, std::size_t a) const {
    std::size_t i = idx(s, a);
    return n_sa_[i] == 0 ? 0.0 : r_sum_[i] / static_cast<double>(n_sa_[i]);
  }

  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& observed(
      std::size_t s, std::size_t a) const {
    return obs_[idx(s, a)];
  }

  void update(std::size_t s, std::size_t a, std::size_t s_next, double r) {
    check_state(s_next);
    std::size_t i = idx(s, a);
    n_sa_[i] += 1;
    r_sum_[i] += r;
    auto& row = obs_[i];
    auto it = std::lower_bound(row.begin(), row.end(), s_next,
                               [](const auto& e, std::size_t key) { return e.first < key; });
    if (it != row.end() && it->first == s_next) {
      it->second += 1;
    } else {
      row.insert(it, {static_cast<std::uint32_t>(s_next), 1u});
    }
  }

  std::size_t idx(std::size_t s, std::size_t a) const {
    if (s >= n_states_ || a >= n_actions_)
      throw std::out_of_range("MdpEstimate: state or action out of range");
    return s * n_actions_ + a;
  }

 private:
  void check_state(std::size_t s) const {
    if (s >= n_states_) throw std::out_of_range("MdpEstimate: state out of range");
  }

  std::size_t n_states_, n_actions_;
  std::optional<std::size_t> sink_;
  std::vector<std::uint64_t> n_sa_;
  std::vector<double> r_sum_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> obs_;
};

inline void update_model(MdpEstimate& model, std::size_t s, std::size_t a,
                         std::size_t s_next, double r) {
  model.update(s, a, s_next, r);
}

// Smoothed per-entry value before renormalization: (n_sas + 1) / (n_sa + 1).
inline double transition_estimate_raw(const MdpEstimate& model, std::size_t s,
                                      std::size_t a, std::size_t s_next) {
  return (static_cast<double>(model.n_sas(s, a, s_next)) + 1.0) /
         (static_cast<double>(model.n_sa(s, a)) + 1.0);
}

// Proper distribution over next states; the raw smoothed row sums to
// (n_sa + S) / (n_sa + 1), so renormalizing divides each entry by n_sa + S.
inline ActionPolicy transition_estimate(const MdpEstimate& model, std::size_t s,
                                        std::size_t a) {
  const std::size_t S = model.n_states();
  const double denom = static_cast<double>(model.n_sa(s, a)) + static_cast<double>(S);
  std::vector<double> p(S, 1.0 / denom);
  for (const auto& [next, cnt] : model.observed(s, a))
    p[next] = (static_cast<double>(cnt) + 1.0) / denom;
  return ActionPolicy(std::move(p));
}

struct ValueTable {
  std::size_t n_states = 0, n_actions = 0;
  std::vector<double> q;

  ValueTable() = default;
  ValueTable(std::size_t s, std::size_t a, double init = 0.0)
      : n_states(s), n_actions(a), q(s * a, init) {}

  double at(std::size_t s, std::size_t a) const { return q[s * n_actions + a]; }
  double& at(std::size_t s, std::size_t a) { return q[s * n_actions + a]; }

  double state_value(std::size_t s) const {
    const double* row = &q[s * n_actions];
    double best = row[0];
    for (std::size_t a = 1; a < n_actions; ++a) best = std::max(best, row[a]);
    return best;
  }
};

struct QBounds {
  ValueTable q_hat, q_lower, q_upper;
};

struct Radii {
  double eps_r = 0.0;
  double d_l1 = 0.0;
};

// UCRL2 confidence radii: Hoeffding for the mean reward, Weissman for the
// transition row. t is the total number of observed steps so far.
inline Radii radii(const MdpEstimate& model, std::size_t s, std::size_t a,
                   std::uint64_t t, double delta, double reward_span) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("radii: delta must lie in (0,1)");
  if (t < 1) throw std::invalid_argument("radii: t must be at least 1");
  if (!(reward_span >= 0.0) || !std::isfinite(reward_span))
    throw std::invalid_argument("radii: reward span must be finite and >= 0");
  const double S = static_cast<double>(model.n_states());
  const double A = static_cast<double>(model.n_actions());
  const double n = std::max<double>(1.0, static_cast<double>(model.n_sa(s, a)));
  const double td = static_cast<double>(t);
  Radii out;
  out.eps_r = reward_span * std::sqrt(7.0 * std::log(2.0 * S * A * td / delta) / (2.0 * n));
  out.d_l1 = std::sqrt(14.0 * S * std::log(2.0 * A * td / delta) / n);
  return out;
}

namespace detail {

// Orders states by value, descending, ties by lower index. The reverse walk
// of the same array is the stripping order for the extremal construction.
inline void value_order_desc(const std::vector<double>& v, std::vector<std::size_t>& order) {
  order.resize(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
}

// Expected value of v under the smoothed transition row for (s,a), tilted to
// the extremal distribution within L1 distance d that maximizes it. d = 0
// gives the plain smoothed expectation. `desc` must order v descending.
inline double tilted_expectation(const MdpEstimate& m, std::size_t s, std::size_t a,
                                 const std::vector<double>& v, double v_sum,
                                 const std::vector<std::size_t>& desc, double d) {
  const std::size_t S = m.n_states();
  const auto& obs = m.observed(s, a);
  const double denom = static_cast<double>(m.n_sa(s, a)) + static_cast<double>(S);

  double obs_dot = 0.0;
  for (const auto& [next, cnt] : obs) obs_dot += static_cast<double>(cnt) * v[next];
  double expect = (obs_dot + v_sum) / denom;
  if (d <= 0.0) return expect;

  auto p_hat = [&](std::size_t j) {
    for (const auto& [next, cnt] : obs)
      if (next == j) return (static_cast<double>(cnt) + 1.0) / denom;
    return 1.0 / denom;
  };

  const std::size_t best = desc.front();
  const double p_best = p_hat(best);
  const double add = std::min(d / 2.0, 1.0 - p_best);
  if (add <= 0.0) return expect;
  if (1.0 - p_best - add <= 1e-15) return v[best];  // everything else stripped

  expect += add * v[best];
  double remaining = add;
  for (std::size_t k = desc.size(); k-- > 0 && remaining > 0.0;) {
    std::size_t j = desc[k];
    if (j == best) continue;
    double take = std::min(p_hat(j), remaining);
    expect -= take * v[j];
    remaining -= take;
  }
  return expect;
}

}  // namespace detail

// Extremal Jaksch construction: within L1 distance d of p_hat, shift mass onto
// the single best-value state and strip it from the worst-value states.
inline ActionPolicy inner_max_l1(const std::vector<double>& values,
                                 const ActionPolicy& p_hat, double d) {
  if (values.size() != p_hat.size())
    throw std::invalid_argument("inner_max_l1: size mismatch");
  if (!(d >= 0.0)) throw std::invalid_argument("inner_max_l1: d must be >= 0");
  validate_policy(p_hat, "inner_max_l1 p_hat");

  std::vector<std::size_t> desc;
  detail::value_order_desc(values, desc);
  std::vector<double> p = p_hat.probs;
  const std::size_t best = desc.front();
  double add = std::min(d / 2.0, 1.0 - p[best]);
  p[best] += add;
  double remaining = add;
  for (std::size_t k = desc.size(); k-- > 0 && remaining > 0.0;) {
    std::size_t j = desc[k];
    if (j == best) continue;
    double take = std::min(p[j], remaining);
    p[j] -= take;
    remaining -= take;
  }
  return ActionPolicy(std::move(p));
}

namespace detail {

// One synchronous sweep of the optimality operator with per-(s,a) reward bonus
// and transition tilt. With all radii zero this is exactly plain value
// iteration, so the point estimate shares this code path. The sink row, when
// present, is pinned at zero: the episode is over and no reward follows.
struct SweepSpec {
  double reward_sign = 0.0;     // +1 upper, -1 lower, 0 point estimate
  double value_sign = 1.0;      // +1 maximizes the expectation, -1 minimizes
};

inline double sweep(const MdpEstimate& m, double gamma,
                    const std::vector<Radii>& per_sa, const SweepSpec& spec,
                    ValueTable& q, std::vector<double>& v_scratch,
                    std::vector<double>& v_signed, std::vector<std::size_t>& order) {
  const std::size_t S = m.n_states();
  const std::size_t A = m.n_actions();
  v_scratch.resize(S);
  for (std::size_t s = 0; s < S; ++s) v_scratch[s] = q.state_value(s);
  if (m.sink()) v_scratch[*m.sink()] = 0.0;

  v_signed = v_scratch;
  if (spec.value_sign < 0.0)
    for (double& x : v_signed) x = -x;
  value_order_desc(v_signed, order);
  double v_sum = 0.0;
  for (double x : v_signed) v_sum += x;

  double residual = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    if (m.sink() && s == *m.sink()) continue;
    for (std::size_t a = 0; a < A; ++a) {
      const Radii& rad = per_sa[m.idx(s, a)];
      double tilted = tilted_expectation(m, s, a, v_signed, v_sum, order, rad.d_l1);
      if (spec.value_sign < 0.0) tilted = -tilted;
      double next = m.r_hat(s, a) + spec.reward_sign * rad.eps_r + gamma * tilted;
      residual = std::max(residual, std::abs(next - q.at(s, a)));
      q.at(s, a) = next;
    }
  }
  return residual;
}

}  // namespace detail

constexpr double kViTol = 1e-6;
constexpr std::size_t kViMaxIters = 100000;

// Plain value iteration on the smoothed model.
inline ValueTable solve_q(const MdpEstimate& model, double gamma, double tol = kViTol,
                          std::size_t max_iters = kViMaxIters,
                          const ValueTable* warm_start = nullptr) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("solve_q: gamma must lie in [0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_q: tol must be positive");

  ValueTable q(model.n_states(), model.n_actions());
  if (warm_start && warm_start->q.size() == q.q.size()) q = *warm_start;
  std::vector<Radii> zero(model.n_states() * model.n_actions());
  std::vector<double> v, vs;
  std::vector<std::size_t> order;
  double residual = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    residual = detail::sweep(model, gamma, zero, {0.0, 1.0}, q, v, vs, order);
    if (residual < tol) return q;
  }
  throw convergence_error("solve_q: value iteration did not converge", residual);
}

// Coupled extended value iteration. All three tables advance one synchronous
// sweep at a time from a shared start, which keeps q_lower <= q_hat <= q_upper
// at every iterate (each sweep operator dominates the next pointwise), so the
// returned bounds inherit the ordering up to floating-point rounding.
inline QBounds extended_vi_with(const MdpEstimate& model, double gamma,
                                const std::vector<Radii>& per_sa, double tol = kViTol,
                                std::size_t max_iters = kViMaxIters,
                                const QBounds* warm_start = nullptr) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("extended_vi: gamma must lie in [0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("extended_vi: tol must be positive");
  if (per_sa.size() != model.n_states() * model.n_actions())
    throw std::invalid_argument("extended_vi: radii size mismatch");

  const std::size_t S = model.n_states(), A = model.n_actions();
  QBounds b{ValueTable(S, A), ValueTable(S, A), ValueTable(S, A)};
  if (warm_start && warm_start->q_hat.q.size() == b.q_hat.q.size()) b = *warm_start;

  std::vector<Radii> zero(S * A);
  std::vector<double> v, vs;
  std::vector<std::size_t> order;
  double worst = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    double r_hat = detail::sweep(model, gamma, zero, {0.0, 1.0}, b.q_hat, v, vs, order);
    double r_up = detail::sweep(model, gamma, per_sa, {1.0, 1.0}, b.q_upper, v, vs, order);
    double r_lo = detail::sweep(model, gamma, per_sa, {-1.0, -1.0}, b.q_lower, v, vs, order);
    worst = std::max({r_hat, r_up, r_lo});
    if (worst < tol) return b;
  }
  throw convergence_error("extended_vi: value iteration did not converge", worst);
}

inline QBounds extended_vi(const MdpEstimate& model, double gamma, double delta,
                           std::uint64_t t, double reward_span, double tol = kViTol,
                           std::size_t max_iters = kViMaxIters,
                           const QBounds* warm_start = nullptr) {
  const std::size_t S = model.n_states(), A = model.n_actions();
  std::vector<Radii> per_sa(S * A);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a)
      per_sa[model.idx(s, a)] = radii(model, s, a, t, delta, reward_span);
  return extended_vi_with(model, gamma, per_sa, tol, max_iters, warm_start);
}

// Width of the bound interval mapped to a Gaussian through the z-quantile.
inline GaussianBelief mb_belief(const QBounds& bounds, std::size_t s, std::size_t a,
                                double z_quantile) {
  if (!(z_quantile > 0.0))
    throw std::invalid_argument("mb_belief: z quantile must be positive");
  GaussianBelief g;
  g.mean = bounds.q_hat.at(s, a);
  g.std = (bounds.q_upper.at(s, a) - bounds.q_lower.at(s, a)) / (2.0 * z_quantile);
  return g;
}

}  // namespace fets
