#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fets/policy.hpp"

namespace fets {

/// Selection temperature alpha and blend strength beta.
/// beta = 1 keeps only the main-space utility; large beta trusts the subspace.
struct FeParams {
  double alpha = 1.0;
  double beta = 1.0;
};

inline void validate_fe_params(const FeParams& fp) {
  if (!std::isfinite(fp.alpha) || fp.alpha <= 0.0)
    throw std::invalid_argument("FeParams: alpha must be positive");
  if (!std::isfinite(fp.beta) || fp.beta < 1.0)
    throw std::invalid_argument("FeParams: beta must be >= 1");
}

/// Result of minimizing variational free energy over action policies for one
/// space: the minimum value F = -(1/alpha) log Z, the partition Z, and the
/// minimizing policy pi*.
struct FreeEnergyEval {
  double free_energy = 0.0;
  double partition = 1.0;
  double log_partition = 0.0;
  ActionPolicy policy;
};

/// Utility of each action under a Thompson policy: U(a) = log pi_ts(a).
/// The policy must be strictly positive (floor it first).
inline std::vector<double> utility(const ActionPolicy& pi_ts) {
  validate_policy(pi_ts, "utility: pi_ts");
  std::vector<double> u(pi_ts.size());
  for (std::size_t a = 0; a < pi_ts.size(); ++a) {
    if (pi_ts[a] <= 0.0)
      throw std::domain_error("utility: zero probability has no log utility");
    u[a] = std::log(pi_ts[a]);
  }
  return u;
}

/// Blends subspace and main-space utilities:
/// u_tilde = u_sub - (1/beta) * (u_sub - u_main).
inline std::vector<double> tilted_utility(const std::vector<double>& u_sub,
                                          const std::vector<double>& u_main,
                                          const FeParams& fp) {
  validate_fe_params(fp);
  if (u_sub.size() != u_main.size() || u_sub.empty())
    throw std::invalid_argument("tilted_utility: utility length mismatch");
  std::vector<double> u(u_sub.size());
  const double w_sub = (fp.beta - 1.0) / fp.beta;
  const double w_main = 1.0 / fp.beta;
  for (std::size_t a = 0; a < u.size(); ++a)
    u[a] = w_sub * u_sub[a] + w_main * u_main[a];
  return u;
}

/// Free-energy minimization for a fixed tilted utility and behavioral policy:
///   pi*(a) = pi_b(a) exp(alpha u~(a)) / Z,
///   F = sum_a pi*(a) [ (1/alpha) log(pi*(a)/pi_b(a)) - u~(a) ] = -(1/alpha) log Z.
/// Computed in log space; actions with pi_b(a) = 0 stay at probability 0.
/// Both routes to F are evaluated and must agree to 1e-9.
inline FreeEnergyEval evaluate_tilted(const std::vector<double>& u_tilde,
                                      const ActionPolicy& pi_b, double alpha) {
  validate_policy(pi_b, "evaluate_tilted: pi_b");
  if (u_tilde.size() != pi_b.size())
    throw std::invalid_argument("evaluate_tilted: utility length mismatch");
  if (!std::isfinite(alpha) || alpha <= 0.0)
    throw std::invalid_argument("evaluate_tilted: alpha must be positive");
  for (double u : u_tilde)
    if (!std::isfinite(u))
      throw std::invalid_argument("evaluate_tilted: utilities must be finite");

  const std::size_t n = pi_b.size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> w(n, neg_inf);
  double w_max = neg_inf;
  for (std::size_t a = 0; a < n; ++a) {
    if (pi_b[a] > 0.0) {
      w[a] = std::log(pi_b[a]) + alpha * u_tilde[a];
      w_max = std::max(w_max, w[a]);
    }
  }

  double z_scaled = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    if (pi_b[a] > 0.0) z_scaled += std::exp(w[a] - w_max);
  const double log_z = w_max + std::log(z_scaled);

  FreeEnergyEval out;
  out.log_partition = log_z;
  out.partition = std::exp(log_z);
  out.policy.probs.assign(n, 0.0);

  // Explicit expectation form of F, kept as a runtime cross-check of the
  // partition identity; the log-Z form is returned (better conditioned).
  double f_sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (pi_b[a] <= 0.0) continue;
    double log_pi_star = w[a] - log_z;
    double p = std::exp(log_pi_star);
    out.policy.probs[a] = p;
    f_sum += p * ((log_pi_star - std::log(pi_b[a])) / alpha - u_tilde[a]);
  }
  double f_partition = -log_z / alpha;
  if (std::abs(f_sum - f_partition) > 1e-9 * std::max(1.0, std::abs(f_partition)))
    throw std::logic_error("evaluate_tilted: free-energy identity violated");
  out.free_energy = f_partition;
  return out;
}

/// Full evaluation for one space: utilities from the two Thompson policies,
/// tilt, then free-energy minimization against the behavioral policy.
inline FreeEnergyEval evaluate(const ActionPolicy& pi_ts_sub,
                               const ActionPolicy& pi_ts_main,
                               const ActionPolicy& pi_b, const FeParams& fp) {
  validate_fe_params(fp);
  if (pi_ts_sub.size() != pi_ts_main.size() || pi_ts_sub.size() != pi_b.size())
    throw std::invalid_argument("evaluate: policy length mismatch");
  std::vector<double> u_sub = utility(pi_ts_sub);
  std::vector<double> u_main = utility(pi_ts_main);
  std::vector<double> u = tilted_utility(u_sub, u_main, fp);
  return evaluate_tilted(u, pi_b, fp.alpha);
}

/// Free energy when Thompson sampling itself is the behavioral policy and the
/// two temperatures coincide (alpha = beta). Direct form:
///   pi*(a) proportional to pi_ts_main(a) * pi_ts_sub(a)^alpha,
///   F = E_pi*[-log pi_ts_sub] + (1/alpha) KL(pi* || pi_ts_main).
/// Agrees with evaluate(pi_ts_sub, pi_ts_main, pi_b = pi_ts_sub, alpha = beta).
inline FreeEnergyEval evaluate_ts_behavioral(const ActionPolicy& pi_ts_sub,
                                             const ActionPolicy& pi_ts_main,
                                             double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0)
    throw std::invalid_argument("evaluate_ts_behavioral: alpha must be positive");
  if (pi_ts_sub.size() != pi_ts_main.size())
    throw std::invalid_argument("evaluate_ts_behavioral: policy length mismatch");
  std::vector<double> log_sub = utility(pi_ts_sub);
  std::vector<double> log_main = utility(pi_ts_main);

  const std::size_t n = log_sub.size();
  std::vector<double> w(n);
  double w_max = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    w[a] = log_main[a] + alpha * log_sub[a];
    w_max = std::max(w_max, w[a]);
  }
  double z_scaled = 0.0;
  for (double v : w) z_scaled += std::exp(v - w_max);
  const double log_z = w_max + std::log(z_scaled);

  FreeEnergyEval out;
  out.log_partition = log_z;
  out.partition = std::exp(log_z);
  out.policy.probs.resize(n);

  // Expected surprise about subspace optimality plus the KL pull toward the
  // main-space Thompson policy, evaluated at the optimizer.
  double f_sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double log_pi_star = w[a] - log_z;
    double p = std::exp(log_pi_star);
    out.policy.probs[a] = p;
    f_sum += p * (-log_sub[a] + (log_pi_star - log_main[a]) / alpha);
  }
  double f_partition = -log_z / alpha;
  if (std::abs(f_sum - f_partition) > 1e-9 * std::max(1.0, std::abs(f_partition)))
    throw std::logic_error("evaluate_ts_behavioral: free-energy identity violated");
  out.free_energy = f_partition;
  return out;
}

/// Index of the space with minimal free energy. Exact ties prefer the main
/// space, then the lowest index.
inline std::size_t select_space(const std::vector<double>& free_energies,
                                std::size_t main_index) {
  if (free_energies.empty())
    throw std::invalid_argument("select_space: no spaces");
  if (main_index >= free_energies.size())
    throw std::invalid_argument("select_space: main_index out of range");
  for (double f : free_energies)
    if (!std::isfinite(f))
      throw std::invalid_argument("select_space: free energies must be finite");
  double best = *std::min_element(free_energies.begin(), free_energies.end());
  if (free_energies[main_index] == best) return main_index;
  for (std::size_t m = 0; m < free_energies.size(); ++m)
    if (free_energies[m] == best) return m;
  return main_index;  // unreachable
}

}  // namespace fets
