#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/rng.hpp"

namespace fets {

/// Probability vector over a finite action set.
/// Invariant: entries in [0,1], sum within 1e-9 of 1.
struct ActionPolicy {
  std::vector<double> probs;

  ActionPolicy() = default;
  explicit ActionPolicy(std::vector<double> p) : probs(std::move(p)) {}

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
  double& operator[](std::size_t i) { return probs[i]; }
};

constexpr double kPolicySumTol = 1e-9;

/// Validates the ActionPolicy invariant; `what` names the argument in errors.
inline void validate_policy(const ActionPolicy& pi, const std::string& what,
                            double tol = kPolicySumTol) {
  if (pi.probs.empty())
    throw std::invalid_argument(what + ": empty policy");
  double sum = 0.0;
  for (double p : pi.probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + tol)
      throw std::invalid_argument(what + ": entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument(what + ": probabilities sum to " + std::to_string(sum));
}

/// Samples an action index from a policy using one uniform draw.
inline std::size_t sample_action(const ActionPolicy& pi, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (std::size_t a = 0; a + 1 < pi.size(); ++a) {
    acc += pi[a];
    if (u < acc) return a;
  }
  return pi.size() - 1;
}

/// Gaussian belief over one action value.
struct GaussianBelief {
  double mean = 0.0;
  double std = 0.0;
};

}  // namespace fets
