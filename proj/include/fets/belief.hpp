#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "fets/policy.hpp"
#include "fets/rng.hpp"

namespace fets {

/// Maps a symmetric confidence interval q_hat +/- half_width at the given
/// quantile onto a Gaussian belief: mean q_hat, std half_width / quantile.
inline GaussianBelief ci_to_gaussian(double q_hat, double half_width, double quantile) {
  if (!std::isfinite(q_hat) || !std::isfinite(half_width) || !std::isfinite(quantile))
    throw std::invalid_argument("ci_to_gaussian: arguments must be finite");
  if (half_width < 0.0)
    throw std::invalid_argument("ci_to_gaussian: half_width must be non-negative");
  if (quantile <= 0.0)
    throw std::invalid_argument("ci_to_gaussian: quantile must be positive");
  return {q_hat, half_width / quantile};
}

/// Monte Carlo estimate of the probability that each action's value is the
/// maximum under independent Gaussian beliefs. Exact ties between sampled
/// values are broken uniformly at random.
inline ActionPolicy thompson_from_beliefs(const std::vector<GaussianBelief>& beliefs,
                                          int sample_count, std::uint64_t seed) {
  if (beliefs.empty())
    throw std::invalid_argument("thompson_from_beliefs: no beliefs given");
  if (sample_count < 1)
    throw std::invalid_argument("thompson_from_beliefs: sample_count must be >= 1");
  for (const GaussianBelief& b : beliefs) {
    if (!std::isfinite(b.mean) || !std::isfinite(b.std) || b.std < 0.0)
      throw std::invalid_argument("thompson_from_beliefs: invalid belief parameters");
  }

  const std::size_t n = beliefs.size();
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::int64_t> wins(n, 0);
  std::vector<std::size_t> ties;
  ties.reserve(n);

  for (int s = 0; s < sample_count; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    ties.clear();
    for (std::size_t a = 0; a < n; ++a) {
      double q = beliefs[a].mean + beliefs[a].std * normal(rng);
      if (q > best) {
        best = q;
        ties.clear();
        ties.push_back(a);
      } else if (q == best) {
        ties.push_back(a);
      }
    }
    std::size_t winner = ties.front();
    if (ties.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
      winner = ties[pick(rng)];
    }
    ++wins[winner];
  }

  ActionPolicy pi;
  pi.probs.resize(n);
  for (std::size_t a = 0; a < n; ++a)
    pi.probs[a] = static_cast<double>(wins[a]) / static_cast<double>(sample_count);
  return pi;
}

/// Converts dropout argmax counts into a Thompson policy: counts / total.
inline ActionPolicy thompson_from_dropout(const std::vector<int>& argmax_counts, int total) {
  if (argmax_counts.empty())
    throw std::invalid_argument("thompson_from_dropout: no counts given");
  if (total < 1)
    throw std::invalid_argument("thompson_from_dropout: total must be >= 1");
  long long sum = 0;
  for (int c : argmax_counts) {
    if (c < 0) throw std::invalid_argument("thompson_from_dropout: negative count");
    sum += c;
  }
  if (sum != total)
    throw std::invalid_argument("thompson_from_dropout: counts do not sum to total");
  ActionPolicy pi;
  pi.probs.resize(argmax_counts.size());
  for (std::size_t a = 0; a < argmax_counts.size(); ++a)
    pi.probs[a] = static_cast<double>(argmax_counts[a]) / static_cast<double>(total);
  return pi;
}

/// Raises every entry to at least xi, then renormalizes. Entry ordering is
/// preserved; a policy already clear of the floor is returned unchanged.
inline ActionPolicy floor_policy(const ActionPolicy& pi, double xi) {
  validate_policy(pi, "floor_policy: pi");
  const double n = static_cast<double>(pi.size());
  if (!(xi > 0.0) || !(xi < 1.0 / n))
    throw std::invalid_argument("floor_policy: xi must lie in (0, 1/|A|)");

  bool needs_floor = false;
  for (double p : pi.probs)
    if (p < xi) { needs_floor = true; break; }
  if (!needs_floor) return pi;

  ActionPolicy out = pi;
  double sum = 0.0;
  for (double& p : out.probs) {
    p = std::max(p, xi);
    sum += p;
  }
  for (double& p : out.probs) p /= sum;
  return out;
}

}  // namespace fets
