#pragma once

// Truncated Gaussian-mixture reward distributions shared by the discrete
// environments. Sampling is by rejection, which matches the declared
// "in [lo, hi]" semantics exactly. The second parameter of every component
// is a variance, not a standard deviation.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fets/rng.hpp"

namespace fets {

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;
};

class TruncatedMixture {
 public:
  TruncatedMixture(std::vector<MixtureComponent> components, double lo, double hi)
      : components_(std::move(components)), lo_(lo), hi_(hi) {
    if (components_.empty())
      throw std::invalid_argument("TruncatedMixture: no components");
    if (!(lo < hi)) throw std::invalid_argument("TruncatedMixture: empty support");
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight > 0.0) || !(c.variance >= 0.0))
        throw std::invalid_argument("TruncatedMixture: bad component");
      total += c.weight;
    }
    cumulative_.reserve(components_.size());
    double acc = 0.0;
    for (const auto& c : components_) {
      acc += c.weight / total;
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int guard = 0; guard < 100000; ++guard) {
      double pick = u(rng);
      std::size_t k = 0;
      while (k + 1 < cumulative_.size() && pick > cumulative_[k]) ++k;
      const MixtureComponent& c = components_[k];
      std::normal_distribution<double> n(c.mean, std::sqrt(c.variance));
      double x = n(rng);
      if (x >= lo_ && x <= hi_) return x;
    }
    throw std::runtime_error("TruncatedMixture: rejection sampling stalled");
  }

 private:
  std::vector<MixtureComponent> components_;
  std::vector<double> cumulative_;
  double lo_, hi_;
};

// Per-action step cost.
inline const TruncatedMixture& reward_rs() {
  static const TruncatedMixture d({{1.0, -1.5, 0.2}, {2.0, -0.5, 0.3}}, -2.0, 0.0);
  return d;
}

// Wall collision penalty.
inline const TruncatedMixture& reward_rw() {
  static const TruncatedMixture d({{1.0, -11.5, 0.2}, {2.0, -10.5, 0.3}}, -12.0, -10.0);
  return d;
}

// Goal bonus.
inline const TruncatedMixture& reward_rg() {
  static const TruncatedMixture d({{1.0, 10.0, 0.02}}, 9.5, 11.5);
  return d;
}

// Wasted-shot penalty in the combat task.
inline const TruncatedMixture& reward_ra() {
  static const TruncatedMixture d({{1.0, -10.0, 0.1}}, -11.0, -9.0);
  return d;
}

}  // namespace fets
