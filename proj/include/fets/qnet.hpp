#pragma once

// Small fully-connected Q-network (two tanh hidden layers, linear output)
// with inverted dropout on the hidden activations. Dropout-on forwards act as
// posterior samples, so repeated argmax counts give a Thompson policy for the
// continuous domain. Training is plain one-step Q-learning from a replay ring
// via hand-rolled backprop and SGD.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fets/belief.hpp"
#include "fets/policy.hpp"
#include "fets/rng.hpp"

namespace fets {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

struct Layer {
  std::size_t in = 0, out = 0;
  std::vector<double> w;  // row-major [out][in]
  std::vector<double> b;  // [out]
};

struct MlpActivations {
  std::vector<double> a1_pre, a1, a2_pre, a2, out;  // pre = before dropout
  std::vector<double> mask1, mask2;                 // 0 or 1/(1-p) factors
};

class Mlp {
 public:
  Mlp(std::size_t n_in, std::size_t h1, std::size_t h2, std::size_t n_out,
      double dropout_rate, std::uint64_t seed)
      : sizes_{n_in, h1, h2, n_out}, p_(dropout_rate), rng_(make_rng(seed)) {
    if (n_in == 0 || h1 == 0 || h2 == 0 || n_out == 0)
      throw std::invalid_argument("Mlp: all layer sizes must be positive");
    if (!(p_ >= 0.0 && p_ < 1.0))
      throw std::invalid_argument("Mlp: dropout rate must lie in [0,1)");
    init_layer(l1_, n_in, h1);
    init_layer(l2_, h1, h2);
    init_layer(l3_, h2, n_out);
  }

  const std::size_t* layer_sizes() const { return sizes_; }
  double dropout_rate() const { return p_; }
  Layer& layer(int i) { return i == 0 ? l1_ : i == 1 ? l2_ : l3_; }
  const Layer& layer(int i) const { return i == 0 ? l1_ : i == 1 ? l2_ : l3_; }
  Rng& rng() { return rng_; }

  // Filled masks hold the inverted-dropout factor per unit; pass nullptr for
  // a clean deterministic pass. Activations are stored for backprop.
  void forward_into(const std::vector<double>& x, const std::vector<double>* m1,
                    const std::vector<double>* m2, MlpActivations& acts) const {
    if (x.size() != sizes_[0])
      throw std::invalid_argument("Mlp forward: input length mismatch");
    affine_tanh(l1_, x, acts.a1_pre);
    apply_mask(acts.a1_pre, m1, acts.a1);
    affine_tanh(l2_, acts.a1, acts.a2_pre);
    apply_mask(acts.a2_pre, m2, acts.a2);
    affine(l3_, acts.a2, acts.out);
  }

  void draw_mask(std::vector<double>& mask, std::size_t n) {
    mask.resize(n);
    const double keep = 1.0 - p_;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) mask[i] = u(rng_) < keep ? 1.0 / keep : 0.0;
  }

 private:
  void init_layer(Layer& l, std::size_t in, std::size_t out) {
    l.in = in;
    l.out = out;
    l.w.resize(in * out);
    l.b.assign(out, 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : l.w) w = u(rng_);
  }

  static void affine(const Layer& l, const std::vector<double>& x, std::vector<double>& y) {
    y.resize(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* row = &l.w[o * l.in];
      double z = l.b[o];
      for (std::size_t i = 0; i < l.in; ++i) z += row[i] * x[i];
      y[o] = z;
    }
  }

  static void affine_tanh(const Layer& l, const std::vector<double>& x,
                          std::vector<double>& y) {
    affine(l, x, y);
    for (double& v : y) v = std::tanh(v);
  }

  static void apply_mask(const std::vector<double>& pre, const std::vector<double>* mask,
                         std::vector<double>& post) {
    post = pre;
    if (!mask) return;
    for (std::size_t i = 0; i < post.size(); ++i) post[i] *= (*mask)[i];
  }

  std::size_t sizes_[4];
  double p_;
  Rng rng_;
  Layer l1_, l2_, l3_;
};

// Per-action values for one observation. Dropout masks come from the caller's
// rng so a fixed seed reproduces masks and outputs exactly.
inline std::vector<double> forward(const Mlp& net, const std::vector<double>& x,
                                   bool dropout_on, Rng& rng) {
  MlpActivations acts;
  if (!dropout_on || net.dropout_rate() == 0.0) {
    net.forward_into(x, nullptr, nullptr, acts);
    return acts.out;
  }
  const double keep = 1.0 - net.dropout_rate();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m1(net.layer_sizes()[1]), m2(net.layer_sizes()[2]);
  for (double& m : m1) m = u(rng) < keep ? 1.0 / keep : 0.0;
  for (double& m : m2) m = u(rng) < keep ? 1.0 / keep : 0.0;
  net.forward_into(x, &m1, &m2, acts);
  return acts.out;
}

// N stochastic forward passes vote for their argmax; the counts divided by N
// are the Thompson policy. Argmax ties go to the lowest action index.
inline ActionPolicy dropout_ts(const Mlp& net, const std::vector<double>& x,
                               std::size_t passes, Rng& rng) {
  if (passes < 1) throw std::invalid_argument("dropout_ts: need at least one pass");
  std::vector<int> counts(net.layer_sizes()[3], 0);
  for (std::size_t k = 0; k < passes; ++k) {
    std::vector<double> q = forward(net, x, true, rng);
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
      if (q[a] > q[best]) best = a;
    counts[best] += 1;
  }
  return thompson_from_dropout(counts, static_cast<int>(passes));
}

struct Transition {
  std::vector<double> obs;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  }

  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }

  void push(Transition t) {
    if (ring_.size() < capacity_) {
      ring_.push_back(std::move(t));
    } else {
      ring_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  const Transition& at(std::size_t i) const { return ring_[i]; }

  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const {
    if (batch == 0 || ring_.size() < batch)
      throw std::invalid_argument("ReplayBuffer: not enough stored transitions");
    std::uniform_int_distribution<std::size_t> pick(0, ring_.size() - 1);
    std::vector<const Transition*> out(batch);
    for (auto& p : out) p = &ring_[pick(rng)];
    return out;
  }

 private:
  std::size_t capacity_, head_ = 0;
  std::vector<Transition> ring_;
};

struct MlpGradients {
  std::vector<double> w[3], b[3];

  explicit MlpGradients(const Mlp& net) {
    for (int l = 0; l < 3; ++l) {
      w[l].assign(net.layer(l).w.size(), 0.0);
      b[l].assign(net.layer(l).b.size(), 0.0);
    }
  }
};

namespace detail {

// Accumulates d/dparams of (out[action] - target)^2 * scale for one sample.
// Masks must be the ones used in the forward pass; the stored pre-dropout
// activations give the tanh derivatives.
inline double backprop_sample(const Mlp& net, const std::vector<double>& x,
                              std::size_t action, double target,
                              const std::vector<double>* m1, const std::vector<double>* m2,
                              double scale, MlpGradients& g) {
  MlpActivations acts;
  net.forward_into(x, m1, m2, acts);
  const double err = acts.out[action] - target;

  const Layer& l3 = net.layer(2);
  const Layer& l2 = net.layer(1);
  const Layer& l1 = net.layer(0);

  // Output layer: only the taken action carries gradient.
  const double d_out = 2.0 * err * scale;
  std::vector<double> d_a2(l3.in, 0.0);
  {
    const double* row = &l3.w[action * l3.in];
    double* gw = &g.w[2][action * l3.in];
    for (std::size_t i = 0; i < l3.in; ++i) {
      gw[i] += d_out * acts.a2[i];
      d_a2[i] = d_out * row[i];
    }
    g.b[2][action] += d_out;
  }

  std::vector<double> d_z2(l2.out);
  for (std::size_t o = 0; o < l2.out; ++o) {
    double d = d_a2[o];
    if (m2) d *= (*m2)[o];
    d_z2[o] = d * (1.0 - acts.a2_pre[o] * acts.a2_pre[o]);
  }
  std::vector<double> d_a1(l2.in, 0.0);
  for (std::size_t o = 0; o < l2.out; ++o) {
    const double* row = &l2.w[o * l2.in];
    double* gw = &g.w[1][o * l2.in];
    const double d = d_z2[o];
    for (std::size_t i = 0; i < l2.in; ++i) {
      gw[i] += d * acts.a1[i];
      d_a1[i] += d * row[i];
    }
    g.b[1][o] += d;
  }

  for (std::size_t o = 0; o < l1.out; ++o) {
    double d = d_a1[o];
    if (m1) d *= (*m1)[o];
    d = d * (1.0 - acts.a1_pre[o] * acts.a1_pre[o]);
    double* gw = &g.w[0][o * l1.in];
    for (std::size_t i = 0; i < l1.in; ++i) gw[i] += d * x[i];
    g.b[0][o] += d;
  }

  return err * err * scale;
}

}  // namespace detail

// One SGD step on the mean squared TD error of the batch. Targets use a clean
// forward pass; the trained pass draws fresh dropout masks from the net's own
// rng, matching how the net is later sampled.
inline double train_step(Mlp& net, const std::vector<const Transition*>& batch,
                         double gamma, double learning_rate) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("train_step: gamma must lie in [0,1)");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("train_step: learning rate must be positive");

  MlpGradients g(net);
  MlpActivations target_acts;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const bool use_dropout = net.dropout_rate() > 0.0;
  std::vector<double> m1, m2;
  double loss = 0.0;

  for (const Transition* t : batch) {
    double target = t->reward;
    if (!t->terminal) {
      net.forward_into(t->next_obs, nullptr, nullptr, target_acts);
      double best = target_acts.out[0];
      for (double v : target_acts.out) best = std::max(best, v);
      target += gamma * best;
    }
    const std::vector<double>*p1 = nullptr, *p2 = nullptr;
    if (use_dropout) {
      net.draw_mask(m1, net.layer_sizes()[1]);
      net.draw_mask(m2, net.layer_sizes()[2]);
      p1 = &m1;
      p2 = &m2;
    }
    loss += detail::backprop_sample(net, t->obs, t->action, target, p1, p2, scale, g);
  }

  for (int l = 0; l < 3; ++l) {
    Layer& layer = net.layer(l);
    for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= learning_rate * g.w[l][i];
    for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= learning_rate * g.b[l][i];
  }
  return loss;
}

// Checkpoint layout: "FQN1", four layer sizes, then for each layer its weight
// matrix (row-major) followed by its biases; every number a little-endian f64.
inline void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write("FQN1", 4);
  auto put = [&](double v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); };
  for (int i = 0; i < 4; ++i) put(static_cast<double>(net.layer_sizes()[i]));
  for (int l = 0; l < 3; ++l) {
    for (double v : net.layer(l).w) put(v);
    for (double v : net.layer(l).b) put(v);
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline Mlp load_checkpoint(const std::string& path, double dropout_rate,
                           std::uint64_t seed) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "FQN1", 4) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  auto get = [&]() {
    double v;
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return v;
  };
  std::size_t sizes[4];
  for (auto& s : sizes) {
    double v = get();
    if (v < 1.0 || v != std::floor(v))
      throw std::runtime_error("load_checkpoint: invalid layer size in " + path);
    s = static_cast<std::size_t>(v);
  }
  Mlp net(sizes[0], sizes[1], sizes[2], sizes[3], dropout_rate, seed);
  for (int l = 0; l < 3; ++l) {
    for (double& v : net.layer(l).w) v = get();
    for (double& v : net.layer(l).b) v = get();
  }
  for (int l = 0; l < 3; ++l) {
    for (double v : net.layer(l).w)
      if (!std::isfinite(v)) throw std::runtime_error("load_checkpoint: non-finite weight");
    for (double v : net.layer(l).b)
      if (!std::isfinite(v)) throw std::runtime_error("load_checkpoint: non-finite bias");
  }
  return net;
}

}  // namespace fets
