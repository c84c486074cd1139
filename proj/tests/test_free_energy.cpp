#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fets/belief.hpp"
#include "fets/free_energy.hpp"

using namespace fets;

namespace {

ActionPolicy random_floored_policy(std::mt19937_64& gen, std::size_t n, double xi = 1e-4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& v : p) {
    v = u(gen) < 0.25 ? 0.0 : u(gen);
    sum += v;
  }
  if (sum == 0.0) { p[0] = 1.0; sum = 1.0; }
  for (auto& v : p) v /= sum;
  return floor_policy(ActionPolicy(p), xi);
}

// Explicit expectation form of F, recomputed outside the library.
double explicit_free_energy(const FreeEnergyEval& ev, const ActionPolicy& pi_b,
                            const std::vector<double>& u_tilde, double alpha) {
  double f = 0.0;
  for (std::size_t a = 0; a < pi_b.size(); ++a) {
    double p = ev.policy[a];
    if (p <= 0.0) continue;
    f += p * (std::log(p / pi_b[a]) / alpha - u_tilde[a]);
  }
  return f;
}

}  // namespace

TEST_CASE("utility is the log of the Thompson policy") {
  auto u4 = utility(ActionPolicy({0.25, 0.25, 0.25, 0.25}));
  for (double v : u4) CHECK(v == Catch::Approx(std::log(0.25)).margin(1e-12));

  auto u1 = utility(ActionPolicy({1.0}));
  CHECK(u1[0] == 0.0);

  auto u2 = utility(ActionPolicy({0.8, 0.2}));
  CHECK(u2[0] == Catch::Approx(-0.2231).margin(5e-5));
  CHECK(u2[1] == Catch::Approx(-1.6094).margin(5e-5));
  CHECK(u2[0] == Catch::Approx(std::log(0.8)).margin(1e-15));

  CHECK_THROWS_AS(utility(ActionPolicy({1.0, 0.0})), std::domain_error);
}

TEST_CASE("tilted_utility blends subspace and main utilities") {
  std::vector<double> u_main{-0.1, -2.0, -0.7};

  auto same = tilted_utility(u_main, u_main, {4.0, 7.0});
  CHECK(same == u_main);

  std::vector<double> u_sub{-3.0, -0.2, -1.0};
  auto collapsed = tilted_utility(u_sub, u_main, {4.0, 1.0});
  CHECK(collapsed == u_main);

  auto blended = tilted_utility({std::log(0.8), std::log(0.2)},
                                {std::log(0.5), std::log(0.5)}, {4.0, 7.0});
  double expected = (6.0 / 7.0) * std::log(0.8) + (1.0 / 7.0) * std::log(0.5);
  CHECK(blended[0] == Catch::Approx(expected).margin(1e-12));
  CHECK(blended[0] == Catch::Approx(-0.2903).margin(5e-5));

  CHECK_THROWS_AS(tilted_utility({-1.0}, {-1.0, -2.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("evaluate on fully symmetric inputs gives log |A|") {
  ActionPolicy uni({0.25, 0.25, 0.25, 0.25});
  for (double alpha : {0.3, 1.0, 4.0}) {
    FreeEnergyEval ev = evaluate(uni, uni, uni, {alpha, 7.0});
    CHECK(ev.free_energy == Catch::Approx(std::log(4.0)).margin(1e-12));
    CHECK(ev.partition == Catch::Approx(std::pow(4.0, -alpha)).epsilon(1e-12));
    for (int a = 0; a < 4; ++a) CHECK(ev.policy[a] == Catch::Approx(0.25).margin(1e-12));
  }
}

TEST_CASE("evaluate reproduces the direct two-action worked case") {
  ActionPolicy ts({0.8, 0.2}), pb({0.5, 0.5});
  FreeEnergyEval ev = evaluate(ts, ts, pb, {1.0, 7.0});
  CHECK(ev.partition == Catch::Approx(0.5).margin(1e-12));
  CHECK(ev.free_energy == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(ev.policy[0] == Catch::Approx(0.8).margin(1e-12));
  CHECK(ev.policy[1] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("evaluate satisfies the partition identity on random inputs") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> alpha_d(0.1, 10.0), beta_d(1.0, 10.0);
  std::uniform_int_distribution<std::size_t> n_d(2, 6);
  for (int k = 0; k < 200; ++k) {
    std::size_t n = n_d(gen);
    ActionPolicy sub = random_floored_policy(gen, n);
    ActionPolicy main = random_floored_policy(gen, n);
    ActionPolicy pb = random_floored_policy(gen, n);
    FeParams fp{alpha_d(gen), beta_d(gen)};
    FreeEnergyEval ev = evaluate(sub, main, pb, fp);

    CHECK(std::exp(-fp.alpha * ev.free_energy) == Catch::Approx(ev.partition).epsilon(1e-9));

    std::vector<double> ut = tilted_utility(utility(sub), utility(main), fp);
    double f_explicit = explicit_free_energy(ev, pb, ut, fp.alpha);
    CHECK(std::abs(f_explicit - ev.free_energy) < 1e-9);

    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      CHECK(ev.policy[a] > 0.0);  // pi_b is floored, so pi* keeps full support
      sum += ev.policy[a];
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("evaluate keeps zero behavioral entries at zero and the rest positive") {
  ActionPolicy sub = floor_policy(ActionPolicy({0.9, 0.05, 0.05, 0.0}), 1e-4);
  ActionPolicy main = floor_policy(ActionPolicy({0.1, 0.1, 0.4, 0.4}), 1e-4);
  ActionPolicy pb({0.5, 0.5, 0.0, 0.0});
  FreeEnergyEval ev = evaluate(sub, main, pb, {4.0, 7.0});
  CHECK(ev.policy[0] > 0.0);
  CHECK(ev.policy[1] > 0.0);
  CHECK(ev.policy[2] == 0.0);
  CHECK(ev.policy[3] == 0.0);
}

TEST_CASE("raising one tilted utility never lowers that action's probability") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u_d(-5.0, 0.0), bump_d(0.01, 2.0);
  for (int k = 0; k < 100; ++k) {
    std::size_t n = 2 + k % 4;
    std::vector<double> ut(n);
    for (auto& v : ut) v = u_d(gen);
    ActionPolicy pb = random_floored_policy(gen, n);
    double alpha = 0.5 + (k % 7);
    std::size_t target = k % n;

    FreeEnergyEval before = evaluate_tilted(ut, pb, alpha);
    ut[target] += bump_d(gen);
    FreeEnergyEval after = evaluate_tilted(ut, pb, alpha);
    CHECK(after.policy[target] >= before.policy[target] - 1e-12);
  }
}

TEST_CASE("evaluate_ts_behavioral matches evaluate with matched parameters") {
  std::mt19937_64 gen(123);
  std::uniform_int_distribution<std::size_t> n_d(2, 6);
  for (int k = 0; k < 200; ++k) {
    std::size_t n = n_d(gen);
    ActionPolicy sub = random_floored_policy(gen, n);
    ActionPolicy main = random_floored_policy(gen, n);
    FreeEnergyEval direct = evaluate_ts_behavioral(sub, main, 3.0);
    FreeEnergyEval ref = evaluate(sub, main, sub, {3.0, 3.0});
    CHECK(std::abs(direct.free_energy - ref.free_energy) < 1e-9);
    for (std::size_t a = 0; a < n; ++a)
      CHECK(std::abs(direct.policy[a] - ref.policy[a]) < 1e-9);
  }
}

TEST_CASE("evaluate_ts_behavioral on uniform five-action policies gives log 5") {
  ActionPolicy uni({0.2, 0.2, 0.2, 0.2, 0.2});
  FreeEnergyEval ev = evaluate_ts_behavioral(uni, uni, 3.0);
  CHECK(ev.free_energy == Catch::Approx(std::log(5.0)).margin(1e-12));
}

TEST_CASE("select_space takes the argmin with ties toward main then lowest index") {
  CHECK(select_space({1.2, 0.9, 1.5}, 0) == 1);
  CHECK(select_space({1.0, 1.0}, 0) == 0);
  CHECK(select_space({2.0, 1.0, 1.0}, 0) == 1);
  CHECK(select_space({0.5}, 0) == 0);
  CHECK_THROWS_AS(select_space({}, 0), std::invalid_argument);
  CHECK_THROWS_AS(select_space({1.0}, 3), std::invalid_argument);
}

TEST_CASE("confident disagreeing subspace loses to the main space") {
  // One-hot-after-floor Thompson policies that disagree on the argmax,
  // epsilon-greedy behavioral policies consistent with each space's belief.
  const double xi = 1e-4, eps = 0.1, alpha = 4.0, beta = 7.0;
  const int n = 4;
  ActionPolicy ts_main = floor_policy(ActionPolicy({1.0, 0.0, 0.0, 0.0}), xi);
  ActionPolicy ts_sub = floor_policy(ActionPolicy({0.0, 1.0, 0.0, 0.0}), xi);
  auto eps_greedy = [&](int g) {
    ActionPolicy p;
    p.probs.assign(n, eps / n);
    p.probs[g] += 1.0 - eps;
    return p;
  };

  FreeEnergyEval ev_main = evaluate(ts_main, ts_main, eps_greedy(0), {alpha, beta});
  FreeEnergyEval ev_sub = evaluate(ts_sub, ts_main, eps_greedy(1), {alpha, beta});
  CHECK(ev_main.free_energy < ev_sub.free_energy);

  // Closed-form partition oracle, written out per action class.
  double big = 1.0 / (1.0 + 3.0 * xi);
  double low = xi / (1.0 + 3.0 * xi);
  double z_main = 0.925 * std::pow(big, alpha) + 3.0 * 0.025 * std::pow(low, alpha);
  double z_sub = 0.925 * std::pow(big, alpha * (beta - 1.0) / beta) * std::pow(low, alpha / beta) +
                 0.025 * std::pow(low, alpha * (beta - 1.0) / beta) * std::pow(big, alpha / beta) +
                 2.0 * 0.025 * std::pow(low, alpha);
  CHECK(ev_main.free_energy == Catch::Approx(-std::log(z_main) / alpha).margin(1e-12));
  CHECK(ev_sub.free_energy == Catch::Approx(-std::log(z_sub) / alpha).margin(1e-12));
  CHECK(select_space({ev_main.free_energy, ev_sub.free_energy}, 0) == 0);
}

TEST_CASE("large alpha concentrates the optimal policy on the argmax utility") {
  std::vector<double> ut{-0.5, -0.1, -1.0, -2.0};
  ActionPolicy pb({0.7, 0.1, 0.1, 0.1});
  FreeEnergyEval ev = evaluate_tilted(ut, pb, 50.0);
  CHECK(ev.policy[1] > 0.999);
}

TEST_CASE("evaluate validates inputs") {
  ActionPolicy ok({0.5, 0.5});
  CHECK_THROWS_AS(evaluate(ok, ok, ActionPolicy({0.5, 0.4}), {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ok, ok, ok, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ok, ok, ok, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ok, ActionPolicy({1.0}), ok, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ActionPolicy({1.0, 0.0}), ok, ok, {1.0, 1.0}),
                  std::domain_error);
}
