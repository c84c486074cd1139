#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fets/stats.hpp"

using namespace fets;

TEST_CASE("normal_cdf hits tabulated points") {
  CHECK(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(normal_cdf(1.0) == Catch::Approx(0.841344746069).margin(1e-9));
  CHECK(normal_cdf(-1.0) == Catch::Approx(0.158655253931).margin(1e-9));
  CHECK(normal_cdf(1.959963984540) == Catch::Approx(0.975).margin(1e-9));
  CHECK(normal_cdf(8.0) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("normal_quantile inverts normal_cdf") {
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.95996398454).margin(1e-8));
  CHECK(normal_quantile(0.841344746069) == Catch::Approx(1.0).margin(1e-8));
  for (double p : {0.001, 0.01, 0.1, 0.3, 0.7, 0.9, 0.99, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == Catch::Approx(p).margin(1e-10));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("incomplete_beta agrees with closed forms") {
  // I_x(1, b) = 1 - (1-x)^b and I_x(a, 1) = x^a.
  for (double x : {0.1, 0.5, 0.9}) {
    CHECK(incomplete_beta(1.0, 3.0, x) ==
          Catch::Approx(1.0 - std::pow(1.0 - x, 3.0)).epsilon(1e-12));
    CHECK(incomplete_beta(2.5, 1.0, x) == Catch::Approx(std::pow(x, 2.5)).epsilon(1e-12));
  }
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  CHECK(incomplete_beta(3.0, 5.0, 0.3) ==
        Catch::Approx(1.0 - incomplete_beta(5.0, 3.0, 0.7)).margin(1e-12));
  CHECK(incomplete_beta(2.0, 2.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 2.0, 1.0) == 1.0);
}

TEST_CASE("student_t_cdf matches known reference points") {
  // df = 1 is Cauchy: CDF(t) = 1/2 + atan(t)/pi.
  for (double t : {-3.0, -0.5, 0.0, 1.0, 12.0}) {
    CHECK(student_t_cdf(t, 1.0) ==
          Catch::Approx(0.5 + std::atan(t) / M_PI).margin(1e-12));
  }
  // df = 2 closed form: 1/2 + t / (2 sqrt(2 + t^2)).
  for (double t : {-2.0, 0.3, 4.0}) {
    CHECK(student_t_cdf(t, 2.0) ==
          Catch::Approx(0.5 + t / (2.0 * std::sqrt(2.0 + t * t))).margin(1e-12));
  }
  CHECK(student_t_cdf(0.0, 7.0) == Catch::Approx(0.5).margin(1e-15));
  // Large df approaches the normal CDF.
  CHECK(student_t_cdf(1.0, 1e6) == Catch::Approx(normal_cdf(1.0)).margin(1e-6));
}

TEST_CASE("student_t_quantile matches published two-sided 95% critical values") {
  // Rows: degrees of freedom, t such that P(|T| <= t) = 0.95.
  const std::vector<std::pair<double, double>> table = {
      {1, 12.7062047364},  {2, 4.30265272991}, {3, 3.18244630528},
      {4, 2.77644510520},  {5, 2.57058183661}, {10, 2.22813885196},
      {20, 2.08596344727}, {30, 2.04227245630}, {100, 1.98397151845},
      {1000, 1.96233908352}};
  for (auto [df, expected] : table) {
    double got = student_t_quantile(0.975, df);
    CHECK(std::abs(got - expected) / expected < 1e-3);
    // The implementation should really be much sharper than the contract.
    CHECK(std::abs(got - expected) / expected < 1e-8);
  }
}

TEST_CASE("student_t_quantile is symmetric and monotone") {
  for (double df : {1.0, 2.0, 4.0, 9.0, 30.0}) {
    CHECK(student_t_quantile(0.5, df) == Catch::Approx(0.0).margin(1e-9));
    for (double p : {0.6, 0.75, 0.9, 0.99}) {
      CHECK(student_t_quantile(p, df) ==
            Catch::Approx(-student_t_quantile(1.0 - p, df)).margin(1e-9));
    }
    double prev = student_t_quantile(0.55, df);
    for (double p : {0.65, 0.75, 0.85, 0.95, 0.995}) {
      double cur = student_t_quantile(p, df);
      CHECK(cur > prev);
      prev = cur;
    }
  }
  // Fatter tails at lower df.
  CHECK(student_t_quantile(0.975, 1.0) > student_t_quantile(0.975, 2.0));
  CHECK(student_t_quantile(0.975, 2.0) > student_t_quantile(0.975, 10.0));
  CHECK(student_t_quantile(0.975, 10.0) > normal_quantile(0.975));
}

TEST_CASE("student_t_quantile round-trips through student_t_cdf") {
  for (double df : {1.0, 2.0, 3.0, 7.0, 25.0, 200.0}) {
    for (double p : {0.05, 0.2, 0.5, 0.8, 0.975, 0.999}) {
      double t = student_t_quantile(p, df);
      CHECK(student_t_cdf(t, df) == Catch::Approx(p).margin(1e-10));
    }
  }
  CHECK_THROWS_AS(student_t_quantile(0.0, 5.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(1.0, 5.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(0.5, 0.0), std::domain_error);
}
