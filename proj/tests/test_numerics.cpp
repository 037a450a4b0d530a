#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vinekde/numerics.hpp"
#include "vinekde/rng.hpp"

using namespace vinekde;

TEST_CASE("kernel closed-form values and support") {
  CHECK(kernel_eval(0.0) == doctest::Approx(0.9375).epsilon(1e-15));
  CHECK(kernel_eval(1.0) == 0.0);
  CHECK(kernel_eval(-1.0) == 0.0);
  CHECK(kernel_eval(1.5) == 0.0);
  CHECK(kernel_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kernel_cdf(-1.0) == 0.0);
  CHECK(kernel_cdf(1.0) == 1.0);
  CHECK(kernel_cdf(-5.0) == 0.0);
  CHECK(kernel_cdf(5.0) == 1.0);
}

TEST_CASE("kernel normalization and symmetry by quadrature") {
  const double mass = oracles::simpson([](double x) { return kernel_eval(x); },
                                       -1.0, 1.0, 2000);
  CHECK(std::abs(mass - 1.0) < 1e-8);
  for (double x = 0.0; x <= 1.0; x += 0.01)
    CHECK(kernel_eval(x) == kernel_eval(-x));
  // continuous first derivative: K'(+-1) = 0 for the biweight
  const double h = 1e-6;
  CHECK(std::abs((kernel_eval(1.0) - kernel_eval(1.0 - h)) / h) < 1e-4);
  CHECK(std::abs((kernel_eval(-1.0 + h) - kernel_eval(-1.0)) / h) < 1e-4);
}

TEST_CASE("kernel cdf is the integral of the kernel") {
  for (double x = -0.9; x <= 0.95; x += 0.15) {
    const double quad = oracles::simpson([](double s) { return kernel_eval(s); },
                                         -1.0, x, 4000);
    CHECK(kernel_cdf(x) == doctest::Approx(quad).epsilon(1e-9));
  }
  double prev = -1.0;
  for (double x = -1.2; x <= 1.2; x += 0.01) {
    CHECK(kernel_cdf(x) >= prev);
    prev = kernel_cdf(x);
  }
}

TEST_CASE("normal quantile examples") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // oracle: bisection on the series-based cdf
  const double z = oracles::normal_quantile_bisect(0.975);
  CHECK(std::abs(normal_quantile(0.975) - z) < 1e-9);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_cdf(normal_quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(-0.2), std::domain_error);
}

TEST_CASE("normal quantile round trip over a log-spaced grid") {
  for (double p = 1e-12; p < 0.5; p *= 3.7) {
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-9);
    CHECK(std::abs(normal_cdf(normal_quantile(1.0 - p)) - (1.0 - p)) < 1e-9);
  }
  for (double p = 0.05; p < 1.0; p += 0.05)
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
}

TEST_CASE("kendalls tau examples") {
  std::vector<double> x{1, 2, 3}, y{1, 2, 3};
  CHECK(kendalls_tau(x, y) == doctest::Approx(1.0));
  std::vector<double> y2{3, 2, 1};
  CHECK(kendalls_tau(x, y2) == doctest::Approx(-1.0));
  std::vector<double> y3{1, 3, 2};
  CHECK(kendalls_tau(x, y3) == doctest::Approx(1.0 / 3.0));
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(kendalls_tau(one, one), std::invalid_argument);
}

TEST_CASE("kendalls tau matches brute force exactly, with and without ties") {
  RngStream rng(1234);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 198);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse rounding produces plenty of ties in half the replicates
      if (rep % 2 == 0) {
        x[i] = std::floor(rng.uniform01() * 8);
        y[i] = std::floor(rng.uniform01() * 8);
      } else {
        x[i] = rng.normal();
        y[i] = 0.5 * x[i] + rng.normal();
      }
    }
    const double fast = kendalls_tau(x, y);
    const double slow = oracles::kendalls_tau_bruteforce(x, y);
    CHECK(fast == slow); // identical integer counts, identical arithmetic
    CHECK(fast >= -1.0);
    CHECK(fast <= 1.0);
  }
}

TEST_CASE("kendalls tau invariances") {
  RngStream rng(99);
  std::vector<double> x(60), y(60);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal() - 0.4 * x[i];
  }
  CHECK(kendalls_tau(x, y) == kendalls_tau(y, x));
  // invariant under strictly increasing transforms
  std::vector<double> xt(x.size()), yt(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xt[i] = std::exp(x[i]);
    yt[i] = y[i] * y[i] * y[i] + 2.0 * y[i];
  }
  CHECK(kendalls_tau(xt, yt) == doctest::Approx(kendalls_tau(x, y)).epsilon(1e-15));
}

TEST_CASE("pseudo observations") {
  std::vector<double> single{5.0};
  CHECK(pseudo_observations(single) == std::vector<double>{0.5});
  std::vector<double> inc{1, 2, 3};
  CHECK(pseudo_observations(inc) == std::vector<double>{0.25, 0.5, 0.75});
  std::vector<double> mixed{3, 1, 2};
  CHECK(pseudo_observations(mixed) == std::vector<double>{0.75, 0.25, 0.5});

  RngStream rng(7);
  std::vector<double> col(101);
  for (auto& v : col) v = std::floor(rng.uniform01() * 10);
  const auto p = pseudo_observations(col);
  for (std::size_t i = 0; i < col.size(); ++i) {
    CHECK(p[i] > 0.0);
    CHECK(p[i] < 1.0);
    for (std::size_t j = 0; j < col.size(); ++j) {
      if (col[i] < col[j]) CHECK(p[i] < p[j]);
      if (col[i] == col[j]) CHECK(p[i] == p[j]);
    }
  }
}

TEST_CASE("median and robust scale helpers") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  std::vector<double> heavy{0, 0, 0, 0, 1000};
  CHECK(robust_scale(heavy) <= sample_sd(heavy));
  CHECK(robust_scale(heavy) > 0.0);
}
