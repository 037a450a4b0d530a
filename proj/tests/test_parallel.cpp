#include <doctest.h>

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vinekde/bench.hpp"
#include "vinekde/reference.hpp"
#include "vinekde/rng.hpp"
#include "vinekde/targets.hpp"
#include "vinekde/vinefit.hpp"

using namespace vinekde;

// The windowed, OpenMP-parallel kernels and the serial full-sample reference
// implementations must agree bit for bit: skipped terms are exactly zero and
// the summation order over the stored sample is identical.

TEST_CASE("marginal kernels match the serial reference exactly") {
  RngStream rng(101);
  std::vector<double> col(3000);
  for (auto& v : col) v = rng.normal() * 1.7 + 0.3;
  const auto m = MarginalEstimate::fit(col);
  for (int i = 0; i < 2000; ++i) {
    const double x = -8.0 + 16.0 * rng.uniform01();
    CHECK(m.density(x) == ref::marginal_density(m, x));
    CHECK(m.cdf(x) == ref::marginal_cdf(m, x));
  }
}

TEST_CASE("pair-copula kernels match the serial reference exactly") {
  const ScenarioSpec spec{ScenarioKind::gaussian_copula, 2, 0.4};
  const Matrix data = sample_scenario(spec, 2500, 55);
  const auto u = pseudo_observations(data.column(0));
  const auto v = pseudo_observations(data.column(1));
  const auto pc = PairCopulaEstimate::fit(u, v);
  RngStream rng(7);
  for (int i = 0; i < 1500; ++i) {
    const double uu = rng.uniform01();
    const double vv = rng.uniform01();
    CHECK(pc.density(uu, vv) == ref::pair_density(pc, uu, vv));
    CHECK(pc.hfunc(uu, vv, HDir::first_given_second) ==
          ref::pair_hfunc(pc, uu, vv, HDir::first_given_second));
    CHECK(pc.hfunc(uu, vv, HDir::second_given_first) ==
          ref::pair_hfunc(pc, uu, vv, HDir::second_given_first));
    CHECK(pc.hfunc(uu, vv, HDir::first_given_second, HForm::raw_integral) ==
          ref::pair_hfunc(pc, uu, vv, HDir::first_given_second, HForm::raw_integral));
  }
}

TEST_CASE("mvkde matches the serial reference exactly") {
  const ScenarioSpec spec{ScenarioKind::gaussian_copula, 3, 0.4};
  const Matrix data = sample_scenario(spec, 1500, 77);
  const auto k = MvKdeEstimate::fit(data);
  const Matrix pts = sample_scenario(spec, 800, 78);
  const auto fast = k.density_batch(pts);
  for (std::size_t i = 0; i < pts.rows; ++i)
    CHECK(fast[i] == ref::mvkde_density(k, pts.row(i)));
}

TEST_CASE("vine density matches the serial reference exactly") {
  const ScenarioSpec spec{ScenarioKind::gaussian_copula, 4, 0.4};
  const Matrix data = sample_scenario(spec, 800, 99);
  const auto model = fit_vine(data, {});
  const Matrix pts = sample_scenario(spec, 500, 100);
  const auto fast = model.density_batch(pts);
  for (std::size_t i = 0; i < pts.rows; ++i)
    CHECK(fast[i] == ref::vine_density(model, pts.row(i)));
}

#ifdef _OPENMP
TEST_CASE("results are identical at any thread count") {
  const ScenarioSpec spec{ScenarioKind::gaussian_copula, 3, 0.4};
  const Matrix data = sample_scenario(spec, 600, 123);
  const Matrix pts = sample_scenario(spec, 400, 124);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto model1 = fit_vine(data, {});
  const auto dens1 = model1.density_batch(pts);
  const std::string ser1 = model1.serialize();
  const double iae1 = iae_importance_sampling(
      [&](std::span<const double> x) { return model1.density(x); }, spec, 300, 5);

  omp_set_num_threads(4);
  const auto model4 = fit_vine(data, {});
  const auto dens4 = model4.density_batch(pts);
  const std::string ser4 = model4.serialize();
  const double iae4 = iae_importance_sampling(
      [&](std::span<const double> x) { return model4.density(x); }, spec, 300, 5);
  omp_set_num_threads(saved);

  CHECK(ser1 == ser4);
  CHECK(iae1 == iae4);
  REQUIRE(dens1.size() == dens4.size());
  for (std::size_t i = 0; i < dens1.size(); ++i) CHECK(dens1[i] == dens4[i]);
}
#endif
