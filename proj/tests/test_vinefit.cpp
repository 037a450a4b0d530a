#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vinekde/rng.hpp"
#include "vinekde/targets.hpp"
#include "vinekde/vinefit.hpp"

using namespace vinekde;

namespace {

Matrix gaussian_data(int d, std::size_t n, std::uint64_t seed) {
  return sample_scenario({ScenarioKind::gaussian_copula, d, 0.4}, n, seed);
}

RVineStructure five_dim_structure() {
  auto edge = [](std::array<int, 2> c, std::vector<int> D,
                 std::array<int, 2> p = {-1, -1}) {
    VineEdge e;
    e.conditioned = c;
    e.conditioning = std::move(D);
    e.parents = p;
    return e;
  };
  RVineStructure s;
  s.d = 5;
  s.trees.resize(4);
  s.trees[0] = {edge({0, 1}, {}), edge({0, 2}, {}), edge({2, 3}, {}),
                edge({2, 4}, {})};
  s.trees[1] = {edge({1, 2}, {0}, {0, 1}), edge({0, 3}, {2}, {1, 2}),
                edge({0, 4}, {2}, {1, 3})};
  s.trees[2] = {edge({1, 3}, {0, 2}, {4, 5}), edge({3, 4}, {0, 2}, {5, 6})};
  s.trees[3] = {edge({1, 4}, {0, 2, 3}, {7, 8})};
  return s;
}

// number of h-transforms between a column and the margins it derives from
int pipeline_depth(const VineDensityModel& m, const ColumnRef& ref) {
  if (ref.source == ColumnRef::Source::margin) return 0;
  const auto& inputs = m.edge_inputs[ref.index];
  return 1 + std::max(pipeline_depth(m, inputs[0]), pipeline_depth(m, inputs[1]));
}

} // namespace

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit_vine(gaussian_data(3, 5, 1), {}), std::invalid_argument);
  Matrix one_col(50, 1);
  CHECK_THROWS_AS(fit_vine(one_col, {}), std::invalid_argument);
  Matrix degenerate(50, 2);
  RngStream rng(2);
  for (std::size_t i = 0; i < 50; ++i) {
    degenerate.at(i, 0) = rng.normal();
    degenerate.at(i, 1) = 7.0; // constant column
  }
  CHECK_THROWS_WITH_AS(fit_vine(degenerate, {}),
                       "fit_vine: degenerate column 2", std::invalid_argument);
}

TEST_CASE("two-dimensional fit has exactly one pair-copula") {
  const auto model = fit_vine(gaussian_data(2, 200, 7), {});
  CHECK(model.pair_copulas.size() == 1);
  CHECK(model.margins.size() == 2);
  CHECK(model.edge_inputs[0][0].source == ColumnRef::Source::margin);
  CHECK(model.edge_inputs[0][1].source == ColumnRef::Source::margin);
  CHECK(model.meta.clamp_lo == doctest::Approx(1.0 / 201.0).epsilon(1e-15));
}

TEST_CASE("five-dimensional fit on the fixed reference structure") {
  const auto s = five_dim_structure();
  VineFitOptions opts;
  opts.structure = &s;
  const auto model = fit_vine(gaussian_data(5, 400, 9), opts);
  CHECK(model.pair_copulas.size() == 10);
  // the last-tree edge consumes columns three h-transforms deep
  CHECK(pipeline_depth(model, model.edge_inputs[9][0]) == 3);
  CHECK(pipeline_depth(model, model.edge_inputs[9][1]) == 3);
  // factor count d + d(d-1)/2
  CHECK(model.margins.size() + model.pair_copulas.size() == 15);
}

TEST_CASE("independence test flags independent uniforms") {
  RngStream rng(20260101);
  int flagged = 0;
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    Matrix data(2000, 3);
    for (std::size_t i = 0; i < data.rows; ++i)
      for (std::size_t j = 0; j < 3; ++j) data.at(i, j) = rng.normal();
    VineFitOptions opts;
    opts.independence_test = true;
    const auto model = fit_vine(data, opts);
    for (const auto& pc : model.pair_copulas) flagged += pc.independence ? 1 : 0;
  }
  // 9 edges over three seeds at level 0.05: expect nearly all flagged
  CHECK(flagged >= 6);
}

TEST_CASE("density composes the fitted factors exactly") {
  // path structure 0-1-2: hand-compose the factor product
  RVineStructure s;
  s.d = 3;
  s.trees.resize(2);
  VineEdge e01, e12, e02;
  e01.conditioned = {0, 1};
  e12.conditioned = {1, 2};
  e02.conditioned = {0, 2};
  e02.conditioning = {1};
  e02.parents = {0, 1};
  s.trees[0] = {e01, e12};
  s.trees[1] = {e02};

  VineFitOptions opts;
  opts.structure = &s;
  const Matrix data = gaussian_data(3, 300, 21);
  const auto model = fit_vine(data, opts);

  const double lo = model.meta.clamp_lo;
  const double hi = 1.0 - lo;
  auto clamp = [&](double x) { return std::min(std::max(x, lo), hi); };

  std::vector<double> x{0.4, -0.2, 0.9};
  const double u0 = clamp(model.margins[0].cdf(x[0]));
  const double u1 = clamp(model.margins[1].cdf(x[1]));
  const double u2 = clamp(model.margins[2].cdf(x[2]));
  const double h0 = clamp(model.pair_copulas[0].hfunc(u0, u1, HDir::first_given_second));
  const double h1 = clamp(model.pair_copulas[1].hfunc(u2, u1, HDir::second_given_first));
  const double expected = model.margins[0].density(x[0]) *
                          model.margins[1].density(x[1]) *
                          model.margins[2].density(x[2]) *
                          model.pair_copulas[0].density(u0, u1) *
                          model.pair_copulas[1].density(u1, u2) *
                          model.pair_copulas[2].density(h0, h1);
  CHECK(model.density(x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("independence-only model multiplies the margins") {
  RngStream rng(4);
  Matrix data(1500, 3);
  for (std::size_t i = 0; i < data.rows; ++i)
    for (std::size_t j = 0; j < 3; ++j) data.at(i, j) = rng.normal();
  VineFitOptions opts;
  opts.independence_test = true;
  const auto model = fit_vine(data, opts);
  bool all_indep = true;
  for (const auto& pc : model.pair_copulas) all_indep &= pc.independence;
  if (all_indep) {
    std::vector<double> x{0.2, -0.4, 1.0};
    const double expected = model.margins[0].density(x[0]) *
                            model.margins[1].density(x[1]) *
                            model.margins[2].density(x[2]);
    CHECK(model.density(x) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("importance-sampling mass is close to one") {
  const ScenarioSpec spec{ScenarioKind::gaussian_copula, 3, 0.4};
  const Matrix data = sample_scenario(spec, 1000, 77);
  const auto model = fit_vine(data, {});
  const Matrix fresh = sample_scenario(spec, 2000, 78);
  double mass = 0.0;
  for (std::size_t i = 0; i < fresh.rows; ++i)
    mass += model.density(fresh.row(i)) / true_density(spec, fresh.row(i));
  mass /= static_cast<double>(fresh.rows);
  CHECK(std::abs(mass - 1.0) < 0.05);
}

TEST_CASE("relabeling the two columns leaves the joint density unchanged") {
  const Matrix data = gaussian_data(2, 400, 31);
  Matrix swapped(data.rows, 2);
  for (std::size_t i = 0; i < data.rows; ++i) {
    swapped.at(i, 0) = data.at(i, 1);
    swapped.at(i, 1) = data.at(i, 0);
  }
  const auto m0 = fit_vine(data, {});
  const auto m1 = fit_vine(swapped, {});
  for (double a = -1.5; a <= 1.6; a += 0.7) {
    for (double b = -1.5; b <= 1.6; b += 0.7) {
      std::vector<double> x{a, b}, y{b, a};
      CHECK(m0.density(x) == doctest::Approx(m1.density(y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("density positivity and zero outside marginal support") {
  const auto model = fit_vine(gaussian_data(3, 400, 3), {});
  RngStream rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x{3.0 * rng.normal(), 3.0 * rng.normal(), 3.0 * rng.normal()};
    const double f = model.density(x);
    bool margins_positive = true;
    for (int l = 0; l < 3; ++l)
      margins_positive &= model.margins[l].density(x[l]) > 0.0;
    if (margins_positive) {
      CHECK(f > 0.0);
    } else {
      CHECK(f == 0.0);
    }
  }
}

TEST_CASE("serialize round trip reproduces densities bit for bit") {
  const auto model = fit_vine(gaussian_data(3, 250, 41), {});
  const std::string bytes = model.serialize();
  const auto loaded = VineDensityModel::deserialize(bytes);
  RngStream rng(17);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x{2.0 * rng.normal(), 2.0 * rng.normal(), 2.0 * rng.normal()};
    CHECK(model.density(x) == loaded.density(x));
  }
  // serialization is stable
  CHECK(loaded.serialize() == bytes);
}

TEST_CASE("deserialize rejects malformed input") {
  const auto model = fit_vine(gaussian_data(2, 100, 5), {});
  const std::string bytes = model.serialize();

  CHECK_THROWS_AS(VineDensityModel::deserialize(bytes.substr(0, bytes.size() / 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(VineDensityModel::deserialize("{}"), std::invalid_argument);

  // bandwidth <= 0 must be rejected
  std::string bad = bytes;
  const auto pos = bad.find("\"bandwidth\":", bad.find("pair_copulas"));
  REQUIRE(pos != std::string::npos);
  const auto end = bad.find_first_of(",}", pos + 12);
  bad.replace(pos + 12, end - pos - 12, "-1.0");
  CHECK_THROWS_AS(VineDensityModel::deserialize(bad), std::invalid_argument);

  // non-finite values must be rejected
  std::string inf = bytes;
  const auto zpos = inf.find("\"z_sample\":[[");
  REQUIRE(zpos != std::string::npos);
  const auto comma = inf.find(',', zpos + 13);
  inf.replace(zpos + 13, comma - zpos - 13, "1e999");
  CHECK_THROWS_AS(VineDensityModel::deserialize(inf), std::invalid_argument);
}

TEST_CASE("convergence trend: more data, lower error") {
  const ScenarioSpec spec{ScenarioKind::gaussian_copula, 3, 0.4};
  std::vector<double> iae_small, iae_large;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const std::uint64_t fit_seed = RngStream::derive(505, 2 * r).next_u64();
    const std::uint64_t eval_seed = RngStream::derive(505, 2 * r + 1).next_u64();
    for (auto [n, dest] : {std::pair{std::size_t{500}, &iae_small},
                           std::pair{std::size_t{2000}, &iae_large}}) {
      const auto model = fit_vine(sample_scenario(spec, n, fit_seed), {});
      const Matrix pts = sample_scenario(spec, 1000, eval_seed);
      double iae = 0.0;
      for (std::size_t i = 0; i < pts.rows; ++i)
        iae += std::abs(model.density(pts.row(i)) / true_density(spec, pts.row(i)) - 1.0);
      dest->push_back(iae / static_cast<double>(pts.rows));
    }
  }
  CHECK(median(iae_large) < median(iae_small));
}
