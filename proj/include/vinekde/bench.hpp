#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vinekde/matrix.hpp"
#include "vinekde/targets.hpp"

namespace vinekde {

//! Classical multivariate product-kernel density estimator with
//! per-coordinate normal-reference bandwidths at rate n^{-1/(d+4)}.
struct MvKdeEstimate {
  Matrix sample; // rows sorted lexicographically (first coordinate is the window key)
  std::vector<double> bandwidths;

  static MvKdeEstimate fit(const Matrix& data);
  double density(std::span<const double> x) const;
  std::vector<double> density_batch(const Matrix& points) const;
};

//! Importance-sampling IAE: draws N points from the target and averages
//! |estimate/truth - 1|. Deterministic given the seed.
double iae_importance_sampling(
    const std::function<double(std::span<const double>)>& estimate,
    const ScenarioSpec& truth, std::size_t n_samples, std::uint64_t seed);

struct MoodsResult {
  double statistic{0.0};
  double p_value{1.0};
};

//! Mood's median test: 2x2 chi-square (1 df, no continuity correction) of
//! above-pooled-median counts; values equal to the median count as not-above.
MoodsResult moods_median_test(std::span<const double> a, std::span<const double> b);

//! Chi-square(1) survival function.
double chi_square1_sf(double x);

struct BenchmarkReport {
  ScenarioKind scenario{ScenarioKind::gaussian_copula};
  int d{0};
  std::size_t n{0};
  std::size_t replicates{0};
  std::size_t mc_samples{0};
  std::uint64_t seed{0};
  double tau{0.4};
  std::vector<double> iae_vine;
  std::vector<double> iae_mvkde;
  std::vector<std::uint64_t> fit_seeds;
  std::vector<std::uint64_t> eval_seeds;
  double median_iae_vine{0.0};
  double median_iae_mvkde{0.0};
  MoodsResult moods;
  double wall_clock_seconds{0.0}; // reported on stderr, not serialized

  //! Stable-key JSON; excludes wall clock so identical runs are byte-identical.
  std::string to_json() const;
};

//! Full protocol for one (scenario, d, n) cell: per replicate, draw a fresh
//! sample, fit the vine (structure selected per run) and the classical
//! estimator, and compute both IAEs on a shared fresh Monte Carlo set.
BenchmarkReport run_scenario(const ScenarioSpec& spec, std::size_t n,
                             std::size_t replicates, std::size_t mc_samples,
                             std::uint64_t seed);

} // namespace vinekde
