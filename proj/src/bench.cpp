#include "vinekde/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vinekde/marginal.hpp"
#include "vinekde/numerics.hpp"
#include "vinekde/rng.hpp"
#include "vinekde/vinefit.hpp"

namespace vinekde {

MvKdeEstimate MvKdeEstimate::fit(const Matrix& data) {
  const std::size_t n = data.rows;
  const int d = static_cast<int>(data.cols);
  if (n < 10) throw std::invalid_argument("MvKdeEstimate: need at least 10 observations");

  MvKdeEstimate k;
  k.bandwidths.resize(d);
  const double rate = std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
  for (int l = 0; l < d; ++l) {
    const double scale = robust_scale(data.column(l));
    if (scale <= 0.0)
      throw std::invalid_argument("MvKdeEstimate: degenerate column " +
                                  std::to_string(l + 1));
    k.bandwidths[l] = normal_reference_constant() * scale * rate;
  }

  // rows sorted lexicographically; the first coordinate drives the window
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(data.row(a).begin(), data.row(a).end(),
                                        data.row(b).begin(), data.row(b).end());
  });
  k.sample = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = data.row(idx[i]);
    std::copy(r.begin(), r.end(), k.sample.row(i).begin());
  }
  return k;
}

double MvKdeEstimate::density(std::span<const double> x) const {
  const std::size_t n = sample.rows;
  const int d = static_cast<int>(sample.cols);
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("MvKdeEstimate::density: dimension mismatch");

  const double b0 = bandwidths[0];
  const double eps = 1e-12 * (1.0 + std::abs(x[0]) + b0);
  // binary search on the sorted first coordinate
  std::size_t lo = 0, hi = n;
  {
    std::size_t a = 0, b = n;
    const double key = x[0] - b0 - eps;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (sample.at(mid, 0) < key) a = mid + 1; else b = mid;
    }
    lo = a;
    a = lo; b = n;
    const double key2 = x[0] + b0 + eps;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (sample.at(mid, 0) <= key2) a = mid + 1; else b = mid;
    }
    hi = a;
  }

  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    double term = kernel_eval((x[0] - sample.at(i, 0)) / b0);
    for (int l = 1; l < d && term != 0.0; ++l)
      term *= kernel_eval((x[l] - sample.at(i, l)) / bandwidths[l]);
    s += term;
  }
  double norm = static_cast<double>(n);
  for (int l = 0; l < d; ++l) norm *= bandwidths[l];
  return s / norm;
}

std::vector<double> MvKdeEstimate::density_batch(const Matrix& points) const {
  std::vector<double> out(points.rows);
  const std::int64_t n = static_cast<std::int64_t>(points.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = density(points.row(i));
  return out;
}

double iae_importance_sampling(
    const std::function<double(std::span<const double>)>& estimate,
    const ScenarioSpec& truth, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("iae_importance_sampling: need at least 1 sample");
  const Matrix points = sample_scenario(truth, n_samples, seed);
  std::vector<double> terms(n_samples);
  const std::int64_t n = static_cast<std::int64_t>(n_samples);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto x = points.row(i);
    const double f = true_density(truth, x);
    if (!(f > 0.0))
      throw std::runtime_error("iae_importance_sampling: target density vanished");
    terms[i] = std::abs(estimate(x) / f - 1.0);
  }
  double s = 0.0;
  for (double t : terms) s += t; // fixed order, independent of thread count
  return s / static_cast<double>(n_samples);
}

double chi_square1_sf(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

MoodsResult moods_median_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("moods_median_test: need at least 2 values per group");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double med = median(pooled);

  const double a_above = static_cast<double>(
      std::count_if(a.begin(), a.end(), [&](double v) { return v > med; }));
  const double b_above = static_cast<double>(
      std::count_if(b.begin(), b.end(), [&](double v) { return v > med; }));
  const double a_not = static_cast<double>(a.size()) - a_above;
  const double b_not = static_cast<double>(b.size()) - b_above;

  const double total = a_above + b_above + a_not + b_not;
  const double row1 = a_above + b_above;
  const double row2 = a_not + b_not;
  const double col1 = a_above + a_not;
  const double col2 = b_above + b_not;
  const double denom = row1 * row2 * col1 * col2;
  MoodsResult r;
  if (denom <= 0.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double det = a_above * b_not - b_above * a_not;
  r.statistic = total * det * det / denom;
  r.p_value = chi_square1_sf(r.statistic);
  return r;
}

BenchmarkReport run_scenario(const ScenarioSpec& spec, std::size_t n,
                             std::size_t replicates, std::size_t mc_samples,
                             std::uint64_t seed) {
  if (replicates < 1)
    throw std::invalid_argument("run_scenario: need at least 1 replicate");
  const auto t0 = std::chrono::steady_clock::now();

  BenchmarkReport rep;
  rep.scenario = spec.kind;
  rep.d = spec.d;
  rep.n = n;
  rep.replicates = replicates;
  rep.mc_samples = mc_samples;
  rep.seed = seed;
  rep.tau = spec.tau;

  for (std::size_t r = 0; r < replicates; ++r) {
    const std::uint64_t fit_seed = RngStream::derive(seed, 2 * r).next_u64();
    const std::uint64_t eval_seed = RngStream::derive(seed, 2 * r + 1).next_u64();
    rep.fit_seeds.push_back(fit_seed);
    rep.eval_seeds.push_back(eval_seed);

    const Matrix data = sample_scenario(spec, n, fit_seed);
    const VineDensityModel vine = fit_vine(data, {});
    const MvKdeEstimate mvkde = MvKdeEstimate::fit(data);

    rep.iae_vine.push_back(iae_importance_sampling(
        [&](std::span<const double> x) { return vine.density(x); }, spec,
        mc_samples, eval_seed));
    rep.iae_mvkde.push_back(iae_importance_sampling(
        [&](std::span<const double> x) { return mvkde.density(x); }, spec,
        mc_samples, eval_seed));
  }

  rep.median_iae_vine = median(rep.iae_vine);
  rep.median_iae_mvkde = median(rep.iae_mvkde);
  if (replicates >= 2) {
    rep.moods = moods_median_test(rep.iae_vine, rep.iae_mvkde);
  } else {
    rep.moods = {0.0, 1.0}; // undefined on a single replicate
  }
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string BenchmarkReport::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_to_string(scenario);
  j["d"] = d;
  j["n"] = n;
  j["tau"] = tau;
  j["replicates"] = replicates;
  j["mc_samples"] = mc_samples;
  j["seed"] = seed;
  j["fit_seeds"] = fit_seeds;
  j["eval_seeds"] = eval_seeds;
  j["iae_vine"] = iae_vine;
  j["iae_mvkde"] = iae_mvkde;
  j["median_iae_vine"] = median_iae_vine;
  j["median_iae_mvkde"] = median_iae_mvkde;
  j["moods_statistic"] = moods.statistic;
  j["moods_p_value"] = moods.p_value;
  return j.dump(2) + "\n";
}

} // namespace vinekde
