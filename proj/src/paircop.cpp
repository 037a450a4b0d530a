#include "vinekde/paircop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vinekde/numerics.hpp"

namespace vinekde {

namespace {

double window_margin(double z, double b) {
  return 1e-12 * (1.0 + std::abs(z) + b);
}

void sort_pairs(std::vector<double>& key, std::vector<double>& other) {
  const std::size_t n = key.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return other[a] < other[b];
  });
  std::vector<double> k(n), o(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = key[idx[i]];
    o[i] = other[idx[i]];
  }
  key = std::move(k);
  other = std::move(o);
}

} // namespace

PairCopulaEstimate::PairCopulaEstimate(const PairCopulaEstimate& other)
    : independence(other.independence),
      bandwidth(other.bandwidth),
      z1_by1(other.z1_by1),
      z2_by1(other.z2_by1),
      z1_by2(other.z1_by2),
      z2_by2(other.z2_by2),
      fallbacks_(other.fallbacks_.load()) {}

PairCopulaEstimate& PairCopulaEstimate::operator=(const PairCopulaEstimate& other) {
  if (this != &other) {
    independence = other.independence;
    bandwidth = other.bandwidth;
    z1_by1 = other.z1_by1;
    z2_by1 = other.z2_by1;
    z1_by2 = other.z1_by2;
    z2_by2 = other.z2_by2;
    fallbacks_.store(other.fallbacks_.load());
  }
  return *this;
}

PairCopulaEstimate::PairCopulaEstimate(PairCopulaEstimate&& other) noexcept
    : independence(other.independence),
      bandwidth(other.bandwidth),
      z1_by1(std::move(other.z1_by1)),
      z2_by1(std::move(other.z2_by1)),
      z1_by2(std::move(other.z1_by2)),
      z2_by2(std::move(other.z2_by2)),
      fallbacks_(other.fallbacks_.load()) {}

PairCopulaEstimate& PairCopulaEstimate::operator=(PairCopulaEstimate&& other) noexcept {
  independence = other.independence;
  bandwidth = other.bandwidth;
  z1_by1 = std::move(other.z1_by1);
  z2_by1 = std::move(other.z2_by1);
  z1_by2 = std::move(other.z1_by2);
  z2_by2 = std::move(other.z2_by2);
  fallbacks_.store(other.fallbacks_.load());
  return *this;
}

double copula_bandwidth(std::span<const double> z1, std::span<const double> z2) {
  if (z1.size() < 2 || z1.size() != z2.size())
    throw std::invalid_argument("copula_bandwidth: need at least 2 pairs");
  const double s = 0.5 * (sample_sd(z1) + sample_sd(z2));
  if (s <= 0.0)
    throw std::invalid_argument("copula_bandwidth: degenerate z-sample");
  // bivariate normal-reference constant for the biweight product kernel:
  // [2 R(K)^2 / (sigma_K^4 R(laplacian of the bivariate normal))]^{1/6}
  // = (100 pi)^{1/6} ~ 2.6073
  static const double kConst = std::pow(100.0 * M_PI, 1.0 / 6.0);
  return kConst * s * std::pow(static_cast<double>(z1.size()), -1.0 / 6.0);
}

PairCopulaEstimate PairCopulaEstimate::fit(std::span<const double> u,
                                           std::span<const double> v) {
  const std::size_t n = u.size();
  if (n != v.size()) throw std::invalid_argument("PairCopulaEstimate: size mismatch");
  if (n < 2) throw std::invalid_argument("PairCopulaEstimate: need at least 2 pairs");
  std::vector<double> z1(n), z2(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
      throw std::domain_error(
          "PairCopulaEstimate: pseudo-observations must lie strictly in (0,1)");
    z1[i] = normal_quantile(u[i]);
    z2[i] = normal_quantile(v[i]);
  }
  return from_z_sample(z1, z2, copula_bandwidth(z1, z2));
}

PairCopulaEstimate PairCopulaEstimate::make_independence() {
  PairCopulaEstimate p;
  p.independence = true;
  return p;
}

PairCopulaEstimate PairCopulaEstimate::from_z_sample(std::span<const double> z1,
                                                     std::span<const double> z2,
                                                     double bandwidth) {
  if (bandwidth <= 0.0)
    throw std::invalid_argument("PairCopulaEstimate: bandwidth must be positive");
  PairCopulaEstimate p;
  p.bandwidth = bandwidth;
  p.z1_by1.assign(z1.begin(), z1.end());
  p.z2_by1.assign(z2.begin(), z2.end());
  sort_pairs(p.z1_by1, p.z2_by1);
  p.z2_by2 = p.z2_by1;
  p.z1_by2 = p.z1_by1;
  sort_pairs(p.z2_by2, p.z1_by2);
  return p;
}

double PairCopulaEstimate::density(double u, double v) const {
  if (independence) return 1.0;
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::domain_error("PairCopulaEstimate::density: (u,v) must be in (0,1)^2");
  const double zu = normal_quantile(u);
  const double zv = normal_quantile(v);
  const double b = bandwidth;
  const std::size_t n = size();

  const double eps = window_margin(zu, b);
  const auto first = std::lower_bound(z1_by1.begin(), z1_by1.end(), zu - b - eps);
  const auto last = std::upper_bound(z1_by1.begin(), z1_by1.end(), zu + b + eps);
  double s = 0.0;
  for (auto it = first; it != last; ++it) {
    const std::size_t i = static_cast<std::size_t>(it - z1_by1.begin());
    s += kernel_eval((zu - z1_by1[i]) / b) * kernel_eval((zv - z2_by1[i]) / b);
  }
  return s / (static_cast<double>(n) * b * b * normal_pdf(zu) * normal_pdf(zv));
}

double PairCopulaEstimate::hfunc(double u, double v, HDir dir, HForm form) const {
  if (independence) return u;
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::domain_error("PairCopulaEstimate::hfunc: (u,v) must be in (0,1)^2");
  const double zu = normal_quantile(u);
  const double zv = normal_quantile(v);
  const double b = bandwidth;
  const std::size_t n = size();

  // the kernel acts on the conditioning coordinate, the integrated kernel on
  // the conditioned one; pick the sample ordered by the conditioning coordinate
  const std::vector<double>* zc; // conditioning (kernel) coordinate, sorted
  const std::vector<double>* zi; // conditioned (integrated kernel) coordinate
  if (dir == HDir::first_given_second) {
    zc = &z2_by2;
    zi = &z1_by2;
  } else {
    zc = &z1_by1;
    zi = &z2_by1;
  }

  const double eps = window_margin(zv, b);
  const auto first = std::lower_bound(zc->begin(), zc->end(), zv - b - eps);
  const auto last = std::upper_bound(zc->begin(), zc->end(), zv + b + eps);
  double num = 0.0, den = 0.0;
  for (auto it = first; it != last; ++it) {
    const std::size_t i = static_cast<std::size_t>(it - zc->begin());
    const double w = kernel_eval((zv - (*zc)[i]) / b);
    num += kernel_cdf((zu - (*zi)[i]) / b) * w;
    den += w;
  }

  if (form == HForm::raw_integral)
    return num / (static_cast<double>(n) * b * normal_pdf(zv));

  if (den <= 0.0) {
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    return u;
  }
  return num / den;
}

} // namespace vinekde
