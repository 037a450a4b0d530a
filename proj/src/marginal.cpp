#include "vinekde/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vinekde/numerics.hpp"

namespace vinekde {

namespace {
// [8 sqrt(pi) R(K) / (3 sigma_K^4)]^{1/5} for the biweight kernel
const double kBandwidthConst =
    std::pow(8.0 * std::sqrt(M_PI) * kKernelL2 /
                 (3.0 * kKernelVariance * kKernelVariance),
             0.2);

// Search window slightly wider than the kernel support so that no term with a
// nonzero kernel value is ever skipped; the extra terms are exactly zero, so
// windowed sums match a full-sample loop bit for bit.
double window_margin(double x, double b) {
  return 1e-12 * (1.0 + std::abs(x) + b);
}
} // namespace

double normal_reference_constant() { return kBandwidthConst; }

double marginal_bandwidth_from_scale(double scale, std::size_t n) {
  if (scale <= 0.0)
    throw std::invalid_argument("marginal_bandwidth: degenerate data (zero scale)");
  return kBandwidthConst * scale * std::pow(static_cast<double>(n), -0.2);
}

double marginal_bandwidth(std::span<const double> column) {
  if (column.size() < 2)
    throw std::invalid_argument("marginal_bandwidth: need at least 2 observations");
  return marginal_bandwidth_from_scale(robust_scale(column), column.size());
}

MarginalEstimate MarginalEstimate::fit(std::span<const double> column,
                                       double bandwidth_multiplier) {
  if (bandwidth_multiplier <= 0.0)
    throw std::invalid_argument("MarginalEstimate: multiplier must be positive");
  MarginalEstimate m;
  m.bandwidth = marginal_bandwidth(column) * bandwidth_multiplier;
  m.multiplier = bandwidth_multiplier;
  m.sample.assign(column.begin(), column.end());
  std::sort(m.sample.begin(), m.sample.end());
  return m;
}

double MarginalEstimate::density(double x) const {
  const double b = bandwidth;
  const double eps = window_margin(x, b);
  const auto lo = std::lower_bound(sample.begin(), sample.end(), x - b - eps);
  const auto hi = std::upper_bound(sample.begin(), sample.end(), x + b + eps);
  double s = 0.0;
  for (auto it = lo; it != hi; ++it) s += kernel_eval((*it - x) / b);
  return s / (static_cast<double>(sample.size()) * b);
}

double MarginalEstimate::cdf(double x) const {
  const double b = bandwidth;
  const double eps = window_margin(x, b);
  // observations below the window contribute exactly 1, above exactly 0
  const auto lo = std::lower_bound(sample.begin(), sample.end(), x - b - eps);
  const auto hi = std::upper_bound(sample.begin(), sample.end(), x + b + eps);
  double s = static_cast<double>(lo - sample.begin());
  for (auto it = lo; it != hi; ++it) s += kernel_cdf((x - *it) / b);
  return s / static_cast<double>(sample.size());
}

} // namespace vinekde
