#pragma once

#include <span>
#include <vector>

namespace vinekde {

// Biweight kernel K(x) = 15/16 (1 - x^2)^2 on [-1,1]. Chosen over
// Epanechnikov because K'(+-1) = 0, so the first derivative is continuous.
double kernel_eval(double x);

//! Integrated kernel: exactly 0 for x <= -1 and 1 for x >= 1.
double kernel_cdf(double x);

inline constexpr double kKernelL2 = 5.0 / 7.0;       // integral of K^2
inline constexpr double kKernelVariance = 1.0 / 7.0; // integral of x^2 K(x)

double normal_pdf(double x);
double normal_cdf(double x);

//! Standard normal quantile, |abs err| < 1e-9 on (0,1).
//! Throws std::domain_error for p outside (0,1).
double normal_quantile(double p);

//! Kendall's tau-b (tie corrected), O(n log n) merge-sort counting.
//! Throws std::invalid_argument for n < 2. Returns 0 when one coordinate is
//! entirely tied (no concordance information).
double kendalls_tau(std::span<const double> x, std::span<const double> y);

//! Rank-based pseudo-observations rank/(n+1), average ranks for ties.
std::vector<double> pseudo_observations(std::span<const double> column);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);

//! Robust scale: min(sd, IQR/1.349); falls back to sd when the IQR is zero.
double robust_scale(std::span<const double> x);

double median(std::vector<double> values);

} // namespace vinekde
