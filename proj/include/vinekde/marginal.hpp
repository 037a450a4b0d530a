#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vinekde {

//! Normal-reference constant C_K = [8 sqrt(pi) R(K) / (3 sigma_K^4)]^{1/5},
//! ~2.7779 for the biweight.
double normal_reference_constant();

//! Bandwidth b = C_K * scale * n^{-1/5} with scale = min(sd, IQR/1.349).
double marginal_bandwidth_from_scale(double scale, std::size_t n);
double marginal_bandwidth(std::span<const double> column);

//! Univariate kernel density / distribution estimate on a stored sample.
struct MarginalEstimate {
  std::vector<double> sample; // sorted ascending
  double bandwidth{0.0};
  double multiplier{1.0};

  //! Throws std::invalid_argument for n < 2 or a degenerate column.
  static MarginalEstimate fit(std::span<const double> column,
                              double bandwidth_multiplier = 1.0);

  //! (1/(n b)) sum K((X_i - x)/b); zero outside [min-b, max+b].
  double density(double x) const;

  //! (1/n) sum J((x - X_i)/b); nondecreasing, 0 below min-b, 1 above max+b.
  double cdf(double x) const;
};

} // namespace vinekde
