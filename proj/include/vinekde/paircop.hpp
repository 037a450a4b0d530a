#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

namespace vinekde {

//! Which conditional distribution an h-function evaluates.
enum class HDir { first_given_second, second_given_first };

//! h-function variant: `normalized` divides the kernel-smoothed numerator by
//! the kernel mass at the conditioning value (a valid conditional cdf with
//! h(1|v)=1); `raw_integral` is the direct integral of the density estimate,
//! dividing by the normal density instead. The normalized form is the default
//! throughout; the raw form exists so its derivative can be checked against
//! the density estimate.
enum class HForm { normalized, raw_integral };

//! Normal-reference bandwidth on the transformed scale:
//! b = (100 pi)^{1/6} * sigma_z * n^{-1/6}, with sigma_z the mean of the two
//! coordinate standard deviations. The constant is the bivariate AMISE factor
//! for the biweight product kernel against a normal target.
double copula_bandwidth(std::span<const double> z1, std::span<const double> z2);

//! Bivariate copula density estimated on normal-transformed pseudo-observations,
//! with h-functions obtained by integrating the density estimate.
struct PairCopulaEstimate {
  bool independence{false};
  double bandwidth{0.0};
  // the same (z1, z2) sample pairs in two sort orders, for windowed sums
  std::vector<double> z1_by1, z2_by1; // sorted by (z1, z2)
  std::vector<double> z1_by2, z2_by2; // sorted by (z2, z1)

  PairCopulaEstimate() = default;
  PairCopulaEstimate(const PairCopulaEstimate& other);
  PairCopulaEstimate& operator=(const PairCopulaEstimate& other);
  PairCopulaEstimate(PairCopulaEstimate&& other) noexcept;
  PairCopulaEstimate& operator=(PairCopulaEstimate&& other) noexcept;

  //! Fit on pseudo-observation pairs; all coordinates must lie strictly in
  //! (0,1) (throws std::domain_error otherwise; callers clamp first).
  static PairCopulaEstimate fit(std::span<const double> u,
                                std::span<const double> v);

  static PairCopulaEstimate make_independence();

  //! Rebuild from raw z-pairs (deserialization path).
  static PairCopulaEstimate from_z_sample(std::span<const double> z1,
                                          std::span<const double> z2,
                                          double bandwidth);

  std::size_t size() const { return z1_by1.size(); }

  //! Copula density at (u,v) in (0,1)^2; 1 under independence.
  double density(double u, double v) const;

  //! Conditional cdf of `u` given `v`. Falls back to h(u|v)=u when the
  //! kernel mass at v vanishes; such events are counted in fallback_count.
  double hfunc(double u, double v, HDir dir,
               HForm form = HForm::normalized) const;

  std::uint64_t fallback_count() const { return fallbacks_.load(); }
  void reset_fallback_count() { fallbacks_.store(0); }

private:
  mutable std::atomic<std::uint64_t> fallbacks_{0};
};

} // namespace vinekde
