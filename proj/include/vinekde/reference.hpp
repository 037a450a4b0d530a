#pragma once

#include <span>

#include "vinekde/bench.hpp"
#include "vinekde/marginal.hpp"
#include "vinekde/paircop.hpp"
#include "vinekde/vinefit.hpp"

namespace vinekde::ref {

// Serial reference implementations of the evaluation kernels: plain loops
// over the full stored sample, no windowing, no threading. The production
// kernels must match these bit for bit; the kernel benchmark compares speed.

double marginal_density(const MarginalEstimate& m, double x);
double marginal_cdf(const MarginalEstimate& m, double x);

double pair_density(const PairCopulaEstimate& p, double u, double v);
double pair_hfunc(const PairCopulaEstimate& p, double u, double v, HDir dir,
                  HForm form = HForm::normalized);

double mvkde_density(const MvKdeEstimate& k, std::span<const double> x);

double vine_density(const VineDensityModel& model, std::span<const double> x);

} // namespace vinekde::ref
