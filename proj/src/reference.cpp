#include "vinekde/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vinekde/numerics.hpp"

namespace vinekde::ref {

double marginal_density(const MarginalEstimate& m, double x) {
  const double b = m.bandwidth;
  double s = 0.0;
  for (double xi : m.sample) s += kernel_eval((xi - x) / b);
  return s / (static_cast<double>(m.sample.size()) * b);
}

double marginal_cdf(const MarginalEstimate& m, double x) {
  const double b = m.bandwidth;
  double s = 0.0;
  for (double xi : m.sample) s += kernel_cdf((x - xi) / b);
  return s / static_cast<double>(m.sample.size());
}

double pair_density(const PairCopulaEstimate& p, double u, double v) {
  if (p.independence) return 1.0;
  const double zu = normal_quantile(u);
  const double zv = normal_quantile(v);
  const double b = p.bandwidth;
  const std::size_t n = p.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += kernel_eval((zu - p.z1_by1[i]) / b) * kernel_eval((zv - p.z2_by1[i]) / b);
  return s / (static_cast<double>(n) * b * b * normal_pdf(zu) * normal_pdf(zv));
}

double pair_hfunc(const PairCopulaEstimate& p, double u, double v, HDir dir,
                  HForm form) {
  if (p.independence) return u;
  const double zu = normal_quantile(u);
  const double zv = normal_quantile(v);
  const double b = p.bandwidth;
  const std::size_t n = p.size();
  const std::vector<double>* zc;
  const std::vector<double>* zi;
  if (dir == HDir::first_given_second) {
    zc = &p.z2_by2;
    zi = &p.z1_by2;
  } else {
    zc = &p.z1_by1;
    zi = &p.z2_by1;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = kernel_eval((zv - (*zc)[i]) / b);
    num += kernel_cdf((zu - (*zi)[i]) / b) * w;
    den += w;
  }
  if (form == HForm::raw_integral)
    return num / (static_cast<double>(n) * b * normal_pdf(zv));
  if (den <= 0.0) return u;
  return num / den;
}

double mvkde_density(const MvKdeEstimate& k, std::span<const double> x) {
  const std::size_t n = k.sample.rows;
  const int d = static_cast<int>(k.sample.cols);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double term = 1.0;
    for (int l = 0; l < d; ++l)
      term *= kernel_eval((x[l] - k.sample.at(i, l)) / k.bandwidths[l]);
    s += term;
  }
  double norm = static_cast<double>(n);
  for (double b : k.bandwidths) norm *= b;
  return s / norm;
}

double vine_density(const VineDensityModel& model, std::span<const double> x) {
  const int d = model.dimension();
  const double lo = model.meta.clamp_lo;
  const double hi = 1.0 - lo;

  double result = 1.0;
  bool margins_positive = true;
  std::vector<double> u(d);
  for (int l = 0; l < d; ++l) {
    const double fl = marginal_density(model.margins[l], x[l]);
    margins_positive = margins_positive && fl > 0.0;
    result *= fl;
    u[l] = std::min(std::max(marginal_cdf(model.margins[l], x[l]), lo), hi);
  }
  std::vector<std::array<double, 2>> hvals(model.pair_copulas.size());
  for (std::size_t e = 0; e < model.pair_copulas.size(); ++e) {
    auto arg = [&](const ColumnRef& ref) {
      if (ref.source == ColumnRef::Source::margin) return u[ref.index];
      return hvals[ref.index][ref.dir == HDir::first_given_second ? 0 : 1];
    };
    const double uj = arg(model.edge_inputs[e][0]);
    const double uk = arg(model.edge_inputs[e][1]);
    const auto& pc = model.pair_copulas[e];
    result *= pair_density(pc, uj, uk);
    hvals[e][0] = std::min(
        std::max(pair_hfunc(pc, uj, uk, HDir::first_given_second), lo), hi);
    hvals[e][1] = std::min(
        std::max(pair_hfunc(pc, uk, uj, HDir::second_given_first), lo), hi);
  }
  if (margins_positive && result < 1e-320) result = 1e-320;
  return result;
}

} // namespace vinekde::ref
