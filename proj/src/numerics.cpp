#include "vinekde/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace vinekde {

double kernel_eval(double x) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  const double t = 1.0 - x * x;
  return 0.9375 * t * t; // 15/16
}

double kernel_cdf(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // antiderivative of 15/16 (1 - s^2)^2
  return 0.5 + 0.9375 * (x - (2.0 / 3.0) * x * x * x + 0.2 * x * x * x * x * x);
}

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.39894228040143267794;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

namespace {

// Rational approximation of the normal quantile (Wichura's AS 241, PPND16),
// accurate to ~1e-15 on its own; a single Newton step against normal_cdf
// polishes the result.
double quantile_rational(double p) {
  const double q = p - 0.5;
  double r, num, den;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
              1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
            1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
              5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
            4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  const double z = num / den;
  return (q < 0.0) ? -z : z;
}

} // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");
  double z = quantile_rational(p);
  const double err = normal_cdf(z) - p;
  const double dens = normal_pdf(z);
  if (dens > 0.0) z -= err / dens;
  return z;
}

namespace {

// Inversions (strict) counted by bottom-up merge sort.
std::uint64_t merge_count(std::vector<double>& a) {
  const std::size_t n = a.size();
  std::vector<double> buf(n);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[j] < a[i]) {
          swaps += mid - i;
          buf[k++] = a[j++];
        } else {
          buf[k++] = a[i++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
      std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
    }
  }
  return swaps;
}

std::uint64_t tie_pairs_sorted(const std::vector<double>& v) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= v.size(); ++i) {
    if (i < v.size() && v[i] == v[i - 1]) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

} // namespace

double kendalls_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("kendalls_tau: size mismatch");
  if (n < 2) throw std::invalid_argument("kendalls_tau: need at least 2 pairs");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  // pairs tied in x (n1) and tied in both (n3), over runs of the (x,y) sort
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      const bool same_x = i < n && x[idx[i]] == x[idx[i - 1]];
      const bool same_xy = same_x && y[idx[i]] == y[idx[i - 1]];
      if (same_x) ++run_x;
      if (same_xy) {
        ++run_xy;
      } else {
        n3 += static_cast<std::uint64_t>(run_xy) * (run_xy - 1) / 2;
        run_xy = 1;
      }
      if (!same_x) {
        n1 += static_cast<std::uint64_t>(run_x) * (run_x - 1) / 2;
        run_x = 1;
      }
    }
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::uint64_t swaps = merge_count(ys); // ys now sorted
  const std::uint64_t n2 = tie_pairs_sorted(ys);

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (n0 == n1 || n0 == n2) return 0.0;

  const double num =
      static_cast<double>(static_cast<std::int64_t>(n0 - n1 - n2 + n3) -
                          2 * static_cast<std::int64_t>(swaps));
  const double den = std::sqrt(static_cast<double>(n0 - n1)) *
                     std::sqrt(static_cast<double>(n0 - n2));
  return std::clamp(num / den, -1.0, 1.0);
}

std::vector<double> pseudo_observations(std::span<const double> column) {
  const std::size_t n = column.size();
  if (n == 0) return {};
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && column[idx[j + 1]] == column[idx[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      out[idx[k]] = avg_rank / static_cast<double>(n + 1);
    i = j + 1;
  }
  return out;
}

double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

namespace {

// type-7 quantile (linear interpolation) on sorted data
double quantile_sorted(const std::vector<double>& s, double p) {
  const std::size_t n = s.size();
  if (n == 1) return s[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return s[n - 1];
  const double frac = h - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

} // namespace

double robust_scale(std::span<const double> x) {
  const double sd = sample_sd(x);
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  if (iqr <= 0.0) return sd;
  return std::min(sd, iqr / 1.349);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace vinekde
