#include "vinekde/targets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vinekde/numerics.hpp"
#include "vinekde/rng.hpp"

namespace vinekde {

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "gauss" || name == "gaussian") return ScenarioKind::gaussian_copula;
  if (name == "gumbel") return ScenarioKind::gumbel_copula;
  if (name == "nonsimplified") return ScenarioKind::nonsimplified_gaussian_vine;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::string scenario_to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::gaussian_copula: return "gauss";
    case ScenarioKind::gumbel_copula: return "gumbel";
    case ScenarioKind::nonsimplified_gaussian_vine: return "nonsimplified";
  }
  return "?";
}

double tau_to_param(ScenarioKind kind, double tau) {
  switch (kind) {
    case ScenarioKind::gaussian_copula:
    case ScenarioKind::nonsimplified_gaussian_vine:
      if (!(tau > -1.0 && tau < 1.0))
        throw std::domain_error("tau_to_param: gaussian tau must be in (-1,1)");
      return std::sin(M_PI * tau / 2.0);
    case ScenarioKind::gumbel_copula:
      if (!(tau >= 0.0 && tau < 1.0))
        throw std::domain_error("tau_to_param: gumbel tau must be in [0,1)");
      return 1.0 / (1.0 - tau);
  }
  throw std::domain_error("tau_to_param: unknown kind");
}

double gaussian_copula_density2(double u, double v, double rho) {
  const double z1 = normal_quantile(u);
  const double z2 = normal_quantile(v);
  const double r2 = 1.0 - rho * rho;
  return std::exp(-(rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) /
                  (2.0 * r2)) /
         std::sqrt(r2);
}

double gaussian_hfunc(double u, double v, double rho) {
  const double z1 = normal_quantile(u);
  const double z2 = normal_quantile(v);
  return normal_cdf((z1 - rho * z2) / std::sqrt(1.0 - rho * rho));
}

double gaussian_hfunc_inverse(double p, double v, double rho) {
  const double zp = normal_quantile(p);
  const double z2 = normal_quantile(v);
  return normal_cdf(zp * std::sqrt(1.0 - rho * rho) + rho * z2);
}

double gumbel_generator_deriv(double t, int d, double theta) {
  if (d < 1) throw std::invalid_argument("gumbel_generator_deriv: d must be >= 1");
  if (!(t > 0.0)) throw std::domain_error("gumbel_generator_deriv: t must be > 0");
  const double alpha = 1.0 / theta;
  // derivative of exp(-t^alpha) in the form psi(t) t^{alpha-d} P_d(t^alpha),
  // with P_{m+1}(x) = (alpha - m) P_m(x) + alpha x (P_m'(x) - P_m(x))
  std::vector<double> poly{-alpha};
  for (int m = 1; m < d; ++m) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += (alpha - m) * poly[k];
      if (k >= 1) next[k] += alpha * static_cast<double>(k) * poly[k];
      next[k + 1] -= alpha * poly[k];
    }
    poly = std::move(next);
  }
  const double x = std::pow(t, alpha);
  double val = 0.0;
  for (std::size_t k = poly.size(); k-- > 0;) val = val * x + poly[k];
  return std::exp(-x) * std::pow(t, alpha - d) * val;
}

double nonsimplified_edge_rho(std::span<const double> conditioning_values) {
  if (conditioning_values.empty()) return 0.0;
  double s = 0.0;
  for (double u : conditioning_values) s += u;
  return 1.0 - 2.0 / static_cast<double>(conditioning_values.size()) * s;
}

namespace {

constexpr double kBoundaryClamp = 1e-15;

double clamp_u(double u, bool* flagged) {
  if (u < kBoundaryClamp || u > 1.0 - kBoundaryClamp) {
    if (flagged) *flagged = true;
    return std::min(std::max(u, kBoundaryClamp), 1.0 - kBoundaryClamp);
  }
  return u;
}

// equicorrelation matrix (1-rho) I + rho 11^T: closed-form inverse and det
struct Equicorrelation {
  int d;
  double rho;
  double inv_diag;    // a in R^{-1} = a I + b 11^T
  double inv_offdiag; // b
  double logdet;

  Equicorrelation(int dim, double r) : d(dim), rho(r) {
    const double one_minus = 1.0 - rho;
    const double trace_term = 1.0 + (d - 1) * rho;
    if (!(one_minus > 0.0) || !(trace_term > 0.0))
      throw std::domain_error("equicorrelation matrix is not positive definite");
    inv_diag = (1.0 + (d - 2) * rho) / (one_minus * trace_term);
    inv_offdiag = -rho / (one_minus * trace_term);
    logdet = (d - 1) * std::log(one_minus) + std::log(trace_term);
  }

  // z^T (R^{-1} - I) z
  double quad_minus_identity(std::span<const double> z) const {
    double sum = 0.0, sumsq = 0.0;
    for (double v : z) {
      sum += v;
      sumsq += v * v;
    }
    return (inv_diag - 1.0) * sumsq + inv_offdiag * (sum * sum - sumsq);
  }
};

double gaussian_scenario_density(int d, double rho, std::span<const double> x) {
  const Equicorrelation R(d, rho);
  std::vector<double> z(x.begin(), x.end()); // margins are standard normal
  double copula = std::exp(-0.5 * R.quad_minus_identity(z) - 0.5 * R.logdet);
  double margins = 1.0;
  for (double v : z) margins *= normal_pdf(v);
  return copula * margins;
}

double gumbel_scenario_density(int d, double theta, std::span<const double> x,
                               bool* flagged) {
  double margins = 1.0;
  for (double v : x) margins *= normal_pdf(v);
  if (theta == 1.0) return margins; // independence
  double t = 0.0;
  double jac = 1.0; // product of |d/du psi^{-1}(u)| = theta (-ln u)^{theta-1} / u
  for (double v : x) {
    const double u = clamp_u(normal_cdf(v), flagged);
    const double nl = -std::log(u);
    t += std::pow(nl, theta);
    jac *= theta * std::pow(nl, theta - 1.0) / u;
  }
  const double deriv = gumbel_generator_deriv(t, d, theta);
  const double sign = (d % 2 == 0) ? 1.0 : -1.0;
  return sign * deriv * jac * margins;
}

// Conditional cdfs through the non-simplified Gaussian path vine
// (variables in path order 1-2-...-d, local correlation on each edge).
//
// cond_left[j][b]  = cdf of u_j given u_{j+1..b}
// cond_right[j][a] = cdf of u_j given u_{a..j-1}
struct PathVineConditionals {
  int d;
  std::vector<std::vector<double>> left, right;

  // edge (a, b | a+1..b-1): correlation from the conditioning values
  static double edge_rho(std::span<const double> u, int a, int b) {
    if (b - a <= 1) return 0.0; // first tree
    return nonsimplified_edge_rho(u.subspan(a + 1, b - a - 1));
  }

  explicit PathVineConditionals(std::span<const double> u)
      : d(static_cast<int>(u.size())),
        left(d, std::vector<double>(d, 0.0)),
        right(d, std::vector<double>(d, 0.0)) {
    // widen the conditioning range one variable at a time
    for (int j = 0; j < d; ++j) {
      if (j + 1 < d) left[j][j + 1] = u[j]; // given {j+1}: tree-1 edge, rho = 0
      if (j - 1 >= 0) right[j][j - 1] = u[j];
    }
    for (int len = 2; len < d; ++len) {
      for (int j = 0; j + len < d; ++j) {
        const int b = j + len; // conditioning {j+1..b}
        const double rho = edge_rho(u, j, b);
        left[j][b] = std::clamp(
            gaussian_hfunc(left[j][b - 1], right[b][j + 1], rho), 1e-15, 1.0 - 1e-15);
      }
      for (int j = len; j < d; ++j) {
        const int a = j - len; // conditioning {a..j-1}
        const double rho = edge_rho(u, a, j);
        right[j][a] = std::clamp(
            gaussian_hfunc(right[j][a + 1], left[a][j - 1], rho), 1e-15, 1.0 - 1e-15);
      }
    }
  }

  double left_cond(int j, int b) const { return b == j ? 0.0 : left[j][b]; }
};

double nonsimplified_scenario_density(int d, std::span<const double> x,
                                      bool* flagged) {
  std::vector<double> u(d);
  double margins = 1.0;
  for (int j = 0; j < d; ++j) {
    margins *= normal_pdf(x[j]);
    u[j] = clamp_u(normal_cdf(x[j]), flagged);
  }
  const PathVineConditionals cond(u);
  double copula = 1.0;
  for (int m = 2; m < d; ++m) { // tree-1 pairs are independent by construction
    for (int j = 0; j + m < d; ++j) {
      const int b = j + m;
      const double rho = PathVineConditionals::edge_rho(u, j, b);
      copula *= gaussian_copula_density2(cond.left[j][b - 1], cond.right[b][j + 1], rho);
    }
  }
  return copula * margins;
}

} // namespace

double true_density(const ScenarioSpec& spec, std::span<const double> x,
                    bool* boundary_flagged) {
  if (static_cast<int>(x.size()) != spec.d)
    throw std::invalid_argument("true_density: dimension mismatch");
  if (boundary_flagged) *boundary_flagged = false;
  switch (spec.kind) {
    case ScenarioKind::gaussian_copula:
      return gaussian_scenario_density(spec.d, tau_to_param(spec.kind, spec.tau), x);
    case ScenarioKind::gumbel_copula:
      return gumbel_scenario_density(spec.d, tau_to_param(spec.kind, spec.tau), x,
                                     boundary_flagged);
    case ScenarioKind::nonsimplified_gaussian_vine:
      return nonsimplified_scenario_density(spec.d, x, boundary_flagged);
  }
  throw std::invalid_argument("true_density: unknown scenario");
}

namespace {

// lower Cholesky factor of the equicorrelation matrix
std::vector<double> cholesky_equicorrelation(int d, double rho) {
  std::vector<double> L(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> A(static_cast<std::size_t>(d) * d, rho);
  for (int i = 0; i < d; ++i) A[i * d + i] = 1.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[i * d + j];
      for (int k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
      if (i == j) {
        if (s <= 0.0) throw std::domain_error("equicorrelation: not positive definite");
        L[i * d + i] = std::sqrt(s);
      } else {
        L[i * d + j] = s / L[j * d + j];
      }
    }
  }
  return L;
}

// positive stable with Laplace transform exp(-s^alpha), alpha in (0,1)
double sample_positive_stable(double alpha, RngStream& rng) {
  const double theta = M_PI * rng.uniform01();
  const double w = rng.exponential();
  const double a = std::pow(std::sin(alpha * theta), alpha) *
                   std::pow(std::sin((1.0 - alpha) * theta), 1.0 - alpha) /
                   std::sin(theta);
  return std::pow(std::pow(a, 1.0 / (1.0 - alpha)) / w, (1.0 - alpha) / alpha);
}

} // namespace

Matrix sample_scenario(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_scenario: n must be >= 1");
  const int d = spec.d;
  if (d < 2) throw std::invalid_argument("sample_scenario: d must be >= 2");
  Matrix out(n, d);
  RngStream rng(seed);

  switch (spec.kind) {
    case ScenarioKind::gaussian_copula: {
      const double rho = tau_to_param(spec.kind, spec.tau);
      const auto L = cholesky_equicorrelation(d, rho);
      std::vector<double> z(d);
      for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        for (int r = d - 1; r >= 0; --r) {
          double s = 0.0;
          for (int k = 0; k <= r; ++k) s += L[r * d + k] * z[k];
          out.at(i, r) = s;
        }
      }
      break;
    }
    case ScenarioKind::gumbel_copula: {
      const double theta = tau_to_param(spec.kind, spec.tau);
      const double alpha = 1.0 / theta;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = (theta == 1.0) ? 1.0 : sample_positive_stable(alpha, rng);
        for (int j = 0; j < d; ++j) {
          const double e = rng.exponential();
          const double u = std::exp(-std::pow(e / v, alpha));
          out.at(i, j) = normal_quantile(
              std::min(std::max(u, kBoundaryClamp), 1.0 - kBoundaryClamp));
        }
      }
      break;
    }
    case ScenarioKind::nonsimplified_gaussian_vine: {
      std::vector<double> u(d), w(d);
      for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) w[j] = rng.uniform01();
        u[0] = w[0];
        for (int j = 1; j < d; ++j) {
          // invert the conditional cdf of u_j given u_0..u_{j-1}, walking the
          // h-function chain from the deepest conditioning set down
          const PathVineConditionals cond(std::span<const double>(u.data(), j));
          double c = w[j];
          for (int k = 0; k < j; ++k) {
            const double rho = PathVineConditionals::edge_rho(
                std::span<const double>(u.data(), j + 1), k, j);
            const double given =
                (k + 1 <= j - 1) ? cond.left[k][j - 1] : u[k]; // G(u_k | u_{k+1..j-1})
            c = gaussian_hfunc_inverse(c, given, rho);
            c = std::clamp(c, kBoundaryClamp, 1.0 - kBoundaryClamp);
          }
          u[j] = c;
        }
        for (int j = 0; j < d; ++j) out.at(i, j) = normal_quantile(u[j]);
      }
      break;
    }
  }
  return out;
}

} // namespace vinekde
