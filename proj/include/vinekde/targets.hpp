#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "vinekde/matrix.hpp"

namespace vinekde {

enum class ScenarioKind { gaussian_copula, gumbel_copula, nonsimplified_gaussian_vine };

ScenarioKind scenario_from_string(const std::string& name);
std::string scenario_to_string(ScenarioKind kind);

//! Simulation target: a copula family with standard normal margins.
struct ScenarioSpec {
  ScenarioKind kind{ScenarioKind::gaussian_copula};
  int d{3};
  double tau{0.4};
};

//! Kendall's tau to family parameter: rho = sin(pi tau / 2) for the Gaussian
//! family, theta = 1/(1 - tau) for Gumbel.
double tau_to_param(ScenarioKind kind, double tau);

//! Exact density oracles, usable independently of the estimators.
double gaussian_copula_density2(double u, double v, double rho);
double gaussian_hfunc(double u, double v, double rho);
double gaussian_hfunc_inverse(double p, double v, double rho);

//! d-th derivative of the Gumbel generator exp(-t^{1/theta}) (signed value).
double gumbel_generator_deriv(double t, int d, double theta);

//! Local correlation of a non-simplified path-vine edge given its
//! conditioning values: 1 - (2/|D|) sum(u_D). Used by the scenario-3 target.
double nonsimplified_edge_rho(std::span<const double> conditioning_values);

//! Exact target density at x (strictly positive on R^d).
//! `boundary_flagged`, when given, is set if a margin had to be clamped away
//! from the cdf boundary before evaluating the copula.
double true_density(const ScenarioSpec& spec, std::span<const double> x,
                    bool* boundary_flagged = nullptr);

//! n exact draws from the target, deterministic given the seed.
Matrix sample_scenario(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed);

} // namespace vinekde
