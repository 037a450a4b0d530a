#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vinekde/marginal.hpp"
#include "vinekde/matrix.hpp"
#include "vinekde/structure.hpp"

namespace vinekde {

struct VineFitOptions {
  const RVineStructure* structure{nullptr}; // selected by MST when null
  bool independence_test{false};
  double independence_level{0.05};
  double margin_bandwidth_multiplier{1.0};
};

struct VineFitMeta {
  std::size_t n{0};
  double clamp_lo{0.0};
  bool independence_test{false};
  double independence_level{0.05};
  double margin_bandwidth_multiplier{1.0};
};

//! Fitted vine density: d marginal estimates, d(d-1)/2 pair-copulas wired to
//! a tree sequence, and the column bookkeeping needed to replay the
//! h-function pipeline at evaluation time.
struct VineDensityModel {
  RVineStructure structure;
  std::vector<MarginalEstimate> margins;
  std::vector<PairCopulaEstimate> pair_copulas;
  std::vector<std::array<ColumnRef, 2>> edge_inputs;
  std::vector<double> edge_tau;
  VineFitMeta meta;

  int dimension() const { return structure.d; }

  //! Joint density at one point; zero only where a marginal density is zero.
  double density(std::span<const double> x) const;

  //! Densities for every row of `points` (parallel over rows).
  std::vector<double> density_batch(const Matrix& points) const;

  //! Total h-function denominator fallbacks seen by this model's pair-copulas.
  std::uint64_t hfunc_fallbacks() const;

  std::string serialize() const;
  static VineDensityModel deserialize(const std::string& bytes);
};

//! Sequential fit: margins first, pseudo-observations clamped to
//! [1/(n+1), n/(n+1)], then tree-by-tree pair-copula estimation with
//! structure selection interleaved unless a structure is supplied.
VineDensityModel fit_vine(const Matrix& data, const VineFitOptions& options = {});

} // namespace vinekde
