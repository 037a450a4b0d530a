#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vinekde/paircop.hpp"

namespace vinekde {

//! One edge of an R-vine tree. Variable indices are 0-based and the
//! conditioned pair and conditioning set are kept sorted ascending.
//! `parents` holds the absolute indices (into the flattened, tree-major edge
//! list) of the two previous-tree edges this edge joins; {-1,-1} in tree 1.
struct VineEdge {
  std::array<int, 2> conditioned{-1, -1};
  std::vector<int> conditioning;
  std::array<int, 2> parents{-1, -1};
};

//! Tree sequence T_1..T_{d-1}: T_1 on the d variables, each later tree on the
//! edges of the previous one, subject to the proximity condition.
struct RVineStructure {
  int d{0};
  std::vector<std::vector<VineEdge>> trees;

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (const auto& t : trees) c += t.size();
    return c;
  }
  //! Absolute index of the first edge of tree m (0-based m).
  int tree_offset(int m) const {
    int off = 0;
    for (int i = 0; i < m; ++i) off += static_cast<int>(trees[i].size());
    return off;
  }
  const VineEdge& edge(int abs_index) const;
};

struct ValidationResult {
  bool ok{true};
  std::string message;
};

//! Checks tree sizes, connectedness, the proximity condition, and consistency
//! of conditioned/conditioning sets with the parent edges. Returns the first
//! violation found.
ValidationResult validate_structure(const RVineStructure& s);

//! Candidate edge for one tree of the greedy structure selection.
struct CandidateEdge {
  int node_a{-1}, node_b{-1}; // local node ids within the current tree
  double weight{0.0};         // |tau-hat|
  std::array<int, 2> conditioned{-1, -1};
  std::vector<int> conditioning;
};

//! Kruskal maximum spanning tree with deterministic tie-breaking
//! (weight descending, then conditioned pair, conditioning set, node ids).
//! Returns indices of accepted candidates in acceptance order.
std::vector<int> max_spanning_tree(int n_nodes,
                                   std::span<const CandidateEdge> candidates);

//! Asymptotic Kendall's tau independence test:
//! dependent iff |tau| sqrt(9n(n-1) / (2(2n+5))) exceeds the standard normal
//! (1 - level/2)-quantile. Requires n >= 10.
bool independence_test_rejects(double tau_hat, std::size_t n, double level);

//! Where an edge's input pseudo-observation column comes from: a marginal
//! column (index = variable) or one h-transform of a previous edge
//! (index = absolute edge index, dir = which conditional).
struct ColumnRef {
  enum class Source { margin, hfunc };
  Source source{Source::margin};
  int index{0};
  HDir dir{HDir::first_given_second};
};

struct CopulaFitOptions {
  const RVineStructure* fixed_structure{nullptr}; // select by MST when null
  bool independence_test{false};
  double independence_level{0.05};
  double clamp_lo{0.0}; // pseudo-observation clamp bound, 1/(n+1)
};

//! Result of the sequential pair-copula estimation: the tree sequence, one
//! fitted pair-copula per edge, per-edge input column bookkeeping, and the
//! Kendall's tau estimates used as selection weights.
struct CopulaFit {
  RVineStructure structure;
  std::vector<PairCopulaEstimate> pair_copulas;
  std::vector<std::array<ColumnRef, 2>> edge_inputs;
  std::vector<double> edge_tau;
};

//! Sequential estimation over the tree sequence: per tree, pick edges (maximum
//! spanning tree on |tau| unless a structure is fixed), fit each pair-copula
//! on the current pseudo-observations, and push both h-transforms to the next
//! tree. Columns must already be clamped to [clamp_lo, 1-clamp_lo].
CopulaFit fit_copula_structure(const std::vector<std::vector<double>>& u_columns,
                               const CopulaFitOptions& options);

//! Greedy structure selection (no fixed structure).
CopulaFit select_structure_mst(const std::vector<std::vector<double>>& u_columns,
                               const CopulaFitOptions& options);

} // namespace vinekde
