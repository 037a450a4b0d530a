#include "vinekde/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vinekde/numerics.hpp"

namespace vinekde {

const VineEdge& RVineStructure::edge(int abs_index) const {
  int i = abs_index;
  for (const auto& t : trees) {
    if (i < static_cast<int>(t.size())) return t[i];
    i -= static_cast<int>(t.size());
  }
  throw std::out_of_range("RVineStructure::edge: index out of range");
}

namespace {

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> sorted_intersection(const std::vector<int>& a,
                                     const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::vector<int> sorted_symdiff(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(out));
  return out;
}

// conditioned pair plus conditioning set, sorted
std::vector<int> constraint_set(const VineEdge& e) {
  std::vector<int> c(e.conditioning);
  c.push_back(e.conditioned[0]);
  c.push_back(e.conditioned[1]);
  std::sort(c.begin(), c.end());
  return c;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

std::string edge_name(const VineEdge& e) {
  std::ostringstream os;
  os << e.conditioned[0] + 1 << "," << e.conditioned[1] + 1;
  if (!e.conditioning.empty()) {
    os << ";";
    for (std::size_t i = 0; i < e.conditioning.size(); ++i)
      os << (i ? "," : "") << e.conditioning[i] + 1;
  }
  return os.str();
}

} // namespace

ValidationResult validate_structure(const RVineStructure& s) {
  auto fail = [](const std::string& msg) { return ValidationResult{false, msg}; };
  if (s.d < 2) return fail("dimension must be at least 2");
  if (static_cast<int>(s.trees.size()) != s.d - 1)
    return fail("expected d-1 trees");
  if (s.edge_count() != static_cast<std::size_t>(s.d) * (s.d - 1) / 2)
    return fail("total edge count must be d(d-1)/2");

  for (int m = 0; m < s.d - 1; ++m) {
    const auto& tree = s.trees[m];
    const int n_nodes = (m == 0) ? s.d : static_cast<int>(s.trees[m - 1].size());
    if (static_cast<int>(tree.size()) != n_nodes - 1) {
      std::ostringstream os;
      os << "tree " << m + 1 << ": expected " << n_nodes - 1 << " edges, got "
         << tree.size();
      return fail(os.str());
    }
    const int prev_offset = (m == 0) ? 0 : s.tree_offset(m - 1);
    DisjointSet dsu(n_nodes);
    for (const auto& e : tree) {
      if (e.conditioned[0] < 0 || e.conditioned[1] < 0 ||
          e.conditioned[0] >= s.d || e.conditioned[1] >= s.d ||
          e.conditioned[0] >= e.conditioned[1])
        return fail("edge " + edge_name(e) +
                    ": conditioned pair must be two distinct ascending variables");
      if (static_cast<int>(e.conditioning.size()) != m)
        return fail("edge " + edge_name(e) + ": conditioning set must have " +
                    std::to_string(m) + " elements");
      int node_a, node_b;
      if (m == 0) {
        node_a = e.conditioned[0];
        node_b = e.conditioned[1];
        if (e.parents[0] != -1 || e.parents[1] != -1)
          return fail("edge " + edge_name(e) + ": tree-1 edges have no parents");
      } else {
        node_a = e.parents[0] - prev_offset;
        node_b = e.parents[1] - prev_offset;
        if (node_a < 0 || node_b < 0 || node_a >= n_nodes || node_b >= n_nodes ||
            node_a == node_b)
          return fail("edge " + edge_name(e) +
                      ": parents must be two distinct edges of the previous tree");
        const VineEdge& pa = s.trees[m - 1][node_a];
        const VineEdge& pb = s.trees[m - 1][node_b];
        // proximity: the parent edges must share a node of their own tree
        bool share;
        if (m == 1) {
          share = pa.conditioned[0] == pb.conditioned[0] ||
                  pa.conditioned[0] == pb.conditioned[1] ||
                  pa.conditioned[1] == pb.conditioned[0] ||
                  pa.conditioned[1] == pb.conditioned[1];
        } else {
          share = pa.parents[0] == pb.parents[0] || pa.parents[0] == pb.parents[1] ||
                  pa.parents[1] == pb.parents[0] || pa.parents[1] == pb.parents[1];
        }
        if (!share)
          return fail("edge " + edge_name(e) +
                      ": proximity violated, parent edges share no node");
        const auto ca = constraint_set(pa);
        const auto cb = constraint_set(pb);
        const auto diff = sorted_symdiff(ca, cb);
        const auto inter = sorted_intersection(ca, cb);
        if (diff.size() != 2 ||
            diff[0] != e.conditioned[0] || diff[1] != e.conditioned[1])
          return fail("edge " + edge_name(e) +
                      ": conditioned pair inconsistent with parents");
        if (inter != e.conditioning)
          return fail("edge " + edge_name(e) +
                      ": conditioning set inconsistent with parents");
      }
      if (!dsu.unite(node_a, node_b))
        return fail("edge " + edge_name(e) + ": creates a cycle in tree " +
                    std::to_string(m + 1));
    }
  }
  return {};
}

std::vector<int> max_spanning_tree(int n_nodes,
                                   std::span<const CandidateEdge> candidates) {
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ea = candidates[a];
    const auto& eb = candidates[b];
    if (ea.weight != eb.weight) return ea.weight > eb.weight;
    if (ea.conditioned != eb.conditioned) return ea.conditioned < eb.conditioned;
    if (ea.conditioning != eb.conditioning) return ea.conditioning < eb.conditioning;
    return std::pair(ea.node_a, ea.node_b) < std::pair(eb.node_a, eb.node_b);
  });
  DisjointSet dsu(n_nodes);
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(n_nodes) - 1);
  for (int i : order) {
    if (dsu.unite(candidates[i].node_a, candidates[i].node_b)) {
      chosen.push_back(i);
      if (static_cast<int>(chosen.size()) == n_nodes - 1) break;
    }
  }
  if (static_cast<int>(chosen.size()) != n_nodes - 1)
    throw std::runtime_error("max_spanning_tree: candidate graph is not connected");
  return chosen;
}

bool independence_test_rejects(double tau_hat, std::size_t n, double level) {
  if (n < 10)
    throw std::invalid_argument("independence_test: need at least 10 observations");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("independence_test: level must be in (0,1)");
  const double nn = static_cast<double>(n);
  const double stat =
      std::abs(tau_hat) * std::sqrt(9.0 * nn * (nn - 1.0) / (2.0 * (2.0 * nn + 5.0)));
  return stat > normal_quantile(1.0 - level / 2.0);
}

namespace {

struct NodeState {
  std::vector<int> constraint;            // sorted variable set
  std::array<int, 2> conditioned{-1, -1}; // for nodes backed by an edge
  int abs_edge{-1};                       // absolute edge index, -1 for variables
  const std::vector<double>* col_first{nullptr};
  const std::vector<double>* col_second{nullptr};
};

// pseudo-observation column for variable `var` at this node, or null if the
// node cannot supply it (only the conditioned elements carry h-transforms)
const std::vector<double>* node_column(const NodeState& node, int var) {
  if (node.abs_edge < 0)
    return node.constraint[0] == var ? node.col_first : nullptr;
  if (var == node.conditioned[0]) return node.col_first;
  if (var == node.conditioned[1]) return node.col_second;
  return nullptr;
}

ColumnRef node_column_ref(const NodeState& node, int var) {
  if (node.abs_edge < 0)
    return ColumnRef{ColumnRef::Source::margin, node.constraint[0],
                     HDir::first_given_second};
  return ColumnRef{ColumnRef::Source::hfunc, node.abs_edge,
                   var == node.conditioned[0] ? HDir::first_given_second
                                              : HDir::second_given_first};
}

struct ScoredCandidate : CandidateEdge {
  double tau{0.0}; // signed
};

} // namespace

CopulaFit fit_copula_structure(const std::vector<std::vector<double>>& u_columns,
                               const CopulaFitOptions& options) {
  const int d = static_cast<int>(u_columns.size());
  if (d < 2)
    throw std::invalid_argument("fit_copula_structure: need at least 2 columns");
  const std::size_t n = u_columns[0].size();
  for (const auto& c : u_columns)
    if (c.size() != n)
      throw std::invalid_argument("fit_copula_structure: ragged columns");

  const RVineStructure* fixed = options.fixed_structure;
  if (fixed) {
    if (fixed->d != d)
      throw std::invalid_argument("fit_copula_structure: structure dimension mismatch");
    const auto v = validate_structure(*fixed);
    if (!v.ok)
      throw std::invalid_argument("fit_copula_structure: invalid structure: " +
                                  v.message);
  }

  const double lo = options.clamp_lo;
  const double hi = 1.0 - options.clamp_lo;
  auto clamp_u = [&](double x) { return std::min(std::max(x, lo), hi); };

  CopulaFit out;
  out.structure.d = d;
  out.structure.trees.resize(d - 1);

  // h-transform columns, two per fitted edge; reserved up front so node
  // pointers into it stay valid
  std::vector<std::array<std::vector<double>, 2>> edge_columns;
  edge_columns.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);

  std::vector<NodeState> nodes(d);
  for (int i = 0; i < d; ++i) {
    nodes[i].constraint = {i};
    nodes[i].col_first = &u_columns[i];
  }

  for (int m = 0; m < d - 1; ++m) {
    const int n_nodes = static_cast<int>(nodes.size());
    const int prev_offset = (m == 0) ? 0 : out.structure.tree_offset(m - 1);

    std::vector<ScoredCandidate> candidates;
    if (fixed) {
      for (const auto& e : fixed->trees[m]) {
        ScoredCandidate c;
        if (m == 0) {
          c.node_a = e.conditioned[0];
          c.node_b = e.conditioned[1];
        } else {
          c.node_a = e.parents[0] - prev_offset;
          c.node_b = e.parents[1] - prev_offset;
        }
        c.conditioned = e.conditioned;
        c.conditioning = e.conditioning;
        candidates.push_back(std::move(c));
      }
    } else {
      for (int a = 0; a < n_nodes; ++a) {
        for (int b = a + 1; b < n_nodes; ++b) {
          const auto diff = sorted_symdiff(nodes[a].constraint, nodes[b].constraint);
          if (diff.size() != 2) continue; // proximity
          ScoredCandidate c;
          c.node_a = a;
          c.node_b = b;
          c.conditioned = {diff[0], diff[1]};
          c.conditioning =
              sorted_intersection(nodes[a].constraint, nodes[b].constraint);
          candidates.push_back(std::move(c));
        }
      }
    }

    auto column_for = [&](const ScoredCandidate& c, int var) {
      const auto* p = node_column(nodes[c.node_a], var);
      return p ? p : node_column(nodes[c.node_b], var);
    };

    const std::int64_t n_cand = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n_cand; ++i) {
      auto& c = candidates[i];
      c.tau = kendalls_tau(*column_for(c, c.conditioned[0]),
                           *column_for(c, c.conditioned[1]));
      c.weight = std::abs(c.tau);
    }

    std::vector<int> chosen;
    if (fixed) {
      chosen.resize(candidates.size());
      std::iota(chosen.begin(), chosen.end(), 0);
    } else {
      std::vector<CandidateEdge> plain(candidates.begin(), candidates.end());
      chosen = max_spanning_tree(n_nodes, plain);
    }

    std::vector<NodeState> next_nodes;
    next_nodes.reserve(chosen.size());
    for (int ci : chosen) {
      const ScoredCandidate& c = candidates[ci];
      const int j = c.conditioned[0];
      const int k = c.conditioned[1];
      const NodeState& node_j =
          node_column(nodes[c.node_a], j) ? nodes[c.node_a] : nodes[c.node_b];
      const NodeState& node_k =
          node_column(nodes[c.node_b], k) ? nodes[c.node_b] : nodes[c.node_a];
      const std::vector<double>& col_j = *node_column(node_j, j);
      const std::vector<double>& col_k = *node_column(node_k, k);

      const int abs_idx = static_cast<int>(out.pair_copulas.size());

      VineEdge edge;
      edge.conditioned = c.conditioned;
      edge.conditioning = c.conditioning;
      if (m > 0)
        edge.parents = {prev_offset + std::min(c.node_a, c.node_b),
                        prev_offset + std::max(c.node_a, c.node_b)};

      PairCopulaEstimate pc;
      const bool make_independent =
          options.independence_test &&
          !independence_test_rejects(c.tau, n, options.independence_level);
      if (make_independent) {
        pc = PairCopulaEstimate::make_independence();
      } else {
        pc = PairCopulaEstimate::fit(col_j, col_k);
      }

      std::array<std::vector<double>, 2> hcols;
      hcols[0].resize(n);
      hcols[1].resize(n);
      const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < nn; ++i) {
        hcols[0][i] = clamp_u(pc.hfunc(col_j[i], col_k[i], HDir::first_given_second));
        hcols[1][i] = clamp_u(pc.hfunc(col_k[i], col_j[i], HDir::second_given_first));
      }

      out.edge_inputs.push_back(
          {node_column_ref(node_j, j), node_column_ref(node_k, k)});
      out.edge_tau.push_back(c.tau);
      out.pair_copulas.push_back(std::move(pc));
      out.structure.trees[m].push_back(edge);
      edge_columns.push_back(std::move(hcols));

      NodeState ns;
      ns.constraint = sorted_union(node_j.constraint, node_k.constraint);
      ns.conditioned = c.conditioned;
      ns.abs_edge = abs_idx;
      ns.col_first = &edge_columns[abs_idx][0];
      ns.col_second = &edge_columns[abs_idx][1];
      next_nodes.push_back(std::move(ns));
    }
    nodes = std::move(next_nodes);
  }

  return out;
}

CopulaFit select_structure_mst(const std::vector<std::vector<double>>& u_columns,
                               const CopulaFitOptions& options) {
  CopulaFitOptions opts = options;
  opts.fixed_structure = nullptr;
  return fit_copula_structure(u_columns, opts);
}

} // namespace vinekde
