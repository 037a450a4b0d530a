#include "vinekde/vinefit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vinekde {

namespace {
// keeps the joint density strictly positive wherever all margins are: a pair
// copula factor can be exactly zero off the kernel support, and long products
// of tiny factors can underflow
constexpr double kMinPositiveDensity = 1e-320;
} // namespace

VineDensityModel fit_vine(const Matrix& data, const VineFitOptions& options) {
  const std::size_t n = data.rows;
  const int d = static_cast<int>(data.cols);
  if (n < 10) throw std::invalid_argument("fit_vine: need at least 10 observations");
  if (d < 2) throw std::invalid_argument("fit_vine: need at least 2 variables");

  VineDensityModel model;
  model.meta.n = n;
  model.meta.clamp_lo = 1.0 / static_cast<double>(n + 1);
  model.meta.independence_test = options.independence_test;
  model.meta.independence_level = options.independence_level;
  model.meta.margin_bandwidth_multiplier = options.margin_bandwidth_multiplier;

  const double lo = model.meta.clamp_lo;
  const double hi = 1.0 - lo;

  model.margins.reserve(d);
  std::vector<std::vector<double>> u_columns(d);
  for (int l = 0; l < d; ++l) {
    const auto col = data.column(l);
    try {
      model.margins.push_back(
          MarginalEstimate::fit(col, options.margin_bandwidth_multiplier));
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("fit_vine: degenerate column " +
                                  std::to_string(l + 1));
    }
    auto& u = u_columns[l];
    u.resize(n);
    const MarginalEstimate& m = model.margins.back();
    for (std::size_t i = 0; i < n; ++i)
      u[i] = std::min(std::max(m.cdf(col[i]), lo), hi);
  }

  CopulaFitOptions copts;
  copts.fixed_structure = options.structure;
  copts.independence_test = options.independence_test;
  copts.independence_level = options.independence_level;
  copts.clamp_lo = lo;
  CopulaFit cf = fit_copula_structure(u_columns, copts);

  model.structure = std::move(cf.structure);
  model.pair_copulas = std::move(cf.pair_copulas);
  model.edge_inputs = std::move(cf.edge_inputs);
  model.edge_tau = std::move(cf.edge_tau);
  return model;
}

double VineDensityModel::density(std::span<const double> x) const {
  const int d = dimension();
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("VineDensityModel::density: dimension mismatch");

  const double lo = meta.clamp_lo;
  const double hi = 1.0 - lo;

  double result = 1.0;
  bool margins_positive = true;
  std::vector<double> u(d);
  for (int l = 0; l < d; ++l) {
    const double fl = margins[l].density(x[l]);
    margins_positive = margins_positive && fl > 0.0;
    result *= fl;
    u[l] = std::min(std::max(margins[l].cdf(x[l]), lo), hi);
  }

  // replay the pipeline: per edge, resolve the two conditional arguments and
  // push both h-transforms for consumption in higher trees
  const std::size_t n_edges = pair_copulas.size();
  std::vector<std::array<double, 2>> hvals(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    auto arg = [&](const ColumnRef& ref) {
      if (ref.source == ColumnRef::Source::margin) return u[ref.index];
      return hvals[ref.index][ref.dir == HDir::first_given_second ? 0 : 1];
    };
    const double uj = arg(edge_inputs[e][0]);
    const double uk = arg(edge_inputs[e][1]);
    const PairCopulaEstimate& pc = pair_copulas[e];
    result *= pc.density(uj, uk);
    hvals[e][0] =
        std::min(std::max(pc.hfunc(uj, uk, HDir::first_given_second), lo), hi);
    hvals[e][1] =
        std::min(std::max(pc.hfunc(uk, uj, HDir::second_given_first), lo), hi);
  }
  if (margins_positive && result < kMinPositiveDensity)
    result = kMinPositiveDensity;
  return result;
}

std::vector<double> VineDensityModel::density_batch(const Matrix& points) const {
  std::vector<double> out(points.rows);
  const std::int64_t n = static_cast<std::int64_t>(points.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = density(points.row(i));
  return out;
}

std::uint64_t VineDensityModel::hfunc_fallbacks() const {
  std::uint64_t total = 0;
  for (const auto& pc : pair_copulas) total += pc.fallback_count();
  return total;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json structure_to_json(const RVineStructure& s) {
  ordered_json trees = ordered_json::array();
  for (int m = 0; m < static_cast<int>(s.trees.size()); ++m) {
    for (const auto& e : s.trees[m]) {
      ordered_json je;
      je["tree"] = m + 1;
      je["conditioned"] = {e.conditioned[0] + 1, e.conditioned[1] + 1};
      ordered_json cond = ordered_json::array();
      for (int v : e.conditioning) cond.push_back(v + 1);
      je["conditioning"] = std::move(cond);
      ordered_json parents = ordered_json::array();
      if (m > 0) parents = {e.parents[0], e.parents[1]};
      je["parents"] = std::move(parents);
      trees.push_back(std::move(je));
    }
  }
  return trees;
}

RVineStructure structure_from_json(const ordered_json& j, int d) {
  RVineStructure s;
  s.d = d;
  s.trees.resize(d - 1);
  for (const auto& je : j) {
    const int m = je.at("tree").get<int>();
    if (m < 1 || m > d - 1)
      throw std::invalid_argument("structure: tree index out of range");
    VineEdge e;
    const auto& cond = je.at("conditioned");
    if (cond.size() != 2)
      throw std::invalid_argument("structure: conditioned pair must have 2 entries");
    e.conditioned = {cond[0].get<int>() - 1, cond[1].get<int>() - 1};
    for (const auto& v : je.at("conditioning"))
      e.conditioning.push_back(v.get<int>() - 1);
    const auto& par = je.at("parents");
    if (m == 1) {
      if (!par.empty())
        throw std::invalid_argument("structure: tree-1 edges cannot have parents");
    } else {
      if (par.size() != 2)
        throw std::invalid_argument("structure: edges above tree 1 need 2 parents");
      e.parents = {par[0].get<int>(), par[1].get<int>()};
    }
    s.trees[m - 1].push_back(std::move(e));
  }
  return s;
}

void require_finite(double v, const char* where) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string("model file: non-finite value in ") +
                                where);
}

} // namespace

std::string VineDensityModel::serialize() const {
  ordered_json j;
  j["version"] = 1;
  j["d"] = dimension();
  j["n"] = meta.n;
  j["structure"] = structure_to_json(structure);

  ordered_json margins_json = ordered_json::array();
  for (const auto& m : margins) {
    ordered_json jm;
    jm["sample"] = m.sample;
    jm["bandwidth"] = m.bandwidth;
    jm["multiplier"] = m.multiplier;
    margins_json.push_back(std::move(jm));
  }
  j["margins"] = std::move(margins_json);

  ordered_json pcs = ordered_json::array();
  for (std::size_t e = 0; e < pair_copulas.size(); ++e) {
    const auto& pc = pair_copulas[e];
    ordered_json jp;
    jp["edge"] = e;
    jp["is_independence"] = pc.independence;
    ordered_json zs = ordered_json::array();
    for (std::size_t i = 0; i < pc.z1_by1.size(); ++i)
      zs.push_back({pc.z1_by1[i], pc.z2_by1[i]});
    jp["z_sample"] = std::move(zs);
    jp["bandwidth"] = pc.bandwidth;
    pcs.push_back(std::move(jp));
  }
  j["pair_copulas"] = std::move(pcs);

  ordered_json meta_json;
  meta_json["clamp_lo"] = meta.clamp_lo;
  meta_json["independence_test"] = meta.independence_test;
  meta_json["independence_level"] = meta.independence_level;
  meta_json["margin_bandwidth_multiplier"] = meta.margin_bandwidth_multiplier;
  meta_json["tau"] = edge_tau;
  meta_json["hfunc_fallbacks"] = hfunc_fallbacks();
  j["meta"] = std::move(meta_json);

  return j.dump();
}

VineDensityModel VineDensityModel::deserialize(const std::string& bytes) {
  ordered_json j;
  try {
    j = ordered_json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model file: parse error: ") + e.what());
  }

  try {
    if (j.at("version").get<int>() != 1)
      throw std::invalid_argument("model file: unsupported version");
    const int d = j.at("d").get<int>();
    if (d < 2) throw std::invalid_argument("model file: d must be >= 2");

    VineDensityModel model;
    model.meta.n = j.at("n").get<std::size_t>();
    model.structure = structure_from_json(j.at("structure"), d);
    const auto v = validate_structure(model.structure);
    if (!v.ok) throw std::invalid_argument("model file: invalid structure: " + v.message);

    for (const auto& jm : j.at("margins")) {
      MarginalEstimate m;
      m.sample = jm.at("sample").get<std::vector<double>>();
      m.bandwidth = jm.at("bandwidth").get<double>();
      m.multiplier = jm.value("multiplier", 1.0);
      if (m.sample.size() < 2)
        throw std::invalid_argument("model file: marginal sample too small");
      if (!(m.bandwidth > 0.0))
        throw std::invalid_argument("model file: marginal bandwidth must be positive");
      for (double s : m.sample) require_finite(s, "marginal sample");
      if (!std::is_sorted(m.sample.begin(), m.sample.end()))
        throw std::invalid_argument("model file: marginal sample must be sorted");
      model.margins.push_back(std::move(m));
    }
    if (static_cast<int>(model.margins.size()) != d)
      throw std::invalid_argument("model file: expected d marginal estimates");

    const std::size_t expected_edges = static_cast<std::size_t>(d) * (d - 1) / 2;
    for (const auto& jp : j.at("pair_copulas")) {
      const bool indep = jp.at("is_independence").get<bool>();
      if (indep) {
        model.pair_copulas.push_back(PairCopulaEstimate::make_independence());
        continue;
      }
      const double bw = jp.at("bandwidth").get<double>();
      if (!(bw > 0.0))
        throw std::invalid_argument("model file: pair-copula bandwidth must be positive");
      std::vector<double> z1, z2;
      for (const auto& pair : jp.at("z_sample")) {
        if (pair.size() != 2)
          throw std::invalid_argument("model file: z_sample entries must be pairs");
        const double a = pair[0].get<double>();
        const double b = pair[1].get<double>();
        require_finite(a, "z_sample");
        require_finite(b, "z_sample");
        z1.push_back(a);
        z2.push_back(b);
      }
      if (z1.size() < 2)
        throw std::invalid_argument("model file: z_sample too small");
      model.pair_copulas.push_back(PairCopulaEstimate::from_z_sample(z1, z2, bw));
    }
    if (model.pair_copulas.size() != expected_edges)
      throw std::invalid_argument("model file: expected d(d-1)/2 pair-copulas");

    const auto& jm = j.at("meta");
    model.meta.clamp_lo = jm.at("clamp_lo").get<double>();
    model.meta.independence_test = jm.at("independence_test").get<bool>();
    model.meta.independence_level = jm.at("independence_level").get<double>();
    model.meta.margin_bandwidth_multiplier =
        jm.at("margin_bandwidth_multiplier").get<double>();
    model.edge_tau = jm.at("tau").get<std::vector<double>>();
    if (!(model.meta.clamp_lo > 0.0 && model.meta.clamp_lo < 0.5))
      throw std::invalid_argument("model file: clamp_lo out of range");

    // rebuild input column references from the parent edges
    model.edge_inputs.resize(model.pair_copulas.size());
    std::size_t abs_idx = 0;
    for (int m = 0; m < d - 1; ++m) {
      for (const auto& e : model.structure.trees[m]) {
        std::array<ColumnRef, 2> refs;
        for (int side = 0; side < 2; ++side) {
          const int var = e.conditioned[side];
          if (m == 0) {
            refs[side] = ColumnRef{ColumnRef::Source::margin, var,
                                   HDir::first_given_second};
          } else {
            int parent = -1;
            for (int p : e.parents) {
              const VineEdge& pe = model.structure.edge(p);
              if (pe.conditioned[0] == var || pe.conditioned[1] == var) parent = p;
            }
            if (parent < 0)
              throw std::invalid_argument(
                  "model file: conditioned variable not found in parents");
            const VineEdge& pe = model.structure.edge(parent);
            refs[side] = ColumnRef{ColumnRef::Source::hfunc, parent,
                                   pe.conditioned[0] == var
                                       ? HDir::first_given_second
                                       : HDir::second_given_first};
          }
        }
        model.edge_inputs[abs_idx++] = refs;
      }
    }

    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model file: schema violation: ") +
                                e.what());
  }
}

} // namespace vinekde
